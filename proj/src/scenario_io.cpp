#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tcfp/error.hpp"
#include "tcfp/plantsim.hpp"

namespace tcfp {

namespace {

using nlohmann::json;

const char* kind_name(DeviceKind k) { return k == DeviceKind::pump ? "pump" : "motorized_valve"; }

DeviceKind parse_kind(const std::string& s) {
  if (s == "pump") return DeviceKind::pump;
  if (s == "motorized_valve" || s == "valve") return DeviceKind::motorized_valve;
  fail(Errc::ConfigError, "unknown device kind '" + s + "'");
}

const char* action_name(RuleAction a) {
  switch (a) {
    case RuleAction::fill: return "fill";
    case RuleAction::drain: return "drain";
    case RuleAction::cycle: return "cycle";
  }
  return "?";
}

RuleAction parse_action(const std::string& s) {
  if (s == "fill") return RuleAction::fill;
  if (s == "drain") return RuleAction::drain;
  if (s == "cycle") return RuleAction::cycle;
  fail(Errc::ConfigError, "unknown rule action '" + s + "'");
}

// Missing keys keep the struct default.
template <class T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json opt_idx(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["sample_period_s"] = s.sample_period_s;
  j["duration_s"] = s.duration_s;
  j["tanks"] = json::array();
  for (const auto& t : s.tanks) {
    j["tanks"].push_back({{"name", t.name},
                          {"level_sensor", t.level_sensor},
                          {"level_per_flow", t.level_per_flow},
                          {"initial_level", t.initial_level},
                          {"low_sp", t.low_sp},
                          {"high_sp", t.high_sp},
                          {"critical_low", t.critical_low},
                          {"critical_high", t.critical_high},
                          {"max_in_rate", t.max_in_rate},
                          {"max_out_rate", t.max_out_rate},
                          {"noise_std", t.noise_std}});
  }
  j["devices"] = json::array();
  for (const auto& d : s.devices) {
    j["devices"].push_back({{"id", d.id},
                            {"kind", kind_name(d.kind)},
                            {"open_time_s", d.open_time_s},
                            {"close_time_s", d.close_time_s},
                            {"jitter_std_s", d.jitter_std_s},
                            {"process_tau_s", d.process_tau_s},
                            {"spread", d.spread},
                            {"interlock", d.interlock},
                            {"initial_on", d.initial_on}});
  }
  j["lines"] = json::array();
  for (const auto& l : s.lines) {
    j["lines"].push_back({{"sensor", l.sensor},
                          {"device", l.device},
                          {"max_rate", l.max_rate},
                          {"from_tank", l.from_tank},
                          {"to_tank", l.to_tank},
                          {"noise_std", l.noise_std}});
  }
  j["rules"] = json::array();
  for (const auto& r : s.rules) {
    j["rules"].push_back(
        {{"device", r.device}, {"action", action_name(r.action)}, {"tank", r.tank}, {"on_s", r.on_s}, {"off_s", r.off_s}});
  }
  const auto& w = s.watermark;
  j["watermark"] = {{"enabled", w.enabled},
                    {"delay_min_s", w.delay_min_s},
                    {"delay_max_s", w.delay_max_s},
                    {"seed", w.seed},
                    {"granularity_s", w.granularity_s},
                    {"safety_fraction", w.safety_fraction}};
  j["attacks"] = json::array();
  for (const auto& a : s.attacks) {
    j["attacks"].push_back({{"type", attack_name(a.type)},
                            {"targets", a.targets},
                            {"start_idx", a.start_idx},
                            {"duration", a.duration},
                            {"params", a.params}});
  }
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  Scenario s;
  try {
    const json j = json::parse(text);
    get(j, "name", s.name);
    get(j, "sample_period_s", s.sample_period_s);
    get(j, "duration_s", s.duration_s);
    for (const auto& jt : j.value("tanks", json::array())) {
      TankParams t;
      get(jt, "name", t.name);
      get(jt, "level_sensor", t.level_sensor);
      get(jt, "level_per_flow", t.level_per_flow);
      get(jt, "initial_level", t.initial_level);
      get(jt, "low_sp", t.low_sp);
      get(jt, "high_sp", t.high_sp);
      get(jt, "critical_low", t.critical_low);
      get(jt, "critical_high", t.critical_high);
      get(jt, "max_in_rate", t.max_in_rate);
      get(jt, "max_out_rate", t.max_out_rate);
      get(jt, "noise_std", t.noise_std);
      s.tanks.push_back(t);
    }
    for (const auto& jd : j.value("devices", json::array())) {
      DeviceParams d;
      get(jd, "id", d.id);
      if (jd.contains("kind")) d.kind = parse_kind(jd.at("kind").get<std::string>());
      get(jd, "open_time_s", d.open_time_s);
      get(jd, "close_time_s", d.close_time_s);
      get(jd, "jitter_std_s", d.jitter_std_s);
      get(jd, "process_tau_s", d.process_tau_s);
      get(jd, "spread", d.spread);
      get(jd, "interlock", d.interlock);
      get(jd, "initial_on", d.initial_on);
      s.devices.push_back(d);
    }
    for (const auto& jl : j.value("lines", json::array())) {
      FlowLine l;
      get(jl, "sensor", l.sensor);
      get(jl, "device", l.device);
      get(jl, "max_rate", l.max_rate);
      get(jl, "from_tank", l.from_tank);
      get(jl, "to_tank", l.to_tank);
      get(jl, "noise_std", l.noise_std);
      s.lines.push_back(l);
    }
    for (const auto& jr : j.value("rules", json::array())) {
      ControlRule r;
      get(jr, "device", r.device);
      if (jr.contains("action")) r.action = parse_action(jr.at("action").get<std::string>());
      get(jr, "tank", r.tank);
      get(jr, "on_s", r.on_s);
      get(jr, "off_s", r.off_s);
      s.rules.push_back(r);
    }
    if (j.contains("watermark")) {
      const auto& jw = j.at("watermark");
      auto& w = s.watermark;
      get(jw, "enabled", w.enabled);
      get(jw, "delay_min_s", w.delay_min_s);
      get(jw, "delay_max_s", w.delay_max_s);
      get(jw, "seed", w.seed);
      get(jw, "granularity_s", w.granularity_s);
      get(jw, "safety_fraction", w.safety_fraction);
    }
    for (const auto& ja : j.value("attacks", json::array())) {
      AttackSpec a;
      a.type = parse_attack(ja.at("type").get<std::string>());
      get(ja, "targets", a.targets);
      get(ja, "start_idx", a.start_idx);
      get(ja, "duration", a.duration);
      get(ja, "params", a.params);
      s.attacks.push_back(a);
    }
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, std::string("scenario document: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string GroundTruth::to_json() const {
  json j;
  j["critical_state_reached"] = critical_state_reached;
  j["first_critical_idx"] = opt_idx(first_critical_idx);
  j["commands"] = json::array();
  for (const auto& c : commands) {
    j["commands"].push_back({{"device", c.device},
                             {"on", c.on},
                             {"trigger_idx", c.trigger_idx},
                             {"exec_idx", c.exec_idx},
                             {"delay_samples", c.delay_samples},
                             {"source", c.source}});
  }
  j["attacks"] = json::array();
  for (const auto& a : attacks) {
    j["attacks"].push_back({{"type", attack_name(a.type)},
                            {"targets", a.targets},
                            {"start_idx", a.start_idx},
                            {"end_idx", a.end_idx},
                            {"active_start", opt_idx(a.active_start)},
                            {"active_end", opt_idx(a.active_end)},
                            {"no_op_attack", a.no_op_attack}});
  }
  return j.dump(2);
}

std::vector<AttackRecord> attack_records_from_json(const std::string& text) {
  std::vector<AttackRecord> out;
  try {
    const auto j = json::parse(text);
    for (const auto& a : j.at("attacks")) {
      AttackRecord r;
      r.type = parse_attack(a.at("type").get<std::string>());
      r.targets = a.at("targets").get<std::vector<std::string>>();
      r.start_idx = a.at("start_idx").get<std::size_t>();
      r.end_idx = a.at("end_idx").get<std::size_t>();
      if (!a.at("active_start").is_null()) r.active_start = a.at("active_start").get<std::size_t>();
      if (!a.at("active_end").is_null()) r.active_end = a.at("active_end").get<std::size_t>();
      r.no_op_attack = a.value("no_op_attack", false);
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(Errc::SchemaError, std::string("ground truth document: ") + e.what());
  } catch (const Error& e) {
    fail(Errc::SchemaError, e.what());
  }
  return out;
}

}  // namespace tcfp
