// tcfp: command line front end over the library.
// Exit codes: 0 ok, 1 library error (code name on stderr), 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svg.hpp"
#include "tcfp/campaigns.hpp"
#include "tcfp/classify.hpp"
#include "tcfp/detect.hpp"
#include "tcfp/error.hpp"
#include "tcfp/fingerprint.hpp"
#include "tcfp/plantsim.hpp"
#include "tcfp/scenarios.hpp"
#include "tcfp/sysid.hpp"
#include "tcfp/timeseries.hpp"
#include "tcfp/watermark.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tcfp;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string scenario;  // empty: built-in default
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--scenario", c.scenario, "scenario JSON (default: built-in stage-1 plant)");
}

void require_file(const std::string& p, const std::string& what) {
  if (p.empty()) throw UsageError(what + " is required");
  if (!fs::is_regular_file(p)) throw UsageError(what + " not found: " + p);
}

Scenario scenario_of(const Common& c) {
  if (c.scenario.empty()) return default_scenario();
  require_file(c.scenario, "--scenario");
  return load_scenario(c.scenario);
}

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

std::string read_text(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream o(p, std::ios::binary);
  if (!o) fail(Errc::IoError, "cannot write " + p.string());
  o << s;
}

// Resolved configuration, written next to every output and appended to text reports.
json resolved(const std::string& command, const Common& c, const Scenario& sc, json options) {
  json j;
  j["command"] = command;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["scenario_path"] = c.scenario.empty() ? "<built-in default>" : c.scenario;
  j["options"] = std::move(options);
  j["scenario"] = json::parse(scenario_to_json(sc));
  return j;
}

void write_config(const fs::path& dir, const json& cfg) { write_text(dir / "config.json", cfg.dump(2) + "\n"); }

std::string with_config(const std::string& body, const json& cfg) {
  return body + "\n--- resolved config ---\n" + cfg.dump(2) + "\n";
}

std::string num(double v) { return format_real(v); }

std::string pct(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

// Channel kinds and units come from a short run of the same scenario.
ChannelSchema schema_of(Scenario sc) {
  sc.attacks.clear();
  sc.watermark.enabled = false;
  return simulate(sc, 10.0 * sc.sample_period_s, 0).reported.schema();
}

Dataset read_data(const std::string& path, const Scenario& sc) {
  require_file(path, "--data");
  return ingest_csv(path, schema_of(sc));
}

struct PairArg {
  std::string actuator, sensor;
};

std::vector<PairArg> parse_pairs(const std::vector<std::string>& raw, const Scenario& sc) {
  std::vector<PairArg> out;
  if (raw.empty()) {
    for (const auto& l : sc.lines) out.push_back({l.device, l.sensor});
    return out;
  }
  for (const auto& r : raw) {
    const auto k = r.find(':');
    if (k == std::string::npos || k == 0 || k + 1 == r.size()) throw UsageError("--pair wants ACTUATOR:SENSOR, got " + r);
    out.push_back({r.substr(0, k), r.substr(k + 1)});
  }
  return out;
}

// Sensor thresholds from the nominal range of the line the sensor measures.
std::vector<Pairing> pairings_of(const std::vector<PairArg>& pairs, const Scenario& sc) {
  std::vector<Pairing> out;
  for (const auto& p : pairs) {
    const FlowLine* line = nullptr;
    for (const auto& l : sc.lines) {
      if (l.sensor == p.sensor) line = &l;
    }
    if (!line) fail(Errc::ConfigError, "sensor " + p.sensor + " is not a flow line of the scenario");
    out.push_back({p.actuator, p.sensor, thresholds_from_range(line->max_rate, 0.0)});
  }
  return out;
}

json pairs_json(const std::vector<PairArg>& pairs) {
  json j = json::array();
  for (const auto& p : pairs) j.push_back(p.actuator + ":" + p.sensor);
  return j;
}

// ---------------------------------------------------------------- simulate

void write_sim(const fs::path& dir, const SimResult& r) {
  export_csv(r.reported, dir / "reported.csv");
  export_csv(r.truth.truth, dir / "truth.csv");
  write_text(dir / "ground_truth.json", r.truth.to_json());
}

struct SimulateArgs {
  Common c;
  double duration = 0.0;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto sc = scenario_of(a.c);
  const double dur = a.duration > 0 ? a.duration : sc.duration_s;
  const auto dir = out_dir(a.c);
  const auto r = simulate(sc, dur, a.c.seed);
  write_sim(dir, r);
  write_config(dir, resolved("simulate", a.c, sc, {{"duration_s", dur}}));
  std::cout << "simulated " << r.reported.length() << " samples -> " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- attack

// TYPE:target[:target...][:key=value...]; start and duration are in samples.
AttackSpec parse_attack_spec(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2) throw UsageError("attack spec wants TYPE:TARGET[...]:start=N:duration=N, got " + s);
  AttackSpec a;
  a.type = parse_attack(parts[0]);
  bool have_start = false, have_dur = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) {
      a.targets.push_back(parts[i]);
      continue;
    }
    const auto key = parts[i].substr(0, eq);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(parts[i].substr(eq + 1), &used);
      if (used != parts[i].size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("bad number in attack spec: " + parts[i]);
    }
    if (key == "start" || key == "duration") {
      if (v < 0 || v != std::floor(v)) throw UsageError(key + " must be a whole number of samples: " + parts[i]);
      (key == "start" ? a.start_idx : a.duration) = static_cast<std::size_t>(v);
      (key == "start" ? have_start : have_dur) = true;
    } else {
      a.params[key] = v;
    }
  }
  if (!have_start || !have_dur) throw UsageError("attack spec needs start= and duration=: " + s);
  return a;
}

struct AttackArgs {
  Common c;
  double duration = 0.0;
  std::vector<std::string> specs;
};

int cmd_attack(const AttackArgs& a) {
  auto sc = scenario_of(a.c);
  for (const auto& s : a.specs) sc.attacks.push_back(parse_attack_spec(s));
  const double dur = a.duration > 0 ? a.duration : sc.duration_s;
  const auto dir = out_dir(a.c);
  const auto r = simulate(sc, dur, a.c.seed);
  write_sim(dir, r);
  write_config(dir, resolved("attack", a.c, sc, {{"duration_s", dur}, {"attacks", a.specs}}));
  std::size_t active = 0;
  for (const auto& rec : r.truth.attacks) active += rec.active_start.has_value();
  std::cout << r.truth.attacks.size() << " attacks scheduled, " << active << " acted -> " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- identify

struct IdentifyArgs {
  Common c;
  std::string data;
  std::vector<std::string> inputs, outputs;
  int order = 6;
  int horizon = 60;  // the flow response to a valve command lasts ~30 samples
  double ridge = 1e-8;
  double train_fraction = 0.7;
};

int cmd_identify(IdentifyArgs a) {
  const auto sc = scenario_of(a.c);
  auto ds = read_data(a.data, sc);
  if (a.inputs.empty()) {
    for (const auto& l : sc.lines) a.inputs.push_back(l.device);
  }
  if (a.outputs.empty()) {
    for (const auto& l : sc.lines) a.outputs.push_back(l.sensor);
  }
  // Status codes put transit (0) below both settled states, so actuators
  // enter as their logical state. All channels are centred on training means.
  json offsets;
  for (auto& ch : ds.channels) {
    if (ch.kind == ChannelKind::actuator) {
      const auto st = logical_states(ch);
      for (std::size_t i = 0; i < st.size(); ++i) ch.values[i] = st[i] == Op::on ? 1.0 : 0.0;
      ch.kind = ChannelKind::sensor;
    }
  }
  auto [train, test] = holdout_split(ds, a.train_fraction);
  for (auto& ch : train.channels) {
    double m = 0.0;
    for (double v : ch.values) m += v;
    m /= static_cast<double>(std::max<std::size_t>(ch.values.size(), 1));
    for (double& v : ch.values) v -= m;
    for (double& v : test.channel(ch.name).values) v -= m;
    offsets[ch.name] = m;
  }
  std::vector<std::string> warnings;
  const auto model = identify(train, a.inputs, a.outputs, {a.order, a.horizon, a.ridge}, &warnings);
  const auto gain = fit_observer_gain(model, train, a.inputs, a.outputs);
  const auto fit_train = validate(model, train, a.inputs, a.outputs);
  const auto fit_test = validate(model, test, a.inputs, a.outputs);
  const auto fit_test_kf = validate(model, test, a.inputs, a.outputs, gain);

  const auto dir = out_dir(a.c);
  auto mj = json::parse(model_to_json(model, gain));
  mj["preprocessing"] = {{"actuators", "logical state, 1 on / 0 off"}, {"offsets", offsets}};
  write_text(dir / "model.json", mj.dump(2) + "\n");
  std::ostringstream csv;
  csv << "output,nrmse_train,nrmse_heldout,nrmse_heldout_one_step,best_fit_heldout_pct\n";
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    csv << a.outputs[i] << ',' << num(fit_train.nrmse[i]) << ',' << num(fit_test.nrmse[i]) << ','
        << num(fit_test_kf.nrmse[i]) << ',' << pct(fit_test.best_fit_pct(i)) << '\n';
  }
  write_text(dir / "fit_report.csv", csv.str());
  const auto cfg = resolved("identify", a.c, sc,
                            {{"data", a.data},
                             {"inputs", a.inputs},
                             {"outputs", a.outputs},
                             {"order", a.order},
                             {"horizon", a.horizon},
                             {"ridge", a.ridge},
                             {"train_fraction", a.train_fraction}});
  std::ostringstream txt;
  txt << "identified order " << a.order << " model from " << train.length() << " samples, held out "
      << test.length() << "\n\n"
      << csv.str();
  for (const auto& w : warnings) txt << "warning: " << w << "\n";
  write_text(dir / "fit_report.txt", with_config(txt.str(), cfg));
  write_config(dir, cfg);
  std::cout << txt.str();
  return 0;
}

// ---------------------------------------------------------------- fingerprint

struct FingerprintArgs {
  Common c;
  std::string data;
  std::vector<std::string> pairs;
  std::size_t chunk = 10;
  double timeout = 120.0;
};

int cmd_fingerprint(const FingerprintArgs& a) {
  const auto sc = scenario_of(a.c);
  const auto ds = read_data(a.data, sc);
  const auto pairs = parse_pairs(a.pairs, sc);
  const auto pairings = pairings_of(pairs, sc);
  std::vector<FeatureVector> rows;
  std::vector<std::string> labels;
  std::ostringstream tr;
  tr << "actuator,sensor,op,start_idx,end_idx,transition_time_s,status\n";
  for (const auto& p : pairings) {
    const auto ev = extract_transitions(ds, p.actuator, p.sensor, p.thresholds, a.timeout);
    for (const auto& e : ev) {
      tr << p.actuator << ',' << p.sensor << ',' << op_name(e.op) << ',' << e.start_idx << ','
         << (e.end_idx ? std::to_string(*e.end_idx) : "") << ',' << num(e.transition_time_s) << ','
         << status_name(e.status) << '\n';
    }
    for (Op op : {Op::on, Op::off}) {
      const auto f = chunk_features(complete_times(ev, op), a.chunk);
      rows.insert(rows.end(), f.begin(), f.end());
      labels.insert(labels.end(), f.size(), p.actuator + ":" + op_name(op));
    }
  }
  const auto dir = out_dir(a.c);
  write_text(dir / "transitions.csv", tr.str());
  write_fingerprint_csv(dir / "fingerprint.csv", rows, labels);
  write_config(dir, resolved("fingerprint", a.c, sc,
                             {{"data", a.data}, {"pairs", pairs_json(pairs)}, {"chunk", a.chunk}, {"timeout_s", a.timeout}}));
  std::cout << rows.size() << " fingerprint rows -> " << (dir / "fingerprint.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train / classify

struct TrainArgs {
  Common c;
  std::string fingerprints;
  std::vector<std::string> clean;
  std::vector<std::string> pairs;
  std::string kernel = "rbf";
  double timeout = 120.0;
  double max_far = 0.02;
};

int cmd_train(const TrainArgs& a) {
  if (a.fingerprints.empty() == a.clean.empty()) throw UsageError("train wants exactly one of --fingerprints or --clean");
  const auto sc = scenario_of(a.c);
  const auto dir = out_dir(a.c);
  if (!a.fingerprints.empty()) {
    require_file(a.fingerprints, "--fingerprints");
    std::vector<FeatureVector> rows;
    std::vector<std::string> labels;
    read_fingerprint_csv(a.fingerprints, rows, labels);
    TrainConfig cfg;
    cfg.kernel = parse_kernel(a.kernel);
    cfg.seed = a.c.seed;
    const auto X = feature_matrix(rows);
    const auto m = train(X, labels, cfg);
    write_text(dir / "svm_model.json", svm_to_json(m));
    write_config(dir, resolved("train", a.c, sc, {{"fingerprints", a.fingerprints}, {"kernel", a.kernel}}));
    std::cout << "trained " << kernel_name(m.kernel) << " classifier on " << rows.size() << " rows, "
              << m.classes.size() << " classes, training accuracy " << pct(100.0 * accuracy(m, X, labels)) << "%\n";
    return 0;
  }
  std::vector<Dataset> runs;
  for (const auto& p : a.clean) runs.push_back(read_data(p, sc));
  const auto pairs = parse_pairs(a.pairs, sc);
  const auto params = train_detector(runs, pairings_of(pairs, sc), a.timeout, a.max_far);
  write_text(dir / "detector_params.json", params_to_json(params));
  write_config(dir, resolved("train", a.c, sc,
                             {{"clean", a.clean}, {"pairs", pairs_json(pairs)}, {"timeout_s", a.timeout}, {"max_far", a.max_far}}));
  std::cout << "detector parameters for " << params.size() << " (actuator, op) keys -> "
            << (dir / "detector_params.json").string() << "\n";
  return 0;
}

struct ClassifyArgs {
  Common c;
  std::string fingerprints;
  std::string model;
  std::string kernel = "all";
  int folds = 5;
};

int cmd_classify(const ClassifyArgs& a) {
  require_file(a.fingerprints, "--fingerprints");
  const auto sc = scenario_of(a.c);
  std::vector<FeatureVector> rows;
  std::vector<std::string> labels;
  read_fingerprint_csv(a.fingerprints, rows, labels);
  const auto X = feature_matrix(rows);
  const auto dir = out_dir(a.c);
  std::ostringstream csv;
  if (!a.model.empty()) {
    require_file(a.model, "--model");
    const auto m = svm_from_json(read_text(a.model));
    csv << "kernel,rows,accuracy_pct\n" << kernel_name(m.kernel) << ',' << rows.size() << ','
        << pct(100.0 * accuracy(m, X, labels)) << '\n';
  } else {
    TrainConfig cfg;
    cfg.seed = a.c.seed;
    std::vector<CvResult> res;
    if (a.kernel == "all") {
      res = cross_validate_kernels(X, labels, a.folds, cfg);
    } else {
      cfg.kernel = parse_kernel(a.kernel);
      res.push_back(cross_validate(X, labels, a.folds, cfg));
    }
    csv << "kernel,accuracy_pct";
    for (int f = 0; f < a.folds; ++f) csv << ",fold" << f + 1 << "_pct";
    csv << '\n';
    for (const auto& r : res) {
      csv << kernel_name(r.kernel) << ',' << pct(100.0 * r.accuracy);
      for (double f : r.fold_accuracy) csv << ',' << pct(100.0 * f);
      csv << '\n';
    }
  }
  write_text(dir / "classification.csv", csv.str());
  write_config(dir, resolved("classify", a.c, sc,
                             {{"fingerprints", a.fingerprints}, {"model", a.model}, {"kernel", a.kernel}, {"folds", a.folds}}));
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------- detect

std::string detection_csv(const std::vector<DetectionRow>& rows) {
  std::ostringstream o;
  o << "attack,performed,overall_pct,cusum_pct,incomplete_pct,timed_out_pct\n";
  for (const auto& r : rows) {
    o << attack_name(r.type) << ',' << r.performed << ',' << pct(r.overall) << ',' << pct(r.cusum) << ','
      << pct(r.incomplete) << ',' << pct(r.timed_out) << '\n';
  }
  return o.str();
}

std::string far_csv(const std::map<PairKey, double>& far, const std::map<PairKey, std::size_t>& ops) {
  std::ostringstream o;
  o << "actuator,op,operations,alarms_per_op_pct\n";
  for (const auto& [k, v] : far) {
    const auto it = ops.find(k);
    o << k.first << ',' << op_name(k.second) << ',' << (it == ops.end() ? 0 : it->second) << ',' << pct(100.0 * v)
      << '\n';
  }
  return o.str();
}

struct DetectArgs {
  Common c;
  std::string data, params, truth;
  std::vector<std::string> pairs;
  double timeout = 120.0;
  double grace = -1.0;
};

int cmd_detect(const DetectArgs& a) {
  require_file(a.params, "--params");
  require_file(a.data, "--data");
  if (!a.truth.empty()) require_file(a.truth, "--truth");
  const auto sc = scenario_of(a.c);
  const auto ds = read_data(a.data, sc);
  const auto params = params_from_json(read_text(a.params));
  const auto pairs = parse_pairs(a.pairs, sc);
  const auto log = run_detector(ds, pairings_of(pairs, sc), params, a.timeout);
  const double grace = a.grace >= 0 ? a.grace : a.timeout;

  const auto dir = out_dir(a.c);
  std::ostringstream al;
  al << "actuator,sensor,op,kind,iteration,change_start,sample_start,sample_end\n";
  for (const auto& x : log.alarms) {
    al << x.actuator << ',' << x.sensor << ',' << op_name(x.op) << ',' << alarm_kind_name(x.kind) << ','
       << x.iteration << ',' << x.change_start << ',' << x.sample_start << ',' << x.sample_end << '\n';
  }
  write_text(dir / "alarms.csv", al.str());
  const auto far = far_csv(false_alarm_rates(log), log.operations);
  write_text(dir / "alarm_rates.csv", far);

  std::ostringstream txt;
  txt << log.alarms.size() << " alarms; " << log.incomplete << " incomplete, " << log.timed_out
      << " timed-out operations\n\nalarms per operation\n"
      << far;
  if (!a.truth.empty()) {
    const auto records = attack_records_from_json(read_text(a.truth));
    std::vector<DetectionCase> cases;
    for (const auto& r : records) cases.push_back({r, &log});
    const auto rows = detection_report(cases, ds.sample_period_s, grace);
    const auto csv = detection_csv(rows);
    write_text(dir / "detection.csv", csv);
    txt << "\ndetection rates\n" << csv;
  }
  const auto cfg = resolved("detect", a.c, sc,
                            {{"data", a.data},
                             {"params", a.params},
                             {"truth", a.truth},
                             {"pairs", pairs_json(pairs)},
                             {"timeout_s", a.timeout},
                             {"grace_s", grace}});
  write_text(dir / "report.txt", with_config(txt.str(), cfg));
  write_config(dir, cfg);
  std::cout << txt.str();
  return 0;
}

// ---------------------------------------------------------------- watermark-eval

struct WatermarkArgs {
  Common c;
  double delay_min = 0.0, delay_max = 5.0;
  std::size_t trials = 100;
  double alpha = 0.05;
  std::size_t entropy_cycles = 400;
  int bins = 10;
  std::size_t nist_delays = 100000;
  double nist_min = 5.0, nist_max = 36.0;
};

std::string power_csv(const std::vector<PowerStudy>& ps) {
  std::ostringstream o;
  o << "delay_min_s,delay_max_s,trials,replay_power,honest_flag_rate,mean_ops\n";
  for (const auto& p : ps) {
    o << num(p.delay_min_s) << ',' << num(p.delay_max_s) << ',' << p.trials << ',' << num(p.replay_power) << ','
      << num(p.honest_flag_rate) << ',' << num(p.mean_ops) << '\n';
  }
  return o.str();
}

std::string entropy_csv(const EntropyReport& r) {
  std::ostringstream o;
  o << "process,entropy";
  for (const auto& p : r.processes) o << ",given_" << p;
  o << '\n';
  for (std::size_t i = 0; i < r.processes.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    o << r.processes[i] << ',' << pct(r.entropy(ii));
    for (Eigen::Index j = 0; j < r.conditional.cols(); ++j) o << ',' << pct(r.conditional(ii, j));
    o << '\n';
  }
  return o.str();
}

std::string nist_csv(std::size_t n, double lo, double hi, std::uint64_t seed, double tq) {
  WatermarkPolicy pol{true, lo, hi, seed, 0.0, 0.5};
  Rng rng(seed);
  std::vector<std::size_t> d(n);
  for (auto& v : d) v = draw_delay(pol, tq, rng);
  const auto bits = serialize_delays(d, pol);
  std::ostringstream o;
  o << "test,applicable,p_value,pass\n";
  for (const auto& t : nist_subset(bits)) {
    o << t.name << ',' << (t.applicable ? 1 : 0) << ',' << num(t.p_value) << ','
      << (t.applicable && t.p_value > 0.01 ? 1 : 0) << '\n';
  }
  return o.str();
}

int cmd_watermark(const WatermarkArgs& a) {
  if (a.delay_max < a.delay_min || a.nist_max <= a.nist_min) throw UsageError("delay bounds must satisfy min < max");
  const auto sc = scenario_of(a.c);
  const auto dir = out_dir(a.c);
  const auto power = power_csv({watermark_power(a.delay_min, a.delay_max, a.trials, a.c.seed, 0.02, 2.0, 1200.0, a.alpha)});
  const auto ent = entropy_csv(entropy_study(a.entropy_cycles, a.c.seed, a.bins));
  const auto nist = nist_csv(a.nist_delays, a.nist_min, a.nist_max, a.c.seed, scenario_tq_bound(sc));
  write_text(dir / "ks.csv", power);
  write_text(dir / "entropy.csv", ent);
  write_text(dir / "nist.csv", nist);
  const auto cfg = resolved("watermark-eval", a.c, sc,
                            {{"delay_min_s", a.delay_min},
                             {"delay_max_s", a.delay_max},
                             {"trials", a.trials},
                             {"alpha", a.alpha},
                             {"entropy_cycles", a.entropy_cycles},
                             {"bins", a.bins},
                             {"nist_delays", a.nist_delays},
                             {"nist_delay_min_s", a.nist_min},
                             {"nist_delay_max_s", a.nist_max}});
  const std::string txt = "replay detection (K-S)\n" + power + "\nnormalized entropy\n" + ent + "\nNIST subset\n" + nist;
  write_text(dir / "report.txt", with_config(txt, cfg));
  write_config(dir, cfg);
  std::cout << txt;
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  Common c;
  std::size_t cycles = 520;
  std::size_t instances = 100;
  std::size_t trials = 100;
  std::size_t entropy_cycles = 400;
};

// MV101 transition times measured from the PLC trigger.
std::vector<double> trigger_times(const SimResult& r, Op op) {
  std::vector<Trigger> trig;
  for (const auto& c : r.truth.commands) {
    if (c.device == "MV101" && c.source == "plc") trig.push_back({c.trigger_idx, c.on ? Op::on : Op::off});
  }
  const auto ev = extract_from_triggers(r.reported, "MV101", "FIT101", thresholds_from_range(2.4, 0.0), trig);
  return complete_times(ev, op);
}

int cmd_report(const ReportArgs& a) {
  const auto sc = scenario_of(a.c);
  const auto dir = out_dir(a.c);
  std::ostringstream txt;

  const auto cls = classification_study(campaign_devices(), a.cycles, 0.1, a.c.seed);
  {
    std::ostringstream o;
    o << "kernel,opening_pct,closing_pct\n";
    for (std::size_t i = 0; i < cls.opening.size(); ++i) {
      o << kernel_name(cls.opening[i].kernel) << ',' << pct(100.0 * cls.opening[i].accuracy) << ','
        << pct(100.0 * cls.closing[i].accuracy) << '\n';
    }
    write_text(dir / "classification.csv", o.str());
    txt << "device classification (" << cls.min_operations << "+ operations per device)\n" << o.str();
    std::ostringstream s;
    s << "device,open_vs_close_pct\n";
    for (const auto& [id, r] : cls.state) s << id << ',' << pct(100.0 * r.accuracy) << '\n';
    write_text(dir / "state.csv", s.str());
    txt << "\nstate classification\n" << s.str();
  }
  {
    const auto five = classification_study(five_valve_devices(0.08), 200, 0.01, a.c.seed);
    std::ostringstream o;
    o << "kernel,cycle_fingerprint_pct\n";
    for (const auto& r : five.cycle) o << kernel_name(r.kernel) << ',' << pct(100.0 * r.accuracy) << '\n';
    write_text(dir / "five_valves.csv", o.str());
    txt << "\nfive identical valves\n" << o.str();
  }
  {
    const auto det = detection_study(a.instances, a.c.seed);
    const auto rows = detection_csv(det.rows);
    write_text(dir / "detection.csv", rows);
    write_text(dir / "false_alarms_training.csv", far_csv(det.far_training, det.ops_training));
    write_text(dir / "false_alarms_heldout.csv", far_csv(det.far_held_out, {}));
    write_text(dir / "detector_params.json", params_to_json(det.params));
    txt << "\nattack detection\n" << rows << "\nfalse alarms (training runs)\n"
        << far_csv(det.far_training, det.ops_training);
  }
  {
    const auto power = power_csv({watermark_power(0.0, 5.0, a.trials, a.c.seed),
                                  watermark_power(35.0, 40.0, a.trials, a.c.seed)});
    write_text(dir / "watermark_power.csv", power);
    const auto ent = entropy_csv(entropy_study(a.entropy_cycles, a.c.seed));
    write_text(dir / "entropy.csv", ent);
    const double tq = scenario_tq_bound(sc);
    const auto nist = nist_csv(100000, 5.0, 36.0, a.c.seed, tq);
    write_text(dir / "nist.csv", nist);
    txt << "\nreplay detection (K-S)\n" << power << "\nnormalized entropy\n" << ent << "\nNIST subset\n" << nist
        << "\ntime-to-critical bound for the scenario: " << num(tq) << " s\n";
  }
  {
    auto plain = sc;
    plain.attacks.clear();
    const auto r = simulate(plain, std::min(plain.duration_s, 7200.0), a.c.seed);
    std::vector<double> t(r.reported.length());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * r.reported.sample_period_s;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::vector<svg::Series> level, flow;
    for (const auto& tk : plain.tanks) {
      level.push_back({tk.level_sensor, t, r.reported.channel(tk.level_sensor).values, colors[level.size() % 4]});
    }
    for (const auto& l : plain.lines) {
      flow.push_back({l.sensor, t, r.reported.channel(l.sensor).values, colors[flow.size() % 4]});
    }
    write_text(dir / "trace_level.svg", svg::line_chart("Tank level", "time (s)", "level (mm)", level));
    write_text(dir / "trace_flow.svg", svg::line_chart("Flow", "time (s)", "flow (m3/h)", flow));
  }
  {
    const auto normal = simulate(detection_scenario(), 20000.0, a.c.seed);
    const auto marked = simulate(watermark_scenario(35.0, 40.0, a.c.seed), 20000.0, a.c.seed);
    const std::vector<svg::Series> s = {svg::ecdf("plain", trigger_times(normal, Op::on), "#1f77b4"),
                                        svg::ecdf("watermark 35-40 s", trigger_times(marked, Op::on), "#d62728")};
    write_text(dir / "tc_ecdf.svg",
               svg::line_chart("MV101 opening time from PLC trigger", "time constant (s)", "ECDF", s));
  }
  const auto cfg = resolved("report", a.c, sc,
                            {{"classification_cycles", a.cycles},
                             {"attack_instances_per_type", a.instances},
                             {"watermark_trials", a.trials},
                             {"entropy_cycles", a.entropy_cycles}});
  write_text(dir / "report.txt", with_config(txt.str(), cfg));
  write_config(dir, cfg);
  std::cout << txt.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-time fingerprinting, attack detection and watermarking for process-control traces"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "run a scenario; writes reported.csv, truth.csv, ground_truth.json");
  add_common(c_sim, sim.c);
  c_sim->add_option("--duration", sim.duration, "seconds (default: scenario duration)");

  AttackArgs att;
  auto* c_att = app.add_subcommand("attack", "simulate with injected attacks");
  add_common(c_att, att.c);
  c_att->add_option("--duration", att.duration, "seconds (default: scenario duration)");
  c_att->add_option("--spec", att.specs, "TYPE:TARGET[:TARGET]:start=N:duration=N[:key=v], samples")->required();

  IdentifyArgs idn;
  auto* c_idn = app.add_subcommand("identify", "fit a state-space model; writes model.json and fit_report");
  add_common(c_idn, idn.c);
  c_idn->add_option("--data", idn.data, "reported CSV");
  c_idn->add_option("--inputs", idn.inputs, "input channels (default: line actuators)");
  c_idn->add_option("--outputs", idn.outputs, "output channels (default: flow and level sensors)");
  c_idn->add_option("--order", idn.order)->capture_default_str();
  c_idn->add_option("--horizon", idn.horizon)->capture_default_str();
  c_idn->add_option("--ridge", idn.ridge)->capture_default_str();
  c_idn->add_option("--train-fraction", idn.train_fraction)->capture_default_str();

  FingerprintArgs fp;
  auto* c_fp = app.add_subcommand("fingerprint", "transition times and chunked features per actuator and op");
  add_common(c_fp, fp.c);
  c_fp->add_option("--data", fp.data, "reported CSV");
  c_fp->add_option("--pair", fp.pairs, "ACTUATOR:SENSOR (default: every flow line)");
  c_fp->add_option("--chunk", fp.chunk)->capture_default_str();
  c_fp->add_option("--timeout", fp.timeout, "seconds")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "SVM from fingerprints, or CUSUM parameters from clean runs");
  add_common(c_tr, tr.c);
  c_tr->add_option("--fingerprints", tr.fingerprints, "fingerprint CSV");
  c_tr->add_option("--clean", tr.clean, "attack-free reported CSVs");
  c_tr->add_option("--pair", tr.pairs, "ACTUATOR:SENSOR (default: every flow line)");
  c_tr->add_option("--kernel", tr.kernel, "linear|poly|rbf|sigmoid")->capture_default_str();
  c_tr->add_option("--timeout", tr.timeout, "seconds")->capture_default_str();
  c_tr->add_option("--max-far", tr.max_far, "per-direction alarm rate cap")->capture_default_str();

  ClassifyArgs cl;
  auto* c_cl = app.add_subcommand("classify", "cross-validated accuracy per kernel, or accuracy of a model");
  add_common(c_cl, cl.c);
  c_cl->add_option("--fingerprints", cl.fingerprints, "fingerprint CSV");
  c_cl->add_option("--model", cl.model, "svm_model.json from train");
  c_cl->add_option("--kernel", cl.kernel, "all|linear|poly|rbf|sigmoid")->capture_default_str();
  c_cl->add_option("--folds", cl.folds)->capture_default_str();

  DetectArgs dt;
  auto* c_dt = app.add_subcommand("detect", "run the detector; writes alarms.csv and report.txt");
  add_common(c_dt, dt.c);
  c_dt->add_option("--data", dt.data, "reported CSV");
  c_dt->add_option("--params", dt.params, "detector_params.json from train");
  c_dt->add_option("--truth", dt.truth, "ground_truth.json for detection rates");
  c_dt->add_option("--pair", dt.pairs, "ACTUATOR:SENSOR (default: every flow line)");
  c_dt->add_option("--timeout", dt.timeout, "seconds")->capture_default_str();
  c_dt->add_option("--grace", dt.grace, "seconds after an attack still credited (default: timeout)");

  WatermarkArgs wm;
  auto* c_wm = app.add_subcommand("watermark-eval", "replay power, entropy and NIST randomness reports");
  add_common(c_wm, wm.c);
  c_wm->add_option("--delay-min", wm.delay_min, "seconds")->capture_default_str();
  c_wm->add_option("--delay-max", wm.delay_max, "seconds")->capture_default_str();
  c_wm->add_option("--trials", wm.trials)->capture_default_str();
  c_wm->add_option("--alpha", wm.alpha)->capture_default_str();
  c_wm->add_option("--entropy-cycles", wm.entropy_cycles)->capture_default_str();
  c_wm->add_option("--bins", wm.bins)->capture_default_str();
  c_wm->add_option("--nist-delays", wm.nist_delays)->capture_default_str();
  c_wm->add_option("--nist-delay-min", wm.nist_min)->capture_default_str();
  c_wm->add_option("--nist-delay-max", wm.nist_max)->capture_default_str();

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "run every study; CSV tables, SVG plots, report.txt");
  add_common(c_rp, rp.c);
  c_rp->add_option("--cycles", rp.cycles, "bench cycles per device")->capture_default_str();
  c_rp->add_option("--instances", rp.instances, "attack instances per type")->capture_default_str();
  c_rp->add_option("--trials", rp.trials, "watermark trials per delay range")->capture_default_str();
  c_rp->add_option("--entropy-cycles", rp.entropy_cycles)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_att->parsed()) return cmd_attack(att);
    if (c_idn->parsed()) return cmd_identify(idn);
    if (c_fp->parsed()) return cmd_fingerprint(fp);
    if (c_tr->parsed()) return cmd_train(tr);
    if (c_cl->parsed()) return cmd_classify(cl);
    if (c_dt->parsed()) return cmd_detect(dt);
    if (c_wm->parsed()) return cmd_watermark(wm);
    if (c_rp->parsed()) return cmd_report(rp);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const tcfp::Error& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
