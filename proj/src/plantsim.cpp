#include "tcfp/plantsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tcfp/error.hpp"
#include "tcfp/watermark.hpp"

namespace tcfp {

std::string attack_name(AttackType t) {
  switch (t) {
    case AttackType::A1: return "A1";
    case AttackType::B1: return "B1";
    case AttackType::C1: return "C1";
    case AttackType::D1: return "D1";
    case AttackType::D2: return "D2";
    case AttackType::E1: return "E1";
    case AttackType::F1: return "F1";
  }
  return "?";
}

AttackType parse_attack(const std::string& s) {
  for (auto t : {AttackType::A1, AttackType::B1, AttackType::C1, AttackType::D1, AttackType::D2, AttackType::E1,
                 AttackType::F1}) {
    if (attack_name(t) == s) return t;
  }
  fail(Errc::ConfigError, "unknown attack type '" + s + "'");
}

const DeviceParams& Scenario::device(const std::string& id) const {
  for (const auto& d : devices) {
    if (d.id == id) return d;
  }
  fail(Errc::ConfigError, "no device '" + id + "'");
}

const TankParams& Scenario::tank(const std::string& n) const {
  for (const auto& t : tanks) {
    if (t.name == n) return t;
  }
  fail(Errc::ConfigError, "no tank '" + n + "'");
}

std::string Scenario::sensor_for(const std::string& device_id) const {
  for (const auto& l : lines) {
    if (l.device == device_id) return l.sensor;
  }
  fail(Errc::ConfigError, "device '" + device_id + "' drives no flow line");
}

namespace {

bool has_channel(const Scenario& s, const std::string& name) {
  for (const auto& t : s.tanks) {
    if (t.level_sensor == name) return true;
  }
  for (const auto& l : s.lines) {
    if (l.sensor == name) return true;
  }
  for (const auto& d : s.devices) {
    if (d.id == name) return true;
  }
  return false;
}

bool is_device(const Scenario& s, const std::string& name) {
  return std::any_of(s.devices.begin(), s.devices.end(), [&](const DeviceParams& d) { return d.id == name; });
}

void check_attack(const Scenario& s, const AttackSpec& a) {
  const auto tag = "attack " + attack_name(a.type) + ": ";
  if (a.duration == 0) fail(Errc::ConfigError, tag + "zero duration");
  for (const auto& t : a.targets) {
    if (!has_channel(s, t)) fail(Errc::ConfigError, tag + "unknown target '" + t + "'");
  }
  auto sensors_only = [&] {
    for (const auto& t : a.targets) {
      if (is_device(s, t)) fail(Errc::ConfigError, tag + "'" + t + "' is not a sensor");
    }
  };
  auto need = [&](const char* key) {
    if (!a.params.count(key)) fail(Errc::ConfigError, tag + "missing param '" + key + "'");
  };
  switch (a.type) {
    case AttackType::A1:
      if (a.targets.empty()) fail(Errc::ConfigError, tag + "needs at least one sensor");
      sensors_only();
      break;
    case AttackType::B1:
    case AttackType::C1:
      if (a.targets.size() != 1 || !is_device(s, a.targets[0])) fail(Errc::ConfigError, tag + "needs one actuator");
      need(a.type == AttackType::B1 ? "command" : "period");
      break;
    case AttackType::D1:
    case AttackType::D2:
    case AttackType::E1:
      if (a.targets.size() != 2 || !is_device(s, a.targets[0]) || is_device(s, a.targets[1])) {
        fail(Errc::ConfigError, tag + "needs an actuator-sensor pair");
      }
      need(a.type == AttackType::D2 ? "hold" : "duration");
      break;
    case AttackType::F1:
      if (a.targets.size() != 2) fail(Errc::ConfigError, tag + "needs exactly two sensors");
      sensors_only();
      break;
  }
}

}  // namespace

void Scenario::validate() const {
  if (!(sample_period_s > 0.0)) fail(Errc::ConfigError, "sample_period_s must be positive");
  if (!(duration_s >= sample_period_s)) fail(Errc::ConfigError, "duration shorter than one sample");
  if (devices.empty()) fail(Errc::ConfigError, "scenario has no devices");
  std::vector<std::string> seen;
  auto unique = [&](const std::string& n) {
    if (n.empty()) fail(Errc::ConfigError, "empty channel name");
    if (std::find(seen.begin(), seen.end(), n) != seen.end()) fail(Errc::ConfigError, "duplicate name '" + n + "'");
    seen.push_back(n);
  };
  for (const auto& t : tanks) {
    unique(t.level_sensor);
    if (!(t.critical_low < t.low_sp && t.low_sp < t.high_sp && t.high_sp < t.critical_high)) {
      fail(Errc::ConfigError, "tank " + t.name + ": need critical_low < low_sp < high_sp < critical_high");
    }
    if (!(t.level_per_flow > 0.0 && t.max_in_rate > 0.0 && t.max_out_rate > 0.0)) {
      fail(Errc::ConfigError, "tank " + t.name + ": rates must be positive");
    }
    if (t.noise_std < 0.0) fail(Errc::ConfigError, "tank " + t.name + ": negative noise");
  }
  for (const auto& d : devices) {
    unique(d.id);
    if (!(d.open_time_s > 0.0 && d.close_time_s > 0.0 && d.process_tau_s > 0.0)) {
      fail(Errc::ConfigError, "device " + d.id + ": times must be positive");
    }
    if (d.jitter_std_s < 0.0 || d.jitter_std_s >= d.open_time_s / 3.0) {
      fail(Errc::ConfigError, "device " + d.id + ": jitter_std_s must be in [0, open_time_s / 3)");
    }
    if (d.spread < 0.0 || d.spread >= 1.0) fail(Errc::ConfigError, "device " + d.id + ": spread must be in [0, 1)");
    if (!d.interlock.empty()) {
      if (d.kind != DeviceKind::pump) fail(Errc::ConfigError, "device " + d.id + ": only pumps take an interlock");
      if (device(d.interlock).kind != DeviceKind::motorized_valve) {
        fail(Errc::ConfigError, "device " + d.id + ": interlock must be a valve");
      }
    }
  }
  for (const auto& l : lines) {
    unique(l.sensor);
    device(l.device);
    if (!(l.max_rate > 0.0) || l.noise_std < 0.0) fail(Errc::ConfigError, "line " + l.sensor + ": bad rate or noise");
    if (!l.from_tank.empty()) tank(l.from_tank);
    if (!l.to_tank.empty()) tank(l.to_tank);
  }
  for (const auto& r : rules) {
    device(r.device);
    if (r.action == RuleAction::cycle) {
      if (!(r.on_s > 0.0 && r.off_s > 0.0)) fail(Errc::ConfigError, "cycle rule for " + r.device + " needs on_s, off_s");
    } else {
      tank(r.tank);
    }
  }
  for (const auto& a : attacks) check_attack(*this, a);
  if (watermark.enabled) {
    if (watermark.delay_min_s < 0.0 || watermark.delay_min_s > watermark.delay_max_s) {
      fail(Errc::ConfigError, "watermark needs 0 <= delay_min_s <= delay_max_s");
    }
    if (tanks.empty()) fail(Errc::ConfigError, "watermark needs at least one tank to bound the delay");
    check_delay_bound(watermark, scenario_tq_bound(*this));
  }
}

std::pair<double, double> effective_travel_times(const DeviceParams& d) {
  if (d.spread == 0.0) return {d.open_time_s, d.close_time_s};
  // FNV-1a of the id seeds a fixed per-device draw.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : d.id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  Rng rng(h);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double fo = 1.0 + d.spread * u(rng);
  const double fc = 1.0 + d.spread * u(rng);
  return {d.open_time_s * fo, d.close_time_s * fc};
}

namespace {

constexpr double kSnap = 1e-9;

struct Segment {
  double h;
  double o0;
  double o1;
};

struct DeviceRt {
  const DeviceParams* p = nullptr;
  double open_nom = 0.0;
  double close_nom = 0.0;
  double openness = 0.0;
  double goal = 0.0;
  double remaining_s = 0.0;
  bool commanded = false;  // PLC view: last executed command
  bool pending_start = false;
  bool close_valve_when_stopped = false;
  bool manual = false;
  int interlock = -1;

  void drive(double to, Rng& rng) {
    if (to == goal && (remaining_s > 0.0 || openness == to)) return;
    goal = to;
    const double distance = std::abs(goal - openness);
    if (distance == 0.0) {
      remaining_s = 0.0;
      return;
    }
    const double nominal = goal > openness ? open_nom : close_nom;
    double travel = nominal;
    if (p->jitter_std_s > 0.0) {
      std::normal_distribution<double> nd(0.0, p->jitter_std_s);
      travel = std::max(0.1 * nominal, nominal + nd(rng));
    }
    remaining_s = travel * distance;
  }

  // Openness path over one sample: at most two linear pieces.
  std::vector<Segment> advance(double dt) {
    std::vector<Segment> segs;
    if (remaining_s <= 0.0) {
      segs.push_back({dt, openness, openness});
      return segs;
    }
    const double rate = (goal - openness) / remaining_s;
    if (remaining_s <= dt + kSnap) {
      const double t1 = std::min(dt, remaining_s);
      segs.push_back({t1, openness, goal});
      if (dt - t1 > 0.0) segs.push_back({dt - t1, goal, goal});
      openness = goal;
      remaining_s = 0.0;
    } else {
      const double o1 = openness + rate * dt;
      segs.push_back({dt, openness, o1});
      openness = o1;
      remaining_s -= dt;
    }
    return segs;
  }

  double status() const {
    if (remaining_s <= 0.0 && openness == 1.0 && goal == 1.0) return status::on;
    if (remaining_s <= 0.0 && openness == 0.0 && goal == 0.0) return status::off;
    return status::transit;
  }
};

// Exact first-order lag response to a linear input over one piece:
// tau y' = K u(t) - y with u(t) = o0 + (o1 - o0) t / h.
double lag_piece(double y0, double K, double tau, const Segment& s) {
  if (s.h <= 0.0) return y0;
  const double a = K * s.o0;
  const double b = K * (s.o1 - s.o0) / s.h;
  const double e = std::exp(-s.h / tau);
  return a + b * s.h - b * tau + (y0 - a + b * tau) * e;
}

struct Pending {
  int device;
  bool on;
  std::size_t exec_idx;
  std::size_t record;
};

std::size_t seconds_to_samples(double s, double period) {
  return static_cast<std::size_t>(std::llround(std::max(0.0, s) / period));
}

double logistic_curve(double t, double D) {
  const double k = 10.0 / D;
  return 1.0 / (1.0 + std::exp(-k * (t - D / 2.0)));
}

// First index in [from, to) where the status leaves a settled state.
std::optional<std::size_t> next_operation(const std::vector<double>& st, std::size_t from, std::size_t to) {
  for (std::size_t j = std::max<std::size_t>(from, 1); j < std::min(to, st.size()); ++j) {
    if (st[j] != st[j - 1] && st[j - 1] != status::transit) return j;
  }
  return std::nullopt;
}

void apply_sensor_attacks(const Scenario& sc, Dataset& rep, GroundTruth& gt) {
  const std::size_t N = rep.length();
  const double dt = sc.sample_period_s;
  for (std::size_t ai = 0; ai < sc.attacks.size(); ++ai) {
    const auto& a = sc.attacks[ai];
    auto& rec = gt.attacks[ai];
    const std::size_t s = std::min(a.start_idx, N);
    const std::size_t e = std::min(a.start_idx + a.duration, N);
    if (s >= e) continue;
    switch (a.type) {
      case AttackType::A1: {
        for (const auto& name : a.targets) {
          auto& v = rep.channel(name).values;
          const double value = a.params.count("value") ? a.params.at("value") : v[s];
          std::fill(v.begin() + static_cast<std::ptrdiff_t>(s), v.begin() + static_cast<std::ptrdiff_t>(e), value);
        }
        rec.active_start = s;
        rec.active_end = e;
        break;
      }
      case AttackType::F1: {
        auto& x = rep.channel(a.targets[0]).values;
        auto& y = rep.channel(a.targets[1]).values;
        for (std::size_t k = s; k < e; ++k) std::swap(x[k], y[k]);
        rec.active_start = s;
        rec.active_end = e;
        break;
      }
      case AttackType::D1:
      case AttackType::D2: {
        const auto& st = rep.channel(a.targets[0]).values;
        auto& v = rep.channel(a.targets[1]).values;
        const auto op = next_operation(st, s, e);
        if (!op) break;
        const std::size_t o = *op;
        const double s0 = v[o];
        if (a.type == AttackType::D2) {
          const std::size_t hold = seconds_to_samples(a.params.at("hold"), dt);
          const std::size_t stop = std::min(N, o + hold);
          std::fill(v.begin() + static_cast<std::ptrdiff_t>(o), v.begin() + static_cast<std::ptrdiff_t>(stop), s0);
          rec.active_start = o;
          rec.active_end = stop;
        } else {
          const double D = a.params.at("duration");
          const bool going_on = st[o - 1] == status::off;
          const double s1 = going_on ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
          const std::size_t stop = std::min(N, o + seconds_to_samples(D, dt));
          for (std::size_t k = o; k < stop; ++k) {
            v[k] = s0 + (s1 - s0) * logistic_curve(static_cast<double>(k - o) * dt, D);
          }
          rec.active_start = o;
          rec.active_end = stop;
        }
        break;
      }
      case AttackType::E1: {
        auto& st = rep.channel(a.targets[0]).values;
        auto& v = rep.channel(a.targets[1]).values;
        const double D = a.params.at("duration");
        // Fake the opposite of the state in force at the start.
        double settled = st[s];
        for (std::size_t k = s + 1; settled == status::transit && k < N; ++k) settled = st[k];
        const bool fake_on = settled != status::on;
        const double fake_code = fake_on ? status::on : status::off;
        const double s0 = v[s];
        const double s1 = fake_on ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
        for (std::size_t k = s; k < e; ++k) {
          st[k] = k == s ? status::transit : fake_code;
          v[k] = s0 + (s1 - s0) * logistic_curve(static_cast<double>(k - s) * dt, D);
        }
        rec.active_start = s;
        rec.active_end = e;
        break;
      }
      case AttackType::B1:
      case AttackType::C1:
        break;
    }
  }
}

}  // namespace

SimResult simulate(const Scenario& sc, std::uint64_t seed) { return simulate(sc, sc.duration_s, seed); }

SimResult simulate(const Scenario& sc, double duration_s, std::uint64_t seed) {
  sc.validate();
  const double dt = sc.sample_period_s;
  const auto N = static_cast<std::size_t>(std::floor(duration_s / dt + 1e-9));
  if (N == 0) fail(Errc::ConfigError, "duration shorter than one sample");

  std::seed_seq jitter_seed{seed, std::uint64_t{1}}, noise_seed{seed, std::uint64_t{2}};
  Rng jitter_rng(jitter_seed), noise_rng(noise_seed);
  std::seed_seq wm_seed{sc.watermark.seed != 0 ? sc.watermark.seed : seed, std::uint64_t{3}};
  Rng wm_rng(wm_seed);
  const double tq = sc.watermark.enabled ? scenario_tq_bound(sc) : 0.0;

  std::vector<DeviceRt> dev(sc.devices.size());
  auto dev_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < sc.devices.size(); ++i) {
      if (sc.devices[i].id == id) return static_cast<int>(i);
    }
    fail(Errc::ConfigError, "no device '" + id + "'");
  };
  auto tank_index = [&](const std::string& n) {
    for (std::size_t i = 0; i < sc.tanks.size(); ++i) {
      if (sc.tanks[i].name == n) return static_cast<int>(i);
    }
    return -1;
  };
  for (std::size_t i = 0; i < dev.size(); ++i) {
    dev[i].p = &sc.devices[i];
    std::tie(dev[i].open_nom, dev[i].close_nom) = effective_travel_times(sc.devices[i]);
    if (!sc.devices[i].interlock.empty()) dev[i].interlock = dev_index(sc.devices[i].interlock);
  }
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (!sc.devices[i].initial_on) continue;
    for (int j : {static_cast<int>(i), dev[i].interlock}) {
      if (j < 0) continue;
      auto& d = dev[static_cast<std::size_t>(j)];
      d.openness = d.goal = 1.0;
      d.commanded = true;
    }
  }

  std::vector<double> level(sc.tanks.size());
  for (std::size_t i = 0; i < sc.tanks.size(); ++i) level[i] = sc.tanks[i].initial_level;
  std::vector<double> flow(sc.lines.size(), 0.0);
  std::vector<int> line_dev(sc.lines.size()), line_from(sc.lines.size()), line_to(sc.lines.size());
  for (std::size_t i = 0; i < sc.lines.size(); ++i) {
    line_dev[i] = dev_index(sc.lines[i].device);
    line_from[i] = tank_index(sc.lines[i].from_tank);
    line_to[i] = tank_index(sc.lines[i].to_tank);
    if (dev[static_cast<std::size_t>(line_dev[i])].openness == 1.0) flow[i] = sc.lines[i].max_rate;
  }

  // Output layout: levels, flows, statuses (+ openness in truth).
  Dataset rep;
  rep.sample_period_s = dt;
  for (const auto& t : sc.tanks) rep.channels.push_back({t.level_sensor, ChannelKind::sensor, "mm", {}});
  for (const auto& l : sc.lines) rep.channels.push_back({l.sensor, ChannelKind::sensor, "m3/h", {}});
  for (const auto& d : sc.devices) rep.channels.push_back({d.id, ChannelKind::actuator, "", {}});
  for (auto& c : rep.channels) c.values.reserve(N);
  GroundTruth gt;
  gt.truth = rep;
  for (const auto& d : sc.devices) gt.truth.channels.push_back({d.id + ".openness", ChannelKind::sensor, "", {}});
  for (auto& c : gt.truth.channels) c.values.reserve(N);
  for (const auto& a : sc.attacks) {
    AttackRecord r;
    r.type = a.type;
    r.targets = a.targets;
    r.start_idx = a.start_idx;
    r.end_idx = a.start_idx + a.duration;
    gt.attacks.push_back(std::move(r));
  }

  // Rule latches start from the devices' initial state.
  std::vector<bool> latch(sc.rules.size(), false);
  for (std::size_t ri = 0; ri < sc.rules.size(); ++ri) latch[ri] = sc.device(sc.rules[ri].device).initial_on;
  std::vector<Pending> pending;

  auto execute = [&](int di, bool on, std::size_t k) {
    auto& d = dev[static_cast<std::size_t>(di)];
    d.commanded = on;
    if (d.p->kind == DeviceKind::pump && d.interlock >= 0) {
      auto& v = dev[static_cast<std::size_t>(d.interlock)];
      if (on) {
        d.close_valve_when_stopped = false;
        v.drive(1.0, jitter_rng);
        v.commanded = true;
        if (v.openness == 1.0 && v.remaining_s <= 0.0) {
          d.drive(1.0, jitter_rng);
          d.pending_start = false;
        } else {
          d.pending_start = true;
        }
      } else {
        d.pending_start = false;
        d.drive(0.0, jitter_rng);
        d.close_valve_when_stopped = true;
      }
    } else {
      d.drive(on ? 1.0 : 0.0, jitter_rng);
    }
    (void)k;
  };

  const std::size_t n_tanks = sc.tanks.size();
  const std::size_t n_lines = sc.lines.size();
  const std::size_t n_dev = sc.devices.size();

  for (std::size_t k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * dt;

    // Reported levels (the PLC reads these).
    std::vector<double> level_meas(n_tanks);
    for (std::size_t i = 0; i < n_tanks; ++i) {
      level_meas[i] = level[i];
      if (sc.tanks[i].noise_std > 0.0) {
        level_meas[i] += std::normal_distribution<double>(0.0, sc.tanks[i].noise_std)(noise_rng);
      }
    }

    // Attacker command overrides.
    for (std::size_t ai = 0; ai < sc.attacks.size(); ++ai) {
      const auto& a = sc.attacks[ai];
      if (a.type != AttackType::B1 && a.type != AttackType::C1) continue;
      const int di = dev_index(a.targets[0]);
      auto& d = dev[static_cast<std::size_t>(di)];
      const std::size_t end = a.start_idx + a.duration;
      if (k == end) {
        d.manual = false;
        continue;
      }
      if (k < a.start_idx || k > end) continue;
      if (k == a.start_idx) {
        d.manual = true;
        pending.erase(std::remove_if(pending.begin(), pending.end(), [&](const Pending& p) { return p.device == di; }),
                      pending.end());
      }
      bool fire = false;
      bool on = d.commanded;
      if (a.type == AttackType::B1) {
        if (k == a.start_idx) {
          on = a.params.at("command") != 0.0;
          if (on == d.commanded) {
            gt.attacks[ai].no_op_attack = true;
          } else {
            fire = true;
          }
          gt.attacks[ai].active_start = a.start_idx;
          gt.attacks[ai].active_end = end;
        }
      } else {
        const std::size_t period = std::max<std::size_t>(1, seconds_to_samples(a.params.at("period"), dt));
        if ((k - a.start_idx) % period == 0) {
          on = !d.commanded;
          fire = true;
          gt.attacks[ai].active_start = a.start_idx;
          gt.attacks[ai].active_end = end;
        }
      }
      if (fire) {
        execute(di, on, k);
        gt.commands.push_back({sc.devices[static_cast<std::size_t>(di)].id, on, k, k, 0, "attack"});
      }
    }

    // PLC scan: latched rules against the measured level.
    for (std::size_t ri = 0; ri < sc.rules.size(); ++ri) {
      const auto& r = sc.rules[ri];
      bool desired;
      if (r.action == RuleAction::cycle) {
        desired = std::fmod(t, r.on_s + r.off_s) < r.on_s;
      } else {
        const auto ti = static_cast<std::size_t>(tank_index(r.tank));
        const auto& tk = sc.tanks[ti];
        const double lv = level_meas[ti];
        const bool fill = r.action == RuleAction::fill;
        if (lv <= tk.low_sp) latch[ri] = fill;
        if (lv >= tk.high_sp) latch[ri] = !fill;
        desired = latch[ri];
      }
      const int di = dev_index(r.device);
      auto& d = dev[static_cast<std::size_t>(di)];
      if (d.manual || desired == d.commanded) continue;
      if (std::any_of(pending.begin(), pending.end(), [&](const Pending& p) { return p.device == di; })) continue;
      std::size_t delay = 0;
      if (sc.watermark.enabled) delay = draw_delay(sc.watermark, tq, wm_rng, dt);
      gt.commands.push_back({r.device, desired, k, k + delay, delay, "plc"});
      pending.push_back({di, desired, k + delay, gt.commands.size() - 1});
    }

    // Execute due commands.
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->exec_idx <= k) {
        execute(it->device, it->on, k);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }

    // Interlock sequencing.
    for (auto& d : dev) {
      if (d.interlock < 0) continue;
      auto& v = dev[static_cast<std::size_t>(d.interlock)];
      if (d.pending_start && v.openness == 1.0 && v.remaining_s <= 0.0) {
        d.drive(1.0, jitter_rng);
        d.pending_start = false;
      }
      if (d.close_valve_when_stopped && d.openness == 0.0 && d.remaining_s <= 0.0) {
        if (!v.manual) {
          v.drive(0.0, jitter_rng);
          v.commanded = false;
        }
        d.close_valve_when_stopped = false;
      }
    }

    // Record sample k.
    std::size_t c = 0;
    for (std::size_t i = 0; i < n_tanks; ++i, ++c) {
      rep.channels[c].values.push_back(level_meas[i]);
      gt.truth.channels[c].values.push_back(level[i]);
    }
    for (std::size_t i = 0; i < n_lines; ++i, ++c) {
      double f = flow[i];
      gt.truth.channels[c].values.push_back(f);
      if (sc.lines[i].noise_std > 0.0) f += std::normal_distribution<double>(0.0, sc.lines[i].noise_std)(noise_rng);
      rep.channels[c].values.push_back(f);
    }
    for (std::size_t i = 0; i < n_dev; ++i, ++c) {
      const double st = dev[i].status();
      rep.channels[c].values.push_back(st);
      gt.truth.channels[c].values.push_back(st);
    }
    for (std::size_t i = 0; i < n_dev; ++i, ++c) gt.truth.channels[c].values.push_back(dev[i].openness);

    for (std::size_t i = 0; i < n_tanks; ++i) {
      const auto& tk = sc.tanks[i];
      if (!gt.critical_state_reached && (level[i] >= tk.critical_high || level[i] <= tk.critical_low)) {
        gt.critical_state_reached = true;
        gt.first_critical_idx = k;
      }
    }

    // Physics over [t, t + dt]. Levels integrate the flows of sample k.
    std::vector<double> net(n_tanks, 0.0);
    for (std::size_t i = 0; i < n_lines; ++i) {
      if (line_to[i] >= 0) net[static_cast<std::size_t>(line_to[i])] += flow[i];
      if (line_from[i] >= 0) net[static_cast<std::size_t>(line_from[i])] -= flow[i];
    }
    for (std::size_t i = 0; i < n_tanks; ++i) level[i] += sc.tanks[i].level_per_flow * net[i] * dt;

    std::vector<std::vector<Segment>> path(n_dev);
    for (std::size_t i = 0; i < n_dev; ++i) path[i] = dev[i].advance(dt);
    for (std::size_t i = 0; i < n_lines; ++i) {
      const auto& d = dev[static_cast<std::size_t>(line_dev[i])];
      if (d.interlock >= 0 && dev[static_cast<std::size_t>(d.interlock)].openness < 1.0) {
        flow[i] = 0.0;
        continue;
      }
      double y = flow[i];
      for (const auto& seg : path[static_cast<std::size_t>(line_dev[i])]) {
        y = lag_piece(y, sc.lines[i].max_rate, d.p->process_tau_s, seg);
      }
      flow[i] = y;
    }
  }

  apply_sensor_attacks(sc, rep, gt);
  if (!sc.attacks.empty()) rep.provenance = "attacked";
  return {std::move(rep), std::move(gt)};
}

Dataset replay_attack(const Dataset& recorded, const Dataset& live, const std::vector<IndexWindow>& windows) {
  if (recorded.schema().size() != live.schema().size() || recorded.channels.size() != live.channels.size()) {
    fail(Errc::SchemaError, "recorded and live datasets have different channels");
  }
  for (std::size_t i = 0; i < live.channels.size(); ++i) {
    if (recorded.channels[i].name != live.channels[i].name || recorded.channels[i].kind != live.channels[i].kind) {
      fail(Errc::SchemaError, "channel " + live.channels[i].name + " differs between recording and live run");
    }
  }
  Dataset out = live;
  for (const auto& w : windows) {
    if (w.start >= w.end || w.end > live.length() || w.end > recorded.length()) {
      fail(Errc::IndexError, "replay window out of range");
    }
    for (std::size_t i = 0; i < out.channels.size(); ++i) {
      std::copy(recorded.channels[i].values.begin() + static_cast<std::ptrdiff_t>(w.start),
                recorded.channels[i].values.begin() + static_cast<std::ptrdiff_t>(w.end),
                out.channels[i].values.begin() + static_cast<std::ptrdiff_t>(w.start));
    }
  }
  out.provenance = "replayed";
  return out;
}

Dataset replay_operations(const SimResult& recorded, const SimResult& live, const std::string& device,
                          const std::vector<std::string>& sensors, std::size_t segment_len) {
  if (recorded.reported.sample_period_s != live.reported.sample_period_s) {
    fail(Errc::SchemaError, "recording and live run use different sample periods");
  }
  std::vector<std::string> chans = sensors;
  chans.push_back(device);
  for (const auto& c : chans) {
    const auto* a = recorded.reported.find(c);
    const auto* b = live.reported.find(c);
    if (a == nullptr || b == nullptr || a->kind != b->kind) fail(Errc::SchemaError, "channel " + c + " not shared");
  }
  // Recorded operation starts by direction, taken at the actual status change.
  const auto& st = recorded.reported.channel(device).values;
  std::vector<std::size_t> rec_on, rec_off;
  for (std::size_t j = 1; j < st.size(); ++j) {
    if (st[j] != st[j - 1] && st[j - 1] != status::transit) {
      (st[j - 1] == status::off ? rec_on : rec_off).push_back(j);
    }
  }
  Dataset out = live.reported;
  const std::size_t N = out.length();
  std::size_t i_on = 0, i_off = 0;
  for (const auto& cmd : live.truth.commands) {
    if (cmd.device != device || cmd.source != "plc") continue;
    auto& pool = cmd.on ? rec_on : rec_off;
    auto& idx = cmd.on ? i_on : i_off;
    if (pool.empty()) continue;
    const std::size_t src = pool[idx++ % pool.size()];
    const std::size_t dst = cmd.trigger_idx;
    // Start one sample early so the pre-operation settled state comes along.
    if (src == 0 || dst == 0) continue;
    for (const auto& c : chans) {
      const auto& from = recorded.reported.channel(c).values;
      auto& to = out.channel(c).values;
      for (std::size_t j = 0; j <= segment_len; ++j) {
        const std::size_t s = src - 1 + j;
        const std::size_t d = dst - 1 + j;
        if (s >= from.size() || d >= N) break;
        to[d] = from[s];
      }
    }
  }
  out.provenance = "replayed";
  return out;
}

}  // namespace tcfp
