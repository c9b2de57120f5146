#include "tcfp/campaigns.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tcfp/error.hpp"
#include "tcfp/scenarios.hpp"

namespace tcfp {

BenchTimes bench_times(const std::vector<BenchDevice>& devices, std::size_t cycles, double on_s, double off_s,
                       double sample_period_s, double flow_noise_std, std::uint64_t seed) {
  // One extra cycle so the last operations finish inside the trace.
  const double duration = static_cast<double>(cycles + 1) * (on_s + off_s);
  const auto r = simulate(bench_scenario(devices, on_s, off_s, sample_period_s, duration, flow_noise_std), seed);
  BenchTimes out;
  for (const auto& d : devices) {
    const std::string sensor = d.id + ".flow";
    const auto thr = thresholds_from_range(d.max_rate, 0.0);
    const auto ev = extract_transitions(r.reported, d.id, sensor, thr);
    out.devices.push_back(d.id);
    out.on[d.id] = complete_times(ev, Op::on);
    out.off[d.id] = complete_times(ev, Op::off);
  }
  return out;
}

namespace {

void append(LabelledFeatures& f, const std::vector<FeatureVector>& rows, const std::string& label) {
  const Matrix add = feature_matrix(rows);
  Matrix X(f.X.rows() + add.rows(), static_cast<Eigen::Index>(FeatureVector::size));
  if (f.X.rows() > 0) X.topRows(f.X.rows()) = f.X;
  X.bottomRows(add.rows()) = add;
  f.X = std::move(X);
  f.labels.insert(f.labels.end(), rows.size(), label);
}

}  // namespace

LabelledFeatures device_features(const BenchTimes& t, Op op, std::size_t chunk_size) {
  LabelledFeatures f;
  for (const auto& id : t.devices) append(f, chunk_features((op == Op::on ? t.on : t.off).at(id), chunk_size), id);
  return f;
}

LabelledFeatures state_features(const BenchTimes& t, const std::string& device, std::size_t chunk_size) {
  LabelledFeatures f;
  append(f, chunk_features(t.on.at(device), chunk_size), "open");
  append(f, chunk_features(t.off.at(device), chunk_size), "close");
  return f;
}

LabelledFeatures cycle_features(const BenchTimes& t, std::size_t chunk_size) {
  LabelledFeatures f;
  const auto w = static_cast<Eigen::Index>(FeatureVector::size);
  for (const auto& id : t.devices) {
    const Matrix on = feature_matrix(chunk_features(t.on.at(id), chunk_size));
    const Matrix off = feature_matrix(chunk_features(t.off.at(id), chunk_size));
    const Eigen::Index n = std::min(on.rows(), off.rows());
    Matrix X(f.X.rows() + n, 2 * w);
    if (f.X.rows() > 0) X.topRows(f.X.rows()) = f.X;
    X.bottomRows(n) << on.topRows(n), off.topRows(n);
    f.X = std::move(X);
    f.labels.insert(f.labels.end(), static_cast<std::size_t>(n), id);
  }
  return f;
}

ClassificationStudy classification_study(const std::vector<BenchDevice>& devices, std::size_t cycles,
                                         double sample_period_s, std::uint64_t seed, int folds,
                                         std::size_t chunk_size, const TrainConfig& cfg) {
  double longest = 0.0;
  for (const auto& d : devices) longest = std::max({longest, d.open_time_s, d.close_time_s});
  // Long enough for travel plus five lag constants.
  const double hold = std::ceil(longest + 40.0);
  const auto t = bench_times(devices, cycles, hold, hold, sample_period_s, 0.01, seed);
  ClassificationStudy s;
  s.min_operations = std::numeric_limits<std::size_t>::max();
  for (const auto& id : t.devices) s.min_operations = std::min({s.min_operations, t.on.at(id).size(), t.off.at(id).size()});
  auto on = device_features(t, Op::on, chunk_size);
  auto off = device_features(t, Op::off, chunk_size);
  s.opening = cross_validate_kernels(on.X, on.labels, folds, cfg);
  s.closing = cross_validate_kernels(off.X, off.labels, folds, cfg);
  const auto cyc = cycle_features(t, chunk_size);
  s.cycle = cross_validate_kernels(cyc.X, cyc.labels, folds, cfg);
  for (const auto& d : devices) {
    if (d.kind != DeviceKind::motorized_valve) continue;
    auto f = state_features(t, d.id, chunk_size);
    s.state[d.id] = cross_validate(f.X, f.labels, folds, cfg);
  }
  return s;
}

namespace {

struct PlantPair {
  const char* device;
  const char* sensor;
};
constexpr PlantPair plant_pairs[] = {{"MV101", "FIT101"}, {"P101", "FIT201"}};

std::map<PairKey, double> pooled_far(const std::vector<Dataset>& runs, const std::vector<Pairing>& pairings,
                                     const ParamTable& params, std::map<PairKey, std::size_t>* ops_out = nullptr) {
  std::map<PairKey, std::size_t> alarms, ops;
  for (const auto& ds : runs) {
    const auto log = run_detector(ds, pairings, params);
    for (const auto& a : log.alarms) ++alarms[{a.actuator, a.op}];
    for (const auto& [k, n] : log.operations) ops[k] += n;
  }
  std::map<PairKey, double> out;
  for (const auto& [k, n] : ops) out[k] = n ? static_cast<double>(alarms[k]) / static_cast<double>(n) : 0.0;
  if (ops_out) *ops_out = ops;
  return out;
}

// Random shape for one instance; `at` is its scheduled start sample.
AttackSpec make_attack(AttackType type, std::size_t at, Rng& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> shape(5.0, 60.0);
  const auto& pair = plant_pairs[coin(rng)];
  AttackSpec a;
  a.type = type;
  a.start_idx = at;
  switch (type) {
    case AttackType::A1:
      a.targets = coin(rng) ? std::vector<std::string>{pair.sensor} : std::vector<std::string>{"FIT101", "FIT201"};
      a.duration = 10;
      break;
    case AttackType::F1:
      a.targets = {"FIT101", "FIT201"};
      a.duration = 10;
      break;
    case AttackType::B1:
      a.targets = {pair.device};
      a.duration = 60;
      a.params["command"] = coin(rng);
      break;
    case AttackType::C1:
      a.targets = {pair.device};
      a.duration = 60;
      a.params["period"] = 15.0;
      break;
    case AttackType::D1:
    case AttackType::E1:
      a.targets = {pair.device, pair.sensor};
      a.duration = 200;
      a.params["duration"] = std::round(shape(rng));
      break;
    case AttackType::D2:
      a.targets = {pair.device, pair.sensor};
      a.duration = 200;
      a.params["hold"] = 60.0;
      break;
  }
  return a;
}

}  // namespace

DetectionStudy detection_study(std::size_t instances_per_type, std::uint64_t seed, std::size_t clean_runs) {
  if (instances_per_type == 0 || clean_runs == 0) fail(Errc::ConfigError, "study needs instances and clean runs");
  constexpr double clean_s = 12000.0;
  constexpr std::size_t lead = 600, spacing = 900;
  std::vector<Dataset> clean, fresh;
  for (std::size_t i = 0; i < clean_runs; ++i) {
    clean.push_back(simulate(detection_scenario(), clean_s, seed * 1000 + i).reported);
    fresh.push_back(simulate(detection_scenario(), clean_s, seed * 1000 + 500 + i).reported);
  }
  std::vector<Pairing> pairings;
  for (const auto& p : plant_pairs) pairings.push_back({p.device, p.sensor, sensor_thresholds(clean[0], p.sensor)});

  DetectionStudy s;
  s.params = train_detector(clean, pairings);
  s.far_training = pooled_far(clean, pairings, s.params, &s.ops_training);
  s.far_held_out = pooled_far(fresh, pairings, s.params);

  const std::vector<AttackType> types{AttackType::A1, AttackType::B1, AttackType::C1, AttackType::D1,
                                      AttackType::D2, AttackType::E1, AttackType::F1};
  Rng rng(seed);
  std::vector<AlarmLog> logs(instances_per_type);
  std::vector<std::pair<AttackRecord, std::size_t>> records;
  for (std::size_t run = 0; run < instances_per_type; ++run) {
    auto order = types;
    std::shuffle(order.begin(), order.end(), rng);
    Scenario sc = detection_scenario();
    for (std::size_t j = 0; j < order.size(); ++j) sc.attacks.push_back(make_attack(order[j], lead + j * spacing, rng));
    sc.duration_s = static_cast<double>(lead + order.size() * spacing) * sc.sample_period_s;
    const auto r = simulate(sc, seed * 1000 + 900 + run);
    logs[run] = run_detector(r.reported, pairings, s.params);
    for (const auto& a : r.truth.attacks) records.emplace_back(a, run);
  }
  std::vector<DetectionCase> cases;
  for (const auto& [a, run] : records) cases.push_back({a, &logs[run]});
  s.rows = detection_report(cases, detection_scenario().sample_period_s);
  return s;
}

PowerStudy watermark_power(double delay_min_s, double delay_max_s, std::size_t trials, std::uint64_t seed,
                           double fit101_noise, double mv101_jitter_s, double trial_s, double alpha) {
  auto noisy = [&](Scenario s) {
    for (auto& l : s.lines) {
      if (l.sensor == "FIT101") l.noise_std = fit101_noise;
    }
    for (auto& d : s.devices) {
      if (d.id == "MV101") d.jitter_std_s = mv101_jitter_s;
    }
    return s;
  };
  const auto thr = thresholds_from_range(2.4, 0.0);
  auto timed = [&](const Dataset& ds, const SimResult& live, std::vector<double>* delays) {
    std::vector<Trigger> trig;
    std::vector<double> d;
    for (const auto& c : live.truth.commands) {
      if (c.device != "MV101" || c.source != "plc") continue;
      trig.push_back({c.trigger_idx, c.on ? Op::on : Op::off});
      d.push_back(static_cast<double>(c.delay_samples) * live.reported.sample_period_s);
    }
    const auto ev = extract_from_triggers(ds, "MV101", "FIT101", thr, trig);
    std::vector<double> tc;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (ev[i].status != TransitionStatus::complete) continue;
      tc.push_back(ev[i].transition_time_s);
      if (delays) delays->push_back(d[i]);
    }
    return tc;
  };
  // Unwatermarked base distribution, timed from the trigger like everything else.
  const auto base_run = simulate(noisy(detection_scenario()), 20000.0, seed);
  const auto normal = timed(base_run.reported, base_run, nullptr);

  PowerStudy p{delay_min_s, delay_max_s, trials};
  std::size_t flagged = 0, honest_flagged = 0, ops = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto recorded = simulate(noisy(detection_scenario()), trial_s, seed + 1000 + t);
    const auto live = simulate(noisy(watermark_scenario(delay_min_s, delay_max_s, seed + 5000 + t)), trial_s,
                               seed + 3000 + t);
    const auto replayed = replay_operations(recorded, live, "MV101", {"FIT101"}, 150);
    std::vector<double> d_rep, d_live;
    const auto tc_rep = timed(replayed, live, &d_rep);
    const auto tc_live = timed(live.reported, live, &d_live);
    ops += tc_rep.size();
    flagged += replay_check(normal, tc_rep, d_rep, alpha).distinct;
    honest_flagged += replay_check(normal, tc_live, d_live, alpha).distinct;
  }
  p.replay_power = static_cast<double>(flagged) / static_cast<double>(trials);
  p.honest_flag_rate = static_cast<double>(honest_flagged) / static_cast<double>(trials);
  p.mean_ops = static_cast<double>(ops) / static_cast<double>(trials);
  return p;
}

EntropyReport entropy_study(std::size_t cycles, std::uint64_t seed, int bins) {
  const auto devices = entropy_devices();
  const auto t = bench_times(devices, cycles, 60.0, 60.0, 0.1, 0.01, seed);
  std::vector<std::vector<FeatureVector>> groups;
  for (const auto& id : t.devices) groups.push_back(chunk_features(t.on.at(id), 10));
  return entropy_analysis(groups, t.devices, bins, MiCorrection::shuffle, 20, seed);
}

}  // namespace tcfp
