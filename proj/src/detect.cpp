#include "tcfp/detect.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "tcfp/error.hpp"

namespace tcfp {

CusumStep cusum_step(const CusumState& s, const CusumParams& p, double t) {
  if (!std::isfinite(t) || t < 0.0) fail(Errc::BadInput, "transition time must be finite and non-negative");
  CusumStep r;
  r.d_plus = s.s_plus + t - p.mu - p.beta;
  r.d_minus = s.s_minus + t - p.mu + p.beta;
  r.state.i = s.i + 1;
  if (r.d_plus > p.t_plus) {
    r.alarm_plus = true;
    r.state.s_plus = 0.0;
  } else {
    r.state.s_plus = std::max(0.0, r.d_plus);
  }
  if (r.d_minus < p.t_minus) {
    r.alarm_minus = true;
    r.state.s_minus = 0.0;
  } else {
    r.state.s_minus = std::min(0.0, r.d_minus);
  }
  return r;
}

CusumParams fit_cusum_params(const std::vector<double>& times) {
  if (times.size() < 5) fail(Errc::InsufficientData, "CUSUM fit needs at least 5 complete transitions");
  const double n = static_cast<double>(times.size());
  const double mu = std::accumulate(times.begin(), times.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : times) ss += (t - mu) * (t - mu);
  return {mu, std::sqrt(ss / (n - 1.0)) / 2.0, 0.0, 0.0};
}

std::pair<double, double> alarm_rates(const std::vector<double>& times, const CusumParams& p) {
  if (times.empty()) return {0.0, 0.0};
  CusumState s;
  std::size_t up = 0, down = 0;
  for (double t : times) {
    const auto r = cusum_step(s, p, t);
    up += r.alarm_plus;
    down += r.alarm_minus;
    s = r.state;
  }
  const double n = static_cast<double>(times.size());
  return {static_cast<double>(up) / n, static_cast<double>(down) / n};
}

CusumParams tune_thresholds(const std::vector<double>& times, CusumParams p, double max_far) {
  if (times.size() < 20) fail(Errc::InsufficientData, "threshold tuning needs at least 20 transitions");
  if (!(max_far >= 0.0 && max_far < 1.0)) fail(Errc::ConfigError, "max_far must be in [0, 1)");
  constexpr double eps = 1e-6;
  // Largest excursion without resets bounds the search from above.
  double up_max = 0.0, down_max = 0.0, sp = 0.0, sm = 0.0;
  for (double t : times) {
    sp = std::max(0.0, sp + t - p.mu - p.beta);
    sm = std::min(0.0, sm + t - p.mu + p.beta);
    up_max = std::max(up_max, sp);
    down_max = std::max(down_max, -sm);
  }
  auto search = [&](bool plus, double hi) {
    auto rate = [&](double thr) {
      CusumParams q = p;
      q.t_plus = plus ? thr : std::numeric_limits<double>::infinity();
      q.t_minus = plus ? -std::numeric_limits<double>::infinity() : -thr;
      const auto r = alarm_rates(times, q);
      return plus ? r.first : r.second;
    };
    if (rate(eps) <= max_far) return eps;
    double lo = eps;
    hi = std::max(hi, eps);
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (rate(mid) <= max_far ? hi : lo) = mid;
    }
    return hi;
  };
  p.t_plus = search(true, up_max);
  p.t_minus = -search(false, down_max);
  return p;
}

std::string alarm_kind_name(AlarmKind k) {
  switch (k) {
    case AlarmKind::cusum_plus: return "cusum_plus";
    case AlarmKind::cusum_minus: return "cusum_minus";
    case AlarmKind::incomplete: return "incomplete";
    case AlarmKind::timed_out: return "timed_out";
  }
  return "?";
}

AlarmLog run_detector(const Dataset& ds, const std::vector<Pairing>& pairings, const ParamTable& params,
                      double timeout_s) {
  AlarmLog log;
  for (const auto& pr : pairings) {
    for (Op op : {Op::on, Op::off}) {
      if (!params.count({pr.actuator, op})) {
        fail(Errc::ConfigError, "no CUSUM params for " + pr.actuator + " " + op_name(op));
      }
    }
    struct Track {
      CusumState s;
      std::size_t iter = 0;
      std::size_t zero_plus = 0;
      std::size_t zero_minus = 0;
    };
    std::map<Op, Track> tracks;
    for (const auto& ev : extract_transitions(ds, pr.actuator, pr.sensor, pr.thresholds, timeout_s)) {
      const PairKey key{pr.actuator, ev.op};
      ++log.operations[key];
      auto& tr = tracks[ev.op];
      const std::size_t it = tr.iter++;
      Alarm a;
      a.actuator = pr.actuator;
      a.sensor = pr.sensor;
      a.op = ev.op;
      a.iteration = it;
      a.sample_start = ev.start_idx;
      a.sample_end = ev.last_idx;
      if (ev.status == TransitionStatus::incomplete || ev.status == TransitionStatus::timed_out) {
        a.kind = ev.status == TransitionStatus::incomplete ? AlarmKind::incomplete : AlarmKind::timed_out;
        a.change_start = it;
        (ev.status == TransitionStatus::incomplete ? log.incomplete : log.timed_out)++;
        log.alarms.push_back(a);
        continue;
      }
      const auto r = cusum_step(tr.s, params.at(key), ev.transition_time_s);
      if (r.alarm_plus) {
        a.kind = AlarmKind::cusum_plus;
        a.change_start = tr.zero_plus;
        log.alarms.push_back(a);
      }
      if (r.alarm_minus) {
        a.kind = AlarmKind::cusum_minus;
        a.change_start = tr.zero_minus;
        log.alarms.push_back(a);
      }
      if (r.state.s_plus == 0.0) tr.zero_plus = it;
      if (r.state.s_minus == 0.0) tr.zero_minus = it;
      tr.s = r.state;
    }
  }
  return log;
}

ParamTable train_detector(const std::vector<Dataset>& clean, const std::vector<Pairing>& pairings, double timeout_s,
                          double max_far) {
  ParamTable out;
  for (const auto& pr : pairings) {
    for (Op op : {Op::on, Op::off}) {
      std::vector<double> times;
      for (const auto& ds : clean) {
        const auto t = complete_times(extract_transitions(ds, pr.actuator, pr.sensor, pr.thresholds, timeout_s), op);
        times.insert(times.end(), t.begin(), t.end());
      }
      out[{pr.actuator, op}] = tune_thresholds(times, fit_cusum_params(times), max_far);
    }
  }
  return out;
}

std::vector<DetectionRow> detection_report(const std::vector<DetectionCase>& cases, double period, double grace_s) {
  if (!(period > 0.0)) fail(Errc::ConfigError, "sample period must be positive");
  const auto grace = static_cast<std::size_t>(std::ceil(grace_s / period));
  struct Tally {
    std::size_t n = 0, overall = 0, cusum = 0, incomplete = 0, timed_out = 0;
  };
  std::map<AttackType, Tally> tally;
  for (const auto& c : cases) {
    const auto& a = c.attack;
    if (!a.active_start || !a.active_end || c.log == nullptr) continue;
    const std::size_t lo = *a.active_start, hi = *a.active_end + grace;
    bool cusum = false, inc = false, tmo = false;
    for (const auto& al : c.log->alarms) {
      const bool touches = std::find(a.targets.begin(), a.targets.end(), al.actuator) != a.targets.end() ||
                           std::find(a.targets.begin(), a.targets.end(), al.sensor) != a.targets.end();
      if (!touches || al.sample_end < lo || al.sample_start > hi) continue;
      switch (al.kind) {
        case AlarmKind::cusum_plus:
        case AlarmKind::cusum_minus: cusum = true; break;
        case AlarmKind::incomplete: inc = true; break;
        case AlarmKind::timed_out: tmo = true; break;
      }
    }
    auto& t = tally[a.type];
    ++t.n;
    t.overall += cusum || inc || tmo;
    t.cusum += cusum;
    t.incomplete += inc;
    t.timed_out += tmo;
  }
  std::vector<DetectionRow> rows;
  for (const auto& [type, t] : tally) {
    const double n = static_cast<double>(t.n);
    rows.push_back({type, t.n, 100.0 * static_cast<double>(t.overall) / n, 100.0 * static_cast<double>(t.cusum) / n,
                    100.0 * static_cast<double>(t.incomplete) / n, 100.0 * static_cast<double>(t.timed_out) / n});
  }
  return rows;
}

std::map<PairKey, double> false_alarm_rates(const AlarmLog& log) {
  std::map<PairKey, std::size_t> count;
  for (const auto& a : log.alarms) ++count[{a.actuator, a.op}];
  std::map<PairKey, double> out;
  for (const auto& [key, n] : log.operations) {
    out[key] = n == 0 ? 0.0 : static_cast<double>(count[key]) / static_cast<double>(n);
  }
  return out;
}

std::string params_to_json(const ParamTable& t) {
  auto j = nlohmann::json::array();
  for (const auto& [key, p] : t) {
    j.push_back({{"actuator", key.first},
                 {"op", op_name(key.second)},
                 {"mu", p.mu},
                 {"beta", p.beta},
                 {"t_plus", p.t_plus},
                 {"t_minus", p.t_minus}});
  }
  return j.dump(2);
}

ParamTable params_from_json(const std::string& text) {
  ParamTable t;
  try {
    for (const auto& e : nlohmann::json::parse(text)) {
      const auto op = e.at("op").get<std::string>();
      if (op != "on" && op != "off") fail(Errc::SchemaError, "op must be on or off");
      t[{e.at("actuator").get<std::string>(), op == "on" ? Op::on : Op::off}] = {
          e.at("mu").get<double>(), e.at("beta").get<double>(), e.at("t_plus").get<double>(),
          e.at("t_minus").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, std::string("params document: ") + e.what());
  }
  return t;
}

}  // namespace tcfp
