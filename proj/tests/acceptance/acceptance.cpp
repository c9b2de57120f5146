// Acceptance run: one PASS/FAIL line per criterion, then a summary line.
// Exit status is 1 when any criterion fails, unless --report-only is given.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tcfp/campaigns.hpp"
#include "tcfp/error.hpp"
#include "tcfp/lti.hpp"
#include "tcfp/scenarios.hpp"
#include "tcfp/timeseries.hpp"
#include "tcfp/watermark.hpp"

using namespace tcfp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Outcome cusum_fixture() {
  const CusumParams p{17.79, 1.12, 6.56, -3.05};
  const auto a = cusum_step({}, p, 20.0);
  const auto b = cusum_step({}, p, 26.0);
  const auto c = cusum_step({}, p, p.mu);
  const bool ok = near(a.d_plus, 1.09, 1e-12) && near(a.state.s_plus, 1.09, 1e-12) && near(a.d_minus, 3.33, 1e-12) &&
                  a.state.s_minus == 0.0 && !a.alarm_plus && !a.alarm_minus && near(b.d_plus, 7.09, 1e-12) &&
                  b.alarm_plus && b.state.s_plus == 0.0 && !c.alarm_plus && !c.alarm_minus &&
                  c.state.s_plus == 0.0 && c.state.s_minus == 0.0;
  return {ok, fmt("t=20: d+=%.12f S+=%.12f d-=%.12f; t=26: d+=%.12f alarm=%d", a.d_plus, a.state.s_plus, a.d_minus,
                  b.d_plus, int(b.alarm_plus))};
}

Outcome time_to_critical_fixture() {
  TankParams t;
  t.high_sp = 800;
  t.critical_high = 1000;
  t.low_sp = 500;
  t.critical_low = 150;
  t.max_in_rate = 0.48;
  t.max_out_rate = 0.47;
  const double h = overflow_time(t), l = underflow_time(t);
  // Every flag combination: 8 valid modes, the rest rejected.
  int valid = 0, rejected = 0;
  std::vector<int> modes;
  for (int bits = 0; bits < 16; ++bits) {
    CriticalStateConfig cfg{t, t, bool(bits & 8), bool(bits & 4), bool(bits & 2), bool(bits & 1)};
    try {
      modes.push_back(critical_mode(cfg));
      const auto b = time_to_critical(cfg);
      valid += b.lower > 0 && b.lower <= b.upper;
    } catch (const Error& e) {
      rejected += e.code() == Errc::InvalidMode;
    }
  }
  std::sort(modes.begin(), modes.end());
  const bool all_modes = modes == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8};
  const bool ok = near(h, 416.66, 0.01) && near(l, 744.68, 0.01) && valid == 8 && rejected == 8 && all_modes;
  return {ok, fmt("T1qH=%.4f s, T1qL=%.4f s, %d valid modes, %d combos rejected", h, l, valid, rejected)};
}

Outcome threshold_fixture() {
  const auto t = thresholds_from_range(2.4, 0.0);
  const bool ok = near(t.t_on, 2.16, 1e-12) && near(t.t_off, 0.24, 1e-12);
  return {ok, fmt("t_on=%.15g t_off=%.15g", t.t_on, t.t_off)};
}

std::string kernel_row(const std::vector<CvResult>& rs) {
  std::string s;
  for (const auto& r : rs) s += fmt("%s %.2f%% ", kernel_name(r.kernel).c_str(), 100.0 * r.accuracy);
  return s;
}

double acc_of(const std::vector<CvResult>& rs, Kernel k) {
  for (const auto& r : rs) {
    if (r.kernel == k) return r.accuracy;
  }
  return 0.0;
}

struct Shared {
  std::optional<ClassificationStudy> campaign;
};

Outcome classification_pattern(Shared& sh) {
  sh.campaign = classification_study(campaign_devices(), 520, 0.1, 1);
  const auto& s = *sh.campaign;
  bool ok = s.min_operations >= 500;
  for (const auto* rs : {&s.opening, &s.closing}) {
    const double sig = acc_of(*rs, Kernel::sigmoid);
    for (auto k : {Kernel::linear, Kernel::polynomial}) ok = ok && acc_of(*rs, k) >= 0.95 && acc_of(*rs, k) > sig;
  }
  return {ok, fmt("ops/device>=%zu | opening: %s| closing: %s", s.min_operations, kernel_row(s.opening).c_str(),
                  kernel_row(s.closing).c_str())};
}

Outcome state_fingerprinting(Shared& sh) {
  if (!sh.campaign) sh.campaign = classification_study(campaign_devices(), 520, 0.1, 1);
  bool ok = !sh.campaign->state.empty();
  std::string d;
  for (const auto& [id, r] : sh.campaign->state) {
    ok = ok && r.accuracy >= 0.90;
    d += fmt("%s %.2f%% ", id.c_str(), 100.0 * r.accuracy);
  }
  for (const auto& b : campaign_devices()) {
    if (b.kind == DeviceKind::motorized_valve) ok = ok && b.close_time_s > b.open_time_s;
  }
  return {ok, d + "(rbf, open vs close, close slower than open)"};
}

Outcome five_valves() {
  const auto s = classification_study(five_valve_devices(0.08), 200, 0.01, 1);
  const double lin = acc_of(s.cycle, Kernel::linear);
  return {lin >= 0.90, fmt("cycle fingerprint: %s| opening only: %s", kernel_row(s.cycle).c_str(),
                           kernel_row(s.opening).c_str())};
}

Outcome detection_ordering() {
  const auto s = detection_study(100, 1);
  std::map<AttackType, DetectionRow> row;
  for (const auto& r : s.rows) row[r.type] = r;
  auto ci = [&](AttackType t) {
    const auto& r = row[t];
    return r.performed == 0 ? 0.0 : std::max(r.cusum, r.incomplete);
  };
  bool ok = true;
  std::string d;
  for (const auto& r : s.rows) {
    ok = ok && r.performed >= 30;
    d += fmt("%s n=%zu %.0f%% ", attack_name(r.type).c_str(), r.performed, r.overall);
  }
  ok = ok && row.size() == 7;
  // CUSUM+incomplete: union of the two categories, bounded below by either.
  ok = ok && row[AttackType::C1].overall >= 80.0 && ci(AttackType::C1) >= 80.0;
  ok = ok && row[AttackType::D2].overall >= 80.0 && ci(AttackType::D2) >= 80.0;
  ok = ok && row[AttackType::A1].overall <= 40.0 && row[AttackType::F1].overall <= 40.0;
  ok = ok && row[AttackType::D1].overall > row[AttackType::A1].overall &&
       row[AttackType::E1].overall > row[AttackType::A1].overall;
  double worst = 0.0, worst_held = 0.0;
  for (const auto& [k, v] : s.far_training) worst = std::max(worst, v);
  for (const auto& [k, v] : s.far_held_out) worst_held = std::max(worst_held, v);
  ok = ok && worst <= 0.04 && s.far_training.size() == 4;
  return {ok, d + fmt("| FAR max %.2f%% on training runs, %.2f%% held out", 100 * worst, 100 * worst_held)};
}

Outcome watermark_power_ordering() {
  const auto strong = watermark_power(35.0, 40.0, 100, 1);
  const auto weak = watermark_power(0.0, 5.0, 100, 1);
  const bool ok = strong.replay_power >= 0.95 && strong.replay_power > weak.replay_power;
  return {ok, fmt("delays [35,40] s: power %.2f (honest flagged %.2f); delays [0,5] s: power %.2f (honest %.2f); "
                  "%.1f ops/trial, 100 trials",
                  strong.replay_power, strong.honest_flag_rate, weak.replay_power, weak.honest_flag_rate,
                  strong.mean_ops)};
}

Outcome residual_algebra() {
  const auto m = stage1_four_state_model();
  const auto gain = stage1_four_state_gain();
  const int k_bad = 10;
  Vector delta(3);
  delta << 1.0, -1.0, 0.5;
  std::vector<Vector> u_wm, y;
  Vector x = Vector::Zero(4);
  for (int k = 0; k < 20; ++k) {
    Vector u = Vector::Zero(3);
    Vector u_attacker = u;
    if (k == k_bad) u_attacker += delta;
    const auto r = step(m, x, u_attacker);
    y.push_back(r.y);
    u_wm.push_back(u);
    x = r.x_next;
  }
  const auto res = watermark_residual(m, gain, y, u_wm);
  const Vector expected = m.C * m.B * delta;
  const double err = (res[k_bad + 1] - expected).cwiseAbs().maxCoeff();
  double before = 0.0;
  for (int k = 0; k <= k_bad; ++k) before = std::max(before, res[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
  return {err < 1e-12 && before == 0.0, fmt("|r - CB*delta|max = %.3g, residual before = %.3g", err, before)};
}

Outcome entropy_uniqueness() {
  const auto r = entropy_study(400, 1);
  double cross_min = 1.0, cross_sum = 0.0, h_min = 1.0;
  int n = 0;
  for (Eigen::Index i = 0; i < r.conditional.rows(); ++i) {
    h_min = std::min(h_min, r.entropy(i));
    for (Eigen::Index j = 0; j < r.conditional.cols(); ++j) {
      if (i == j) continue;
      cross_min = std::min(cross_min, r.conditional(i, j));
      cross_sum += r.conditional(i, j);
      ++n;
    }
  }
  const bool ok = r.processes.size() == 8 && cross_min > 0.85 && h_min >= 0.9;
  return {ok, fmt("cross-process conditional min %.3f mean %.3f; per-process entropy min %.3f mean %.3f",
                  cross_min, cross_sum / n, h_min, r.entropy.mean())};
}

Outcome randomness() {
  WatermarkPolicy pol{true, 5.0, 36.0, 1, 0.0, 0.5};
  Rng rng(2024);
  std::vector<std::size_t> d(100000);
  for (auto& v : d) v = draw_delay(pol, 416.66, rng);
  const auto bits = serialize_delays(d, pol);
  bool ok = true;
  double worst = 1.0;
  std::size_t applicable = 0;
  for (const auto& t : nist_subset(bits)) {
    if (!t.applicable) continue;
    ++applicable;
    worst = std::min(worst, t.p_value);
    ok = ok && t.p_value > 0.01;
  }
  const std::vector<int> zeros(10000, 0);
  std::vector<int> alt(10000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = static_cast<int>(i % 2);
  const double p0 = nist_frequency(zeros), pr = nist_runs(alt);
  ok = ok && applicable == 9 && p0 < 1e-10 && pr < 0.01;
  return {ok, fmt("%zu bits, %zu tests, min p=%.4f; all-zeros monobit p=%.2g; alternating runs p=%.2g", bits.size(),
                  applicable, worst, p0, pr)};
}

Outcome property_suites() {
  std::vector<std::string> failed;
  // Mass conservation.
  {
    auto s = default_scenario();
    s.duration_s = 4000.0;
    const auto r = simulate(s, 11);
    const auto& t = r.truth.truth;
    const auto& lvl = t.channel("LIT101").values;
    const auto& in = t.channel("FIT101").values;
    const auto& out = t.channel("FIT201").values;
    double acc = s.tanks[0].initial_level, worst = 0.0;
    for (std::size_t k = 0; k < lvl.size(); ++k) {
      worst = std::max(worst, std::abs(lvl[k] - acc));
      acc += s.tanks[0].level_per_flow * (in[k] - out[k]) * s.sample_period_s;
    }
    if (!(worst < 1e-9)) failed.push_back("mass");
    // CSV round trip.
    const auto path = std::filesystem::temp_directory_path() / "tcfp_acceptance_rt.csv";
    export_csv(r.reported, path);
    const auto back = ingest_csv(path, r.reported.schema());
    std::filesystem::remove(path);
    if (!(back == r.reported)) failed.push_back("csv");
  }
  // Parseval.
  {
    Rng rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::complex<double>> a(1024);
    double e_t = 0.0, e_f = 0.0;
    for (auto& v : a) {
      v = n(rng);
      e_t += std::norm(v);
    }
    fft_inplace(a);
    for (const auto& v : a) e_f += std::norm(v);
    if (!(std::abs(e_t - e_f / 1024.0) < 1e-9 * e_t)) failed.push_back("parseval");
  }
  // Estimator residual decay.
  {
    StateSpaceModel m;
    m.A.resize(2, 2);
    m.A << 0.8, 0.2, -0.1, 0.7;
    m.B.resize(2, 1);
    m.B << 0.5, 1.0;
    m.C.resize(1, 2);
    m.C << 1.0, 0.5;
    m.process_noise_std = Vector::Zero(2);
    m.sensor_noise_std = Vector::Zero(1);
    const auto g = steady_state_gain(m, Matrix::Identity(2, 2) * 0.01, Matrix::Identity(1, 1) * 0.1);
    Vector x(2), xh = Vector::Zero(2);
    x << 5.0, -3.0;
    double first = 0.0, last = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vector u = Vector::Constant(1, std::sin(0.1 * k));
      const auto p = step(m, x, u);
      const auto e = kf_step(m, g, xh, u, p.y);
      const double r = std::abs((p.y - e.y_hat)(0));
      if (k == 0) first = r;
      last = r;
      x = p.x_next;
      xh = e.x_hat_next;
    }
    if (!(first > 1.0 && last < 1e-12)) failed.push_back("kalman");
  }
  // CUSUM state bounds.
  {
    const CusumParams p{17.79, 1.12, 6.56, -3.05};
    Rng rng(4);
    std::normal_distribution<double> n(18.0, 3.0);
    CusumState s;
    bool ok = true;
    for (int i = 0; i < 5000; ++i) {
      const auto r = cusum_step(s, p, std::max(0.0, n(rng)));
      ok = ok && r.state.s_plus >= 0 && r.state.s_plus <= p.t_plus && r.state.s_minus <= 0 &&
           r.state.s_minus >= p.t_minus && !(r.alarm_plus && r.alarm_minus);
      s = r.state;
    }
    if (!ok) failed.push_back("cusum");
  }
  // K-S symmetry and range.
  {
    Rng rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    bool ok = true;
    for (int t = 0; t < 200; ++t) {
      std::vector<double> a(5 + t % 17), b(5 + t % 13);
      for (auto& v : a) v = n(rng);
      for (auto& v : b) v = n(rng) + 0.01 * t;
      const double d1 = ks_two_sample(a, b).d_stat, d2 = ks_two_sample(b, a).d_stat;
      ok = ok && d1 == d2 && d1 >= 0.0 && d1 <= 1.0;
    }
    if (!ok) failed.push_back("ks");
  }
  std::string d = "mass, csv, parseval, kalman decay, cusum bounds, ks symmetry";
  for (const auto& f : failed) d += " | failed: " + f;
  return {failed.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  for (int i = 1; i < argc; ++i) report_only = report_only || std::strcmp(argv[i], "--report-only") == 0;

  Shared sh;
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {"cusum fixture", 1.0, cusum_fixture},
      {"time to critical", 1.0, time_to_critical_fixture},
      {"sensor thresholds", 1.0, threshold_fixture},
      {"classification pattern", 120.0, [&] { return classification_pattern(sh); }},
      {"state fingerprinting", 120.0, [&] { return state_fingerprinting(sh); }},
      {"five valves", 60.0, five_valves},
      {"detection ordering", 300.0, detection_ordering},
      {"watermark power", 180.0, watermark_power_ordering},
      {"residual algebra", 1.0, residual_algebra},
      {"entropy uniqueness", 60.0, entropy_uniqueness},
      {"randomness", 60.0, randomness},
      {"property suites", 180.0, property_suites},
  };
  int passed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && dt <= all[i].budget_s;
    passed += pass;
    std::printf("%s [%zu] %s: %s (%.2f s)\n", pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  std::printf("criteria: %zu, passed: %d\n", all.size(), passed);
  return report_only || passed == static_cast<int>(all.size()) ? 0 : 1;
}
