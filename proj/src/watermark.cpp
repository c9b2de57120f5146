#include "tcfp/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcfp/error.hpp"

namespace tcfp {

double overflow_time(const TankParams& t) {
  const double delta = t.critical_high - t.high_sp;
  if (!(delta > 0.0) || !(t.max_in_rate > 0.0)) fail(Errc::ConfigError, "tank " + t.name + ": bad overflow margin");
  return delta / t.max_in_rate;
}

double underflow_time(const TankParams& t) {
  const double delta = t.low_sp - t.critical_low;
  if (!(delta > 0.0) || !(t.max_out_rate > 0.0)) fail(Errc::ConfigError, "tank " + t.name + ": bad underflow margin");
  return delta / t.max_out_rate;
}

int critical_mode(const CriticalStateConfig& c) {
  const int code = (c.x1_high << 3) | (c.x1_low << 2) | (c.x2_high << 1) | static_cast<int>(c.x2_low);
  // Flags read X1H X1L X2H X2L.
  switch (code) {
    case 0b0001: return 1;
    case 0b0010: return 2;
    case 0b0100: return 3;
    case 0b0101: return 4;
    case 0b0110: return 5;
    case 0b1000: return 6;
    case 0b1001: return 7;
    case 0b1010: return 8;
    default: break;
  }
  fail(Errc::InvalidMode, "flag combination is not a physical operating mode");
}

TqBound time_to_critical(const CriticalStateConfig& c) {
  const int mode = critical_mode(c);
  auto t1h = [&] { return overflow_time(c.stage1); };
  auto t1l = [&] { return underflow_time(c.stage1); };
  auto t2h = [&] { return overflow_time(c.stage2); };
  auto t2l = [&] { return underflow_time(c.stage2); };
  auto exact = [](double v) { return TqBound{v, v}; };
  auto range = [](double a, double b) { return TqBound{std::min(a, b), a + b}; };
  switch (mode) {
    case 1: return exact(t2l());
    case 2: return exact(t2h());
    case 3: return exact(t1l());
    case 4: return range(t1l(), t2l());
    case 5: return range(t1l(), t2h());
    case 6: return exact(t1h());
    case 7: return exact(std::min(t1h(), t2l()));
    case 8: return range(t1h(), t2h());
    default: break;
  }
  fail(Errc::InvalidMode, "unreachable mode");
}

double scenario_tq_bound(const Scenario& s) {
  if (s.tanks.empty()) fail(Errc::ConfigError, "scenario has no tanks");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : s.tanks) best = std::min({best, overflow_time(t), underflow_time(t)});
  return best;
}

void check_delay_bound(const WatermarkPolicy& p, double tq) {
  const double budget = p.safety_fraction * tq;
  if (p.delay_max_s > budget) {
    fail(Errc::UnsafeDelay, "delay_max " + format_real(p.delay_max_s) + " s exceeds " + format_real(budget) +
                                " s (safety fraction of time to critical state)");
  }
}

namespace {

struct Grid {
  double g;
  long long lo;
  long long hi;
};

Grid delay_grid(const WatermarkPolicy& p, double period) {
  if (!(period > 0.0)) fail(Errc::ConfigError, "sample period must be positive");
  if (p.delay_min_s < 0.0 || p.delay_min_s > p.delay_max_s) {
    fail(Errc::ConfigError, "watermark needs 0 <= delay_min_s <= delay_max_s");
  }
  const double g = p.granularity_s > 0.0 ? p.granularity_s : period;
  const auto lo = static_cast<long long>(std::ceil(p.delay_min_s / g - 1e-9));
  const auto hi = static_cast<long long>(std::floor(p.delay_max_s / g + 1e-9));
  if (hi < lo) fail(Errc::ConfigError, "no delay grid point inside [delay_min_s, delay_max_s]");
  return {g, lo, hi};
}

}  // namespace

std::size_t draw_delay(const WatermarkPolicy& p, double tq, Rng& rng, double period) {
  check_delay_bound(p, tq);
  const Grid gr = delay_grid(p, period);
  std::uniform_int_distribution<long long> u(gr.lo, gr.hi);
  const double seconds = static_cast<double>(u(rng)) * gr.g;
  return static_cast<std::size_t>(std::llround(seconds / period));
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
  if (a.size() < 5 || b.size() < 5) fail(Errc::InsufficientData, "K-S test needs at least 5 samples per side");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::ConfigError, "alpha must be in (0, 1)");
  std::vector<double> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.d_stat = d;
  r.n = x.size();
  r.m = y.size();
  r.alpha = alpha;
  r.critical = std::sqrt(-0.5 * std::log(alpha)) * std::sqrt((n + m) / (n * m));
  r.distinct = d > r.critical;
  return r;
}

KsResult replay_check(const std::vector<double>& normal_tc, const std::vector<double>& observed_tc,
                      const std::vector<double>& delays_s, double alpha) {
  if (observed_tc.size() != delays_s.size()) {
    fail(Errc::LengthError, "one watermark delay is needed per observed operation");
  }
  std::vector<double> adjusted(observed_tc.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) adjusted[i] = observed_tc[i] - delays_s[i];
  return ks_two_sample(normal_tc, adjusted, alpha);
}

std::vector<int> bin_indices(const std::vector<double>& x, int bins) {
  if (bins < 1) fail(Errc::ConfigError, "bins must be positive");
  std::vector<int> out(x.size(), 0);
  if (x.empty()) return out;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn, span = *mx - *mn;
  if (span <= 0.0) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::min(bins - 1, static_cast<int>(std::floor((x[i] - lo) / span * bins)));
  }
  return out;
}

namespace {

double plogp_sum(const std::vector<std::size_t>& counts, std::size_t total) {
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double entropy_bits(const std::vector<int>& labels, int bins) {
  if (labels.empty()) return 0.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return plogp_sum(counts, labels.size());
}

double joint_entropy_bits(const std::vector<int>& a, const std::vector<int>& b, int bins) {
  if (a.size() != b.size()) fail(Errc::LengthError, "joint entropy needs paired samples");
  if (a.empty()) return 0.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins * bins), 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++counts.at(static_cast<std::size_t>(a[i] * bins + b[i]));
  return plogp_sum(counts, a.size());
}

double mutual_information_bits(const std::vector<int>& a, const std::vector<int>& b, int bins) {
  const double mi = entropy_bits(a, bins) + entropy_bits(b, bins) - joint_entropy_bits(a, b, bins);
  return std::max(0.0, mi);
}

EntropyReport entropy_analysis(const std::vector<std::vector<FeatureVector>>& groups,
                               const std::vector<std::string>& names, int bins, MiCorrection correction,
                               int shuffles, std::uint64_t seed) {
  if (groups.size() < 2) fail(Errc::InsufficientData, "entropy analysis needs at least 2 processes");
  if (names.size() != groups.size()) fail(Errc::LengthError, "one name per process");
  if (bins < 2) fail(Errc::ConfigError, "bins must be at least 2");
  std::size_t len = groups.front().size();
  for (const auto& g : groups) len = std::min(len, g.size());
  if (len < 20) fail(Errc::InsufficientData, "entropy analysis needs at least 20 samples per process");

  const std::size_t P = groups.size();
  const double norm = std::log2(static_cast<double>(bins));
  EntropyReport rep;
  rep.processes = names;
  rep.conditional = Matrix::Zero(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
  rep.entropy = Vector::Zero(static_cast<Eigen::Index>(P));
  Matrix used = Matrix::Zero(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
  Vector used_h = Vector::Zero(static_cast<Eigen::Index>(P));
  Rng rng(seed);

  for (std::size_t f = 0; f < FeatureVector::size; ++f) {
    std::vector<std::vector<int>> labels(P);
    std::vector<bool> ok(P, true);
    for (std::size_t i = 0; i < P; ++i) {
      std::vector<double> col(len);
      for (std::size_t k = 0; k < len; ++k) col[k] = groups[i][k].as_array()[f];
      const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
      if (*mn == *mx) {
        ok[i] = false;
        rep.warnings.push_back(names[i] + ": feature " + FeatureVector::names()[f] + " is constant, skipped");
        continue;
      }
      labels[i] = bin_indices(col, bins);
    }
    for (std::size_t i = 0; i < P; ++i) {
      if (!ok[i]) continue;
      const auto I = static_cast<Eigen::Index>(i);
      const double hi = entropy_bits(labels[i], bins);
      rep.entropy(I) += hi / norm;
      used_h(I) += 1.0;
      for (std::size_t t = 0; t < P; ++t) {
        if (!ok[t]) continue;
        const auto T = static_cast<Eigen::Index>(t);
        double mi = i == t ? hi : mutual_information_bits(labels[i], labels[t], bins);
        if (i != t && correction == MiCorrection::shuffle && shuffles > 0) {
          auto perm = labels[t];
          double bias = 0.0;
          for (int s = 0; s < shuffles; ++s) {
            std::shuffle(perm.begin(), perm.end(), rng);
            bias += mutual_information_bits(labels[i], perm, bins);
          }
          mi = std::max(0.0, mi - bias / shuffles);
        }
        rep.conditional(I, T) += std::max(0.0, hi - mi) / norm;
        used(I, T) += 1.0;
      }
    }
  }
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(P); ++i) {
    if (used_h(i) > 0.0) rep.entropy(i) /= used_h(i);
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(P); ++t) {
      if (used(i, t) > 0.0) rep.conditional(i, t) /= used(i, t);
    }
  }
  return rep;
}

// Regularized upper incomplete gamma: series for x < a + 1, Lentz continued
// fraction otherwise.
double igamc(double a, double x) {
  if (!(a > 0.0) || x < 0.0) fail(Errc::BadInput, "igamc needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  constexpr double eps = 1e-14;
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 100000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - lg);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::clamp(std::exp(-x + a * std::log(x) - lg) * h, 0.0, 1.0);
}

namespace {

void check_bits(const std::vector<int>& bits, std::size_t min_n, const char* test) {
  if (bits.size() < min_n) fail(Errc::NotApplicable, std::string(test) + ": sequence too short");
  for (int b : bits) {
    if (b != 0 && b != 1) fail(Errc::BadInput, std::string(test) + ": bits must be 0 or 1");
  }
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Overlapping m-bit pattern counts with wrap-around.
std::vector<std::size_t> pattern_counts(const std::vector<int>& bits, int m) {
  std::vector<std::size_t> counts(std::size_t{1} << m, 0);
  if (m == 0) {
    counts[0] = bits.size();
    return counts;
  }
  const std::size_t n = bits.size();
  const std::size_t mask = (std::size_t{1} << m) - 1;
  std::size_t v = 0;
  for (int j = 0; j < m; ++j) v = (v << 1) | static_cast<std::size_t>(bits[static_cast<std::size_t>(j) % n]);
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[v];
    v = ((v << 1) | static_cast<std::size_t>(bits[(i + static_cast<std::size_t>(m)) % n])) & mask;
  }
  return counts;
}

}  // namespace

double nist_frequency(const std::vector<int>& bits) {
  check_bits(bits, 100, "frequency");
  double s = 0.0;
  for (int b : bits) s += 2 * b - 1;
  return std::erfc(std::abs(s) / std::sqrt(static_cast<double>(bits.size())) / std::sqrt(2.0));
}

double nist_block_frequency(const std::vector<int>& bits, std::size_t M) {
  check_bits(bits, std::max<std::size_t>(100, M), "block frequency");
  const std::size_t N = bits.size() / M;
  double chi = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double ones = 0.0;
    for (std::size_t j = 0; j < M; ++j) ones += bits[i * M + j];
    const double pi = ones / static_cast<double>(M);
    chi += (pi - 0.5) * (pi - 0.5);
  }
  chi *= 4.0 * static_cast<double>(M);
  return igamc(static_cast<double>(N) / 2.0, chi / 2.0);
}

double nist_runs(const std::vector<int>& bits) {
  check_bits(bits, 100, "runs");
  const double n = static_cast<double>(bits.size());
  const double pi = std::accumulate(bits.begin(), bits.end(), 0.0) / n;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;  // frequency prerequisite fails
  double v = 1.0;
  for (std::size_t k = 0; k + 1 < bits.size(); ++k) v += bits[k] != bits[k + 1];
  const double q = pi * (1.0 - pi);
  return std::erfc(std::abs(v - 2.0 * n * q) / (2.0 * std::sqrt(2.0 * n) * q));
}

double nist_longest_run(const std::vector<int>& bits) {
  check_bits(bits, 128, "longest run");
  const std::size_t n = bits.size();
  std::size_t M;
  int lo;
  std::vector<double> pi;
  if (n < 6272) {
    M = 8;
    lo = 1;
    pi = {0.2148, 0.3672, 0.2305, 0.1875};
  } else if (n < 750000) {
    M = 128;
    lo = 4;
    pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  } else {
    M = 10000;
    lo = 10;
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const int K = static_cast<int>(pi.size()) - 1;
  const std::size_t N = n / M;
  std::vector<double> v(pi.size(), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    int run = 0, best = 0;
    for (std::size_t j = 0; j < M; ++j) {
      run = bits[i * M + j] ? run + 1 : 0;
      best = std::max(best, run);
    }
    v[static_cast<std::size_t>(std::clamp(best - lo, 0, K))] += 1.0;
  }
  double chi = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double e = static_cast<double>(N) * pi[i];
    chi += (v[i] - e) * (v[i] - e) / e;
  }
  return igamc(K / 2.0, chi / 2.0);
}

double nist_cusum(const std::vector<int>& bits, bool reverse) {
  check_bits(bits, 100, "cumulative sums");
  const std::size_t n = bits.size();
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += 2 * bits[reverse ? n - 1 - i : i] - 1;
    z = std::max(z, std::abs(s));
  }
  const double nn = static_cast<double>(n), sq = std::sqrt(nn);
  double sum1 = 0.0, sum2 = 0.0;
  for (auto k = static_cast<long long>(std::floor((-nn / z + 1.0) / 4.0));
       k <= static_cast<long long>(std::floor((nn / z - 1.0) / 4.0)); ++k) {
    sum1 += phi((4.0 * k + 1.0) * z / sq) - phi((4.0 * k - 1.0) * z / sq);
  }
  for (auto k = static_cast<long long>(std::floor((-nn / z - 3.0) / 4.0));
       k <= static_cast<long long>(std::floor((nn / z - 1.0) / 4.0)); ++k) {
    sum2 += phi((4.0 * k + 3.0) * z / sq) - phi((4.0 * k + 1.0) * z / sq);
  }
  return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

double nist_approximate_entropy(const std::vector<int>& bits, int m) {
  check_bits(bits, 100, "approximate entropy");
  if (m < 1 || m > 24) fail(Errc::ConfigError, "approximate entropy block length out of range");
  const double n = static_cast<double>(bits.size());
  auto phi_m = [&](int len) {
    double acc = 0.0;
    for (auto c : pattern_counts(bits, len)) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / n;
      acc += p * std::log(p);
    }
    return acc;
  };
  const double apen = phi_m(m) - phi_m(m + 1);
  const double chi = 2.0 * n * (std::log(2.0) - apen);
  return igamc(std::pow(2.0, m - 1), chi / 2.0);
}

std::pair<double, double> nist_serial(const std::vector<int>& bits, int m) {
  check_bits(bits, 100, "serial");
  if (m < 2 || m > 24) fail(Errc::ConfigError, "serial block length out of range");
  const double n = static_cast<double>(bits.size());
  auto psi = [&](int len) {
    if (len <= 0) return 0.0;
    double acc = 0.0;
    for (auto c : pattern_counts(bits, len)) acc += static_cast<double>(c) * static_cast<double>(c);
    return acc * std::pow(2.0, len) / n - n;
  };
  const double p0 = psi(m), p1 = psi(m - 1), p2 = psi(m - 2);
  const double d1 = p0 - p1, d2 = p0 - 2.0 * p1 + p2;
  return {igamc(std::pow(2.0, m - 2), d1 / 2.0), igamc(std::pow(2.0, m - 3), d2 / 2.0)};
}

std::vector<NistTest> nist_subset(const std::vector<int>& bits) {
  const std::size_t n = bits.size();
  const int log2n = n > 0 ? static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) : 0;
  std::vector<NistTest> out;
  auto run = [&](const std::string& name, auto&& fn) {
    NistTest t{name, false, 0.0};
    try {
      t.p_value = fn();
      t.applicable = true;
    } catch (const Error& e) {
      if (e.code() != Errc::NotApplicable) throw;
    }
    out.push_back(t);
  };
  run("frequency", [&] { return nist_frequency(bits); });
  run("block_frequency", [&] { return nist_block_frequency(bits, 128); });
  run("runs", [&] { return nist_runs(bits); });
  run("longest_run", [&] { return nist_longest_run(bits); });
  run("cusum_forward", [&] { return nist_cusum(bits, false); });
  run("cusum_reverse", [&] { return nist_cusum(bits, true); });
  const int apen_m = std::min(10, log2n - 6);
  run("approximate_entropy", [&] {
    if (apen_m < 2) fail(Errc::NotApplicable, "approximate entropy: sequence too short");
    return nist_approximate_entropy(bits, apen_m);
  });
  const int serial_m = std::min(16, log2n - 3);
  std::pair<double, double> serial{0.0, 0.0};
  bool serial_ok = false;
  run("serial_1", [&] {
    if (serial_m < 3) fail(Errc::NotApplicable, "serial: sequence too short");
    serial = nist_serial(bits, serial_m);
    serial_ok = true;
    return serial.first;
  });
  out.push_back({"serial_2", serial_ok, serial.second});
  return out;
}

std::vector<int> serialize_delays(const std::vector<std::size_t>& delays, const WatermarkPolicy& p, double period) {
  const Grid gr = delay_grid(p, period);
  const auto range = static_cast<unsigned long long>(gr.hi - gr.lo + 1);
  int width = 1;
  while ((1ULL << width) < range) ++width;
  std::vector<int> bits;
  bits.reserve(delays.size() * static_cast<std::size_t>(width));
  for (auto d : delays) {
    const long long idx = std::llround(static_cast<double>(d) * period / gr.g) - gr.lo;
    if (idx < 0 || idx > gr.hi - gr.lo) fail(Errc::BadInput, "delay outside the policy range");
    for (int b = width - 1; b >= 0; --b) bits.push_back(static_cast<int>((idx >> b) & 1));
  }
  return bits;
}

}  // namespace tcfp
