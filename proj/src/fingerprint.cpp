#include "tcfp/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tcfp/error.hpp"

namespace tcfp {

SensorThresholds thresholds_from_range(double s_max, double s_min) {
  if (!std::isfinite(s_max) || !std::isfinite(s_min)) fail(Errc::BadInput, "non-finite sensor range");
  if (s_max == s_min) fail(Errc::DegenerateRange, "sensor range is a single value");
  if (s_max < s_min) std::swap(s_max, s_min);
  return {0.9 * s_max + 0.1 * s_min, 0.1 * s_max + 0.9 * s_min, s_max, s_min};
}

SensorThresholds sensor_thresholds(const Dataset& ds, const std::string& sensor) {
  const auto& v = ds.channel(sensor).values;
  if (v.empty()) fail(Errc::EmptySeries, "sensor " + sensor + " has no samples");
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return thresholds_from_range(*mx, *mn);
}

std::string op_name(Op op) { return op == Op::on ? "on" : "off"; }

std::string status_name(TransitionStatus s) {
  switch (s) {
    case TransitionStatus::complete: return "complete";
    case TransitionStatus::incomplete: return "incomplete";
    case TransitionStatus::timed_out: return "timed_out";
  }
  return "?";
}

std::vector<Op> logical_states(const TimeSeries& st) {
  std::vector<Op> out(st.values.size(), Op::off);
  // Leading transit takes the first settled state that follows.
  auto settled = [](double v) { return v == status::on ? Op::on : Op::off; };
  std::optional<Op> last;
  for (double v : st.values) {
    if (v != status::transit) {
      last = settled(v) == Op::on ? Op::off : Op::on;
      break;
    }
  }
  for (std::size_t i = 0; i < st.values.size(); ++i) {
    const double v = st.values[i];
    if (v == status::transit) {
      out[i] = last ? (*last == Op::on ? Op::off : Op::on) : Op::off;
    } else {
      out[i] = settled(v);
      last = out[i];
    }
  }
  return out;
}

namespace {

// Scans from `start` until the sensor crosses, `stop` (the next change) is
// reached, or the timeout passes. Nullopt when the trace ends first.
std::optional<TransitionEvent> scan(const std::vector<double>& s, std::size_t start, std::size_t stop, Op op,
                                    const SensorThresholds& thr, double dt, double timeout_s,
                                    const std::string& actuator) {
  TransitionEvent ev;
  ev.actuator = actuator;
  ev.op = op;
  ev.start_idx = start;
  for (std::size_t k = start; k < s.size(); ++k) {
    const double elapsed = static_cast<double>(k - start) * dt;
    if (k >= stop) {
      ev.status = TransitionStatus::incomplete;
      ev.last_idx = k;
      return ev;
    }
    const bool crossed = op == Op::on ? s[k] >= thr.t_on : s[k] <= thr.t_off;
    if (crossed) {
      ev.status = TransitionStatus::complete;
      ev.end_idx = k;
      ev.transition_time_s = elapsed;
      ev.last_idx = k;
      return ev;
    }
    if (elapsed > timeout_s) {
      ev.status = TransitionStatus::timed_out;
      ev.last_idx = k;
      return ev;
    }
  }
  return std::nullopt;
}

void check_timeout(double t) {
  if (!(t > 0.0)) fail(Errc::ConfigError, "timeout_s must be positive");
}

}  // namespace

std::vector<TransitionEvent> extract_transitions(const Dataset& ds, const std::string& actuator,
                                                 const std::string& sensor, const SensorThresholds& thr,
                                                 double timeout_s) {
  check_timeout(timeout_s);
  const auto& st = ds.channel(actuator);
  const auto& s = ds.channel(sensor).values;
  const auto states = logical_states(st);
  std::vector<std::size_t> changes;
  for (std::size_t j = 1; j < states.size(); ++j) {
    if (states[j] != states[j - 1]) changes.push_back(j);
  }
  std::vector<TransitionEvent> out;
  for (std::size_t c = 0; c < changes.size(); ++c) {
    const std::size_t stop = c + 1 < changes.size() ? changes[c + 1] : s.size() + 1;
    auto ev = scan(s, changes[c], stop, states[changes[c]], thr, ds.sample_period_s, timeout_s, actuator);
    if (ev) out.push_back(std::move(*ev));
  }
  return out;
}

std::vector<TransitionEvent> extract_from_triggers(const Dataset& ds, const std::string& actuator,
                                                   const std::string& sensor, const SensorThresholds& thr,
                                                   const std::vector<Trigger>& triggers, double timeout_s) {
  check_timeout(timeout_s);
  ds.channel(actuator);
  const auto& s = ds.channel(sensor).values;
  std::vector<TransitionEvent> out;
  for (std::size_t c = 0; c < triggers.size(); ++c) {
    if (c > 0 && triggers[c].idx < triggers[c - 1].idx) fail(Errc::BadInput, "triggers must be in time order");
    const std::size_t stop = c + 1 < triggers.size() ? triggers[c + 1].idx : s.size() + 1;
    if (triggers[c].idx >= s.size()) break;
    auto ev = scan(s, triggers[c].idx, stop, triggers[c].op, thr, ds.sample_period_s, timeout_s, actuator);
    if (ev) out.push_back(std::move(*ev));
  }
  return out;
}

std::vector<double> complete_times(const std::vector<TransitionEvent>& events, std::optional<Op> op) {
  std::vector<double> out;
  for (const auto& e : events) {
    if (e.status == TransitionStatus::complete && (!op || e.op == *op)) out.push_back(e.transition_time_s);
  }
  return out;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) fail(Errc::BadInput, "FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

Spectrum fft_magnitude(const std::vector<double>& x, double sample_rate) {
  if (x.empty()) fail(Errc::EmptySeries, "FFT of an empty sequence");
  std::size_t n = 1;
  while (n < x.size()) n <<= 1;
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i];
  fft_inplace(a);
  Spectrum sp;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    sp.freqs.push_back(static_cast<double>(k) * sample_rate / static_cast<double>(n));
    sp.mags.push_back(std::abs(a[k]));
  }
  return sp;
}

const std::array<const char*, FeatureVector::size>& FeatureVector::names() {
  static const std::array<const char*, size> n = {"mean",     "std_dev",      "mean_avg_dev",  "skewness",
                                                  "kurtosis", "spec_std_dev", "spec_centroid", "dc_component"};
  return n;
}

std::array<double, FeatureVector::size> FeatureVector::as_array() const {
  return {mean, std_dev, mean_avg_dev, skewness, kurtosis, spec_std_dev, spec_centroid, dc_component};
}

FeatureVector FeatureVector::from_array(const std::array<double, size>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
}

namespace {

// Higher moments skipped (left 0) when the chunk is constant.
FeatureVector compute(const std::vector<double>& x, bool& constant) {
  const double n = static_cast<double>(x.size());
  FeatureVector f;
  for (double v : x) f.mean += v;
  f.mean /= n;
  double ss = 0.0;
  for (double v : x) {
    ss += (v - f.mean) * (v - f.mean);
    f.mean_avg_dev += std::abs(v - f.mean);
  }
  f.mean_avg_dev /= n;
  f.std_dev = std::sqrt(ss / (n - 1.0));
  constant = f.std_dev == 0.0;
  if (!constant) {
    for (double v : x) {
      const double z = (v - f.mean) / f.std_dev;
      f.skewness += z * z * z;
      f.kurtosis += z * z * z * z;
    }
    f.skewness /= n;
    f.kurtosis = f.kurtosis / n - 3.0;
  }
  const auto sp = fft_magnitude(x);
  double m = 0.0, fm = 0.0, f2m = 0.0;
  for (std::size_t k = 0; k < sp.mags.size(); ++k) {
    m += sp.mags[k];
    fm += sp.freqs[k] * sp.mags[k];
    f2m += sp.freqs[k] * sp.freqs[k] * sp.mags[k];
  }
  if (m > 0.0) {
    f.spec_centroid = fm / m;
    f.spec_std_dev = std::sqrt(f2m / m);
  }
  f.dc_component = sp.mags[0];
  return f;
}

void check_chunk(const std::vector<double>& chunk, std::size_t chunk_size) {
  if (chunk_size < 2) fail(Errc::BadInput, "chunk_size must be at least 2");
  if (chunk.size() != chunk_size) fail(Errc::BadInput, "chunk length differs from chunk_size");
  for (double v : chunk) {
    if (!std::isfinite(v)) fail(Errc::BadInput, "non-finite transition time");
  }
}

}  // namespace

FeatureVector features(const std::vector<double>& chunk, std::size_t chunk_size) {
  check_chunk(chunk, chunk_size);
  bool constant = false;
  auto f = compute(chunk, constant);
  if (constant) fail(Errc::ZeroVariance, "constant chunk has no skewness or kurtosis");
  return f;
}

std::vector<FeatureVector> chunk_features(const std::vector<double>& times, std::size_t chunk_size,
                                          std::vector<bool>* degenerate) {
  if (chunk_size < 2) fail(Errc::BadInput, "chunk_size must be at least 2");
  std::vector<FeatureVector> out;
  if (degenerate) degenerate->clear();
  for (std::size_t i = 0; i + chunk_size <= times.size(); i += chunk_size) {
    std::vector<double> chunk(times.begin() + static_cast<std::ptrdiff_t>(i),
                              times.begin() + static_cast<std::ptrdiff_t>(i + chunk_size));
    check_chunk(chunk, chunk_size);
    bool constant = false;
    out.push_back(compute(chunk, constant));
    if (degenerate) degenerate->push_back(constant);
  }
  return out;
}

void write_fingerprint_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows,
                           const std::vector<std::string>& labels) {
  if (rows.size() != labels.size()) fail(Errc::LengthError, "one label per fingerprint row");
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  for (const char* n : FeatureVector::names()) out << n << ',';
  out << "label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i].as_array()) out << format_real(v) << ',';
    out << labels[i] << '\n';
  }
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

void read_fingerprint_csv(const std::filesystem::path& path, std::vector<FeatureVector>& rows,
                          std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  rows.clear();
  labels.clear();
  std::string line;
  if (!std::getline(in, line)) fail(Errc::SchemaError, path.string() + ": missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::array<double, FeatureVector::size> a{};
    std::string cell;
    for (auto& v : a) {
      if (!std::getline(ss, cell, ',')) fail(Errc::SchemaError, path.string() + ": short row " + std::to_string(lineno));
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        fail(Errc::BadInput, path.string() + ": bad number on row " + std::to_string(lineno));
      }
    }
    if (!std::getline(ss, cell)) cell.clear();
    rows.push_back(FeatureVector::from_array(a));
    labels.push_back(cell);
  }
}

}  // namespace tcfp
