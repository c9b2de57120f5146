#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcfp/timeseries.hpp"

namespace tcfp {

struct SensorThresholds {
  double t_on = 0.0;
  double t_off = 0.0;
  double s_max = 0.0;
  double s_min = 0.0;
};

// t_on = 0.9 s_max + 0.1 s_min, t_off = 0.1 s_max + 0.9 s_min.
// Throws DegenerateRange when s_max == s_min.
SensorThresholds thresholds_from_range(double s_max, double s_min);
SensorThresholds sensor_thresholds(const Dataset& ds, const std::string& sensor);

enum class Op { on, off };
enum class TransitionStatus { complete, incomplete, timed_out };

std::string op_name(Op op);
std::string status_name(TransitionStatus s);

struct TransitionEvent {
  std::string actuator;
  Op op = Op::on;
  std::size_t start_idx = 0;
  std::optional<std::size_t> end_idx;  // complete events only
  double transition_time_s = 0.0;
  TransitionStatus status = TransitionStatus::complete;
  // Sample after which the event stops being observed: end_idx, the next
  // state change, or the timeout.
  std::size_t last_idx = 0;
};

// Logical ON/OFF state per sample from a status-coded channel; transit
// counts as the destination (the opposite of the last settled state).
std::vector<Op> logical_states(const TimeSeries& status);

// One event per logical state change. Events still open when the trace ends
// before the timeout are dropped.
std::vector<TransitionEvent> extract_transitions(const Dataset& ds, const std::string& actuator,
                                                 const std::string& sensor, const SensorThresholds& thresholds,
                                                 double timeout_s = 120.0);

struct Trigger {
  std::size_t idx = 0;
  Op op = Op::on;
};

// Same scan, but timed from externally known trigger instants (e.g. the PLC's
// command times when execution is watermark-delayed).
std::vector<TransitionEvent> extract_from_triggers(const Dataset& ds, const std::string& actuator,
                                                   const std::string& sensor, const SensorThresholds& thresholds,
                                                   const std::vector<Trigger>& triggers, double timeout_s = 120.0);

std::vector<double> complete_times(const std::vector<TransitionEvent>& events, std::optional<Op> op = std::nullopt);

// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

struct Spectrum {
  std::vector<double> freqs;  // bin index * sample_rate / N
  std::vector<double> mags;   // first N/2 + 1 bins
};

// Zero-pads to the next power of two. Throws EmptySeries.
Spectrum fft_magnitude(const std::vector<double>& x, double sample_rate = 1.0);

struct FeatureVector {
  double mean = 0.0;
  double std_dev = 0.0;
  double mean_avg_dev = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
  double spec_std_dev = 0.0;
  double spec_centroid = 0.0;
  double dc_component = 0.0;

  static constexpr std::size_t size = 8;
  static const std::array<const char*, size>& names();
  std::array<double, size> as_array() const;
  static FeatureVector from_array(const std::array<double, size>& a);
};

// Throws ZeroVariance for a constant chunk and BadInput on a size mismatch.
FeatureVector features(const std::vector<double>& chunk, std::size_t chunk_size = 10);

// Non-overlapping chunks in arrival order; a trailing partial chunk is dropped.
// Constant chunks get skewness = kurtosis = 0 and are flagged in `degenerate`.
std::vector<FeatureVector> chunk_features(const std::vector<double>& times, std::size_t chunk_size = 10,
                                          std::vector<bool>* degenerate = nullptr);

void write_fingerprint_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows,
                           const std::vector<std::string>& labels);
void read_fingerprint_csv(const std::filesystem::path& path, std::vector<FeatureVector>& rows,
                          std::vector<std::string>& labels);

}  // namespace tcfp
