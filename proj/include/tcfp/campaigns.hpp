#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcfp/classify.hpp"
#include "tcfp/detect.hpp"
#include "tcfp/scenarios.hpp"
#include "tcfp/watermark.hpp"

namespace tcfp {

// End-to-end studies built from the simulator. Shared by the CLI and the
// acceptance run; every study is deterministic in its seed.

// Transition times of every bench device, grouped by device and op.
struct BenchTimes {
  std::vector<std::string> devices;
  std::map<std::string, std::vector<double>> on, off;
};

BenchTimes bench_times(const std::vector<BenchDevice>& devices, std::size_t cycles, double on_s, double off_s,
                       double sample_period_s, double flow_noise_std, std::uint64_t seed);

struct LabelledFeatures {
  Matrix X;
  std::vector<std::string> labels;
};

// Chunked features of one op per device, labelled by device id.
LabelledFeatures device_features(const BenchTimes& t, Op op, std::size_t chunk_size = 10);
// Chunked on- and off-features of one device, labelled "open" / "close".
LabelledFeatures state_features(const BenchTimes& t, const std::string& device, std::size_t chunk_size = 10);

// One row per cycle: the on-chunk features followed by the off-chunk features.
LabelledFeatures cycle_features(const BenchTimes& t, std::size_t chunk_size = 10);

struct ClassificationStudy {
  std::size_t min_operations = 0;  // smallest per-device count of complete ops
  std::vector<CvResult> opening, closing;
  std::map<std::string, CvResult> state;  // per valve, open vs close
  std::vector<CvResult> cycle;             // on and off features side by side
};

ClassificationStudy classification_study(const std::vector<BenchDevice>& devices, std::size_t cycles,
                                         double sample_period_s, std::uint64_t seed, int folds = 5,
                                         std::size_t chunk_size = 10, const TrainConfig& cfg = {});

struct DetectionStudy {
  std::vector<DetectionRow> rows;
  std::map<PairKey, double> far_training;  // alarms per op on the training runs
  std::map<PairKey, double> far_held_out;
  std::map<PairKey, std::size_t> ops_training;
  ParamTable params;
};

// Attack-free runs train the detector; attack runs each carry one instance of
// every type, in random order and with random targets and shapes.
DetectionStudy detection_study(std::size_t instances_per_type, std::uint64_t seed, std::size_t clean_runs = 8);

struct PowerStudy {
  double delay_min_s = 0.0;
  double delay_max_s = 0.0;
  std::size_t trials = 0;
  double replay_power = 0.0;       // share of replays flagged
  double honest_flag_rate = 0.0;   // share of honest watermarked runs flagged
  double mean_ops = 0.0;           // operations per trial
};

// FIT101 noise and MV101 jitter set how blurred the measured transition
// times are.
PowerStudy watermark_power(double delay_min_s, double delay_max_s, std::size_t trials, std::uint64_t seed,
                           double fit101_noise = 0.02, double mv101_jitter_s = 2.0, double trial_s = 1200.0, double alpha = 0.05);

// Features of each entropy device, chunked on-op times.
EntropyReport entropy_study(std::size_t cycles, std::uint64_t seed, int bins = 10);

}  // namespace tcfp
