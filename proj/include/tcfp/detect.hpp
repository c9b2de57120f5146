#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcfp/fingerprint.hpp"
#include "tcfp/plantsim.hpp"

namespace tcfp {

struct CusumParams {
  double mu = 0.0;
  double beta = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;
};

struct CusumState {
  double s_plus = 0.0;
  double s_minus = 0.0;
  std::size_t i = 0;
};

struct CusumStep {
  CusumState state;
  double d_plus = 0.0;
  double d_minus = 0.0;
  bool alarm_plus = false;
  bool alarm_minus = false;
};

// One iteration of the two-sided rule with reset on alarm. Throws BadInput on
// a non-finite or negative transition time.
CusumStep cusum_step(const CusumState& s, const CusumParams& p, double t);

// mu = mean, beta = sample std / 2; thresholds left at 0. Needs 5 samples.
CusumParams fit_cusum_params(const std::vector<double>& times);

// Alarm rate per direction when `times` are streamed through cusum_step.
std::pair<double, double> alarm_rates(const std::vector<double>& times, const CusumParams& p);

// Smallest-magnitude thresholds whose training alarm rate is <= max_far in
// each direction (40-step bisection). Needs 20 samples.
CusumParams tune_thresholds(const std::vector<double>& times, CusumParams p, double max_far = 0.02);

enum class AlarmKind { cusum_plus, cusum_minus, incomplete, timed_out };
std::string alarm_kind_name(AlarmKind k);

struct Pairing {
  std::string actuator;
  std::string sensor;
  SensorThresholds thresholds;  // fixed from training data
};

using PairKey = std::pair<std::string, Op>;
using ParamTable = std::map<PairKey, CusumParams>;

struct Alarm {
  std::string actuator;
  std::string sensor;
  Op op = Op::on;
  AlarmKind kind = AlarmKind::cusum_plus;
  std::size_t iteration = 0;     // index among this pair's operations
  std::size_t change_start = 0;  // last iteration whose CUSUM was set to 0
  std::size_t sample_start = 0;  // operation window in samples
  std::size_t sample_end = 0;
};

struct AlarmLog {
  std::vector<Alarm> alarms;
  std::map<PairKey, std::size_t> operations;  // every extracted event
  std::size_t incomplete = 0;
  std::size_t timed_out = 0;
};

// Throws ConfigError when a pairing's actuator lacks params for either op.
AlarmLog run_detector(const Dataset& ds, const std::vector<Pairing>& pairings, const ParamTable& params,
                      double timeout_s = 120.0);

// Fits mu/beta and tunes thresholds from attack-free traces, per (actuator, op).
ParamTable train_detector(const std::vector<Dataset>& clean, const std::vector<Pairing>& pairings,
                          double timeout_s = 120.0, double max_far = 0.02);

struct DetectionRow {
  AttackType type = AttackType::A1;
  std::size_t performed = 0;
  double overall = 0.0;  // percent; union of all alarm kinds
  double cusum = 0.0;
  double incomplete = 0.0;
  double timed_out = 0.0;
};

struct DetectionCase {
  AttackRecord attack;
  const AlarmLog* log = nullptr;
};

// Attacks without an active window are not counted as performed. An alarm
// matches when its pair touches a target and its window meets
// [active_start, active_end + grace_s].
std::vector<DetectionRow> detection_report(const std::vector<DetectionCase>& cases, double sample_period_s,
                                           double grace_s = 120.0);

// Alarms per operation, per (actuator, op).
std::map<PairKey, double> false_alarm_rates(const AlarmLog& log);

std::string params_to_json(const ParamTable& t);
ParamTable params_from_json(const std::string& text);

}  // namespace tcfp
