#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcfp/lti.hpp"
#include "tcfp/timeseries.hpp"

namespace tcfp {

struct IdentConfig {
  int order = 4;
  int horizon = 20;  // Markov parameters H_1..H_q
  double ridge = 1e-8;
};

struct FitReport {
  std::vector<std::string> outputs;
  std::vector<double> nrmse;  // per output, mean-centered

  double best_fit_pct(std::size_t i) const { return 100.0 * (1.0 - nrmse.at(i)); }
};

// Channel values stacked per sample.
std::vector<Vector> channel_vectors(const Dataset& ds, const std::vector<std::string>& names);

// Markov parameters H_1..H_q (each m x p) from an ARX regression of order q.
// Exact for noise-free data from any model of order <= q.
std::vector<Matrix> markov_parameters(const std::vector<Vector>& u, const std::vector<Vector>& y, int horizon,
                                      double ridge, Vector* residual_std = nullptr);

// Ho-Kalman / ERA realization. Throws RankDeficient when the Hankel matrix
// has numerical rank below `order`.
StateSpaceModel realize(const std::vector<Matrix>& markov, int order);

// Warnings (e.g. constant inputs) are appended when `warnings` is non-null.
StateSpaceModel identify(const Dataset& ds, const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs, const IdentConfig& cfg,
                         std::vector<std::string>* warnings = nullptr);

// Least-squares initial state from the first few samples, assuming the
// model is exact.
Vector estimate_initial_state(const StateSpaceModel& model, const std::vector<Vector>& u,
                              const std::vector<Vector>& y);

// Predicted output sequence: open loop without a gain, one-step-ahead with one.
std::vector<Vector> predict_outputs(const StateSpaceModel& model, const std::vector<Vector>& u,
                                    const std::vector<Vector>& y, const std::optional<KalmanGain>& gain);

FitReport validate(const StateSpaceModel& model, const Dataset& ds, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs, const std::optional<KalmanGain>& gain = std::nullopt);

// One-step predictor gain for an identified model: Q = q I with q chosen on a
// log grid to minimise the one-step prediction error on ds, R from the
// model's sensor noise.
KalmanGain fit_observer_gain(const StateSpaceModel& model, const Dataset& ds, const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs);

// Training part first, held-out tail (final 30% by default) second.
std::pair<Dataset, Dataset> holdout_split(const Dataset& ds, double train_fraction = 0.7);

}  // namespace tcfp
