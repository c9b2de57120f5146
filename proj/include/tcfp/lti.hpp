#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tcfp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// x_{k+1} = A x_k + B u_k + v_k,  y_k = C x_k + eta_k
// with v, eta zero-mean Gaussian and diagonal covariance.
struct StateSpaceModel {
  Matrix A, B, C;
  Vector process_noise_std;  // length n
  Vector sensor_noise_std;   // length m

  Eigen::Index n_states() const noexcept { return A.rows(); }
  Eigen::Index p_inputs() const noexcept { return B.cols(); }
  Eigen::Index m_outputs() const noexcept { return C.rows(); }

  // Throws DimError.
  void validate() const;
};

struct KalmanGain {
  Matrix L;  // n x m
};

struct StepResult {
  Vector x_next;
  Vector y;
};

struct EstimateStep {
  Vector x_hat_next;
  Vector y_hat;
};

// Noise is drawn only when rng is non-null.
StepResult step(const StateSpaceModel& model, const Vector& x, const Vector& u, Rng* rng = nullptr);

EstimateStep kf_step(const StateSpaceModel& model, const KalmanGain& gain, const Vector& x_hat, const Vector& u,
                     const Vector& y);

struct RiccatiOptions {
  double tolerance = 1e-9;
  int max_iterations = 100000;
};

// Predictor-form steady-state gain from the discrete Riccati recursion
//   P <- A P A' + Q - A P C' (C P C' + R)^-1 C P A',  L = A P C' (C P C' + R)^-1.
KalmanGain steady_state_gain(const StateSpaceModel& model, const Matrix& Q, const Matrix& R,
                             const RiccatiOptions& opts = {});

// y_{k+1} = C A x_k + C v_k + eta_{k+1} + C B u_{k - dk}
Vector delayed_output(const StateSpaceModel& model, const Vector& x_k, const Vector& u_delayed, Rng* rng = nullptr);

// Runs the defender's estimator with the watermarked (delayed) inputs against
// the outputs reported by the plant (or by an attacker) and returns
// r_k = y_k - C x_hat_k for every sample.
std::vector<Vector> watermark_residual(const StateSpaceModel& model, const KalmanGain& gain,
                                       const std::vector<Vector>& reported_outputs,
                                       const std::vector<Vector>& watermarked_inputs,
                                       const std::optional<Vector>& x_hat0 = std::nullopt);

double spectral_radius(const Matrix& M);

// Stage-1 four-state model (inputs MV101, P101, P102; outputs FIT101, LIT101)
// with its published estimator gain.
StateSpaceModel stage1_four_state_model();
KalmanGain stage1_four_state_gain();

// Row-major JSON document {n, p, m, A, B, C, process_noise_std, sensor_noise_std, L?}.
std::string model_to_json(const StateSpaceModel& model, const std::optional<KalmanGain>& gain = std::nullopt);
StateSpaceModel model_from_json(const std::string& text, std::optional<KalmanGain>* gain = nullptr);

}  // namespace tcfp
