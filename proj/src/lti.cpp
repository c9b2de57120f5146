#include "tcfp/lti.hpp"

#include <cmath>
#include <json.hpp>

#include "tcfp/error.hpp"

namespace tcfp {

namespace {

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

Vector gaussian(const Vector& stds, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector out(stds.size());
  for (Eigen::Index i = 0; i < stds.size(); ++i) out(i) = stds(i) * nd(rng);
  return out;
}

void check_vec(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    fail(Errc::DimError, std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                             std::to_string(expected));
  }
}

}  // namespace

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) fail(Errc::DimError, "A must be square and non-empty, got " + dims(A));
  if (B.rows() != n || B.cols() == 0) fail(Errc::DimError, "B is " + dims(B) + ", expected " + std::to_string(n) + "xp");
  if (C.cols() != n || C.rows() == 0) fail(Errc::DimError, "C is " + dims(C) + ", expected mx" + std::to_string(n));
  check_vec(process_noise_std, n, "process_noise_std");
  check_vec(sensor_noise_std, C.rows(), "sensor_noise_std");
  if ((process_noise_std.array() < 0).any() || (sensor_noise_std.array() < 0).any()) {
    fail(Errc::DimError, "noise standard deviations must be non-negative");
  }
}

StepResult step(const StateSpaceModel& model, const Vector& x, const Vector& u, Rng* rng) {
  check_vec(x, model.n_states(), "x");
  check_vec(u, model.p_inputs(), "u");
  StepResult r{model.A * x + model.B * u, model.C * x};
  if (rng != nullptr) {
    r.x_next += gaussian(model.process_noise_std, *rng);
    r.y += gaussian(model.sensor_noise_std, *rng);
  }
  return r;
}

EstimateStep kf_step(const StateSpaceModel& model, const KalmanGain& gain, const Vector& x_hat, const Vector& u,
                     const Vector& y) {
  check_vec(x_hat, model.n_states(), "x_hat");
  check_vec(u, model.p_inputs(), "u");
  check_vec(y, model.m_outputs(), "y");
  if (gain.L.rows() != model.n_states() || gain.L.cols() != model.m_outputs()) {
    fail(Errc::DimError, "gain L is " + dims(gain.L));
  }
  EstimateStep e;
  e.y_hat = model.C * x_hat;
  e.x_hat_next = model.A * x_hat + model.B * u + gain.L * (y - e.y_hat);
  return e;
}

KalmanGain steady_state_gain(const StateSpaceModel& model, const Matrix& Q, const Matrix& R,
                             const RiccatiOptions& opts) {
  const auto n = model.n_states();
  const auto m = model.m_outputs();
  if (Q.rows() != n || Q.cols() != n) fail(Errc::DimError, "Q is " + dims(Q));
  if (R.rows() != m || R.cols() != m) fail(Errc::DimError, "R is " + dims(R));

  const Matrix& A = model.A;
  const Matrix& C = model.C;
  Matrix P = Q;
  Matrix L = Matrix::Zero(n, m);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Matrix S = C * P * C.transpose() + R;
    Eigen::FullPivLU<Matrix> lu(S);
    if (!lu.isInvertible()) fail(Errc::SingularCov, "innovation covariance is singular");
    L = A * P * C.transpose() * lu.inverse();
    Matrix next = A * P * A.transpose() + Q - L * C * P * A.transpose();
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e150) {
      fail(Errc::RiccatiDiverged, "Riccati recursion diverged after " + std::to_string(it) + " iterations");
    }
    const double delta = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (delta < opts.tolerance) {
      const Matrix S_final = C * P * C.transpose() + R;
      return KalmanGain{A * P * C.transpose() * S_final.inverse()};
    }
  }
  fail(Errc::RiccatiDiverged, "no fixed point within " + std::to_string(opts.max_iterations) + " iterations");
}

Vector delayed_output(const StateSpaceModel& model, const Vector& x_k, const Vector& u_delayed, Rng* rng) {
  check_vec(x_k, model.n_states(), "x_k");
  check_vec(u_delayed, model.p_inputs(), "u_delayed");
  Vector y = model.C * (model.A * x_k) + model.C * (model.B * u_delayed);
  if (rng != nullptr) {
    y += model.C * gaussian(model.process_noise_std, *rng);
    y += gaussian(model.sensor_noise_std, *rng);
  }
  return y;
}

std::vector<Vector> watermark_residual(const StateSpaceModel& model, const KalmanGain& gain,
                                       const std::vector<Vector>& reported_outputs,
                                       const std::vector<Vector>& watermarked_inputs,
                                       const std::optional<Vector>& x_hat0) {
  if (reported_outputs.size() != watermarked_inputs.size()) {
    fail(Errc::LengthError, "trace has " + std::to_string(reported_outputs.size()) + " outputs but " +
                                std::to_string(watermarked_inputs.size()) + " watermarked inputs");
  }
  Vector x_hat = x_hat0.value_or(Vector::Zero(model.n_states()));
  std::vector<Vector> r;
  r.reserve(reported_outputs.size());
  for (std::size_t k = 0; k < reported_outputs.size(); ++k) {
    auto e = kf_step(model, gain, x_hat, watermarked_inputs[k], reported_outputs[k]);
    r.push_back(reported_outputs[k] - e.y_hat);
    x_hat = std::move(e.x_hat_next);
  }
  return r;
}

double spectral_radius(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

StateSpaceModel stage1_four_state_model() {
  StateSpaceModel m;
  m.A.resize(4, 4);
  m.A << 1.0000, 0.0008, -0.0003, 0.0031,
        -0.0026, 0.9782, 0.1173, -0.0037,
        -0.0057, -0.0614, 0.7645, 0.3523,
        -0.0091, 0.0030, -0.0417, 0.8197;
  m.B.resize(4, 3);
  m.B << 0.0000, 0.0000, -0.0000,
        -0.0003, 0.0001, 0.0000,
         0.0009, -0.0007, 0.0001,
        -0.0010, 0.0004, 0.0002;
  m.C.resize(2, 4);
  m.C << 0.0018, -0.0128, -0.0006, -0.0001,
        -2.9695, -0.0029, 0.0002, -0.0028;
  m.C *= 1.0e4;
  // Not published with the matrices; small values chosen for test rollouts.
  m.process_noise_std = Vector::Constant(4, 1e-6);
  m.sensor_noise_std = Vector::Constant(2, 1e-3);
  return m;
}

KalmanGain stage1_four_state_gain() {
  Matrix L(4, 2);
  L << -0.0001, -0.0000,
       -0.0073, -0.0001,
       -0.0282, 0.0010,
       -0.0038, -0.0020;
  return KalmanGain{L};
}

namespace {

nlohmann::json rows(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    out.push_back(std::move(r));
  }
  return out;
}

Matrix from_rows(const nlohmann::json& j, Eigen::Index r, Eigen::Index c, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != r) fail(Errc::DimError, std::string(what) + " has wrong row count");
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      fail(Errc::DimError, std::string(what) + " has wrong column count");
    }
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Vector from_list(const nlohmann::json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) fail(Errc::DimError, std::string(what) + " has wrong length");
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const StateSpaceModel& model, const std::optional<KalmanGain>& gain) {
  model.validate();
  nlohmann::json j;
  j["n"] = model.n_states();
  j["p"] = model.p_inputs();
  j["m"] = model.m_outputs();
  j["A"] = rows(model.A);
  j["B"] = rows(model.B);
  j["C"] = rows(model.C);
  j["process_noise_std"] = std::vector<double>(model.process_noise_std.data(),
                                               model.process_noise_std.data() + model.process_noise_std.size());
  j["sensor_noise_std"] = std::vector<double>(model.sensor_noise_std.data(),
                                              model.sensor_noise_std.data() + model.sensor_noise_std.size());
  if (gain) j["L"] = rows(gain->L);
  return j.dump(2);
}

StateSpaceModel model_from_json(const std::string& text, std::optional<KalmanGain>* gain) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadInput, std::string("model document: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto p = j.at("p").get<Eigen::Index>();
    const auto m = j.at("m").get<Eigen::Index>();
    StateSpaceModel model;
    model.A = from_rows(j.at("A"), n, n, "A");
    model.B = from_rows(j.at("B"), n, p, "B");
    model.C = from_rows(j.at("C"), m, n, "C");
    model.process_noise_std = j.contains("process_noise_std") ? from_list(j["process_noise_std"], n, "process_noise_std")
                                                              : Vector::Zero(n);
    model.sensor_noise_std = j.contains("sensor_noise_std") ? from_list(j["sensor_noise_std"], m, "sensor_noise_std")
                                                            : Vector::Zero(m);
    model.validate();
    if (gain != nullptr) {
      if (j.contains("L"))
        *gain = KalmanGain{from_rows(j["L"], n, m, "L")};
      else
        gain->reset();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadInput, std::string("model document: ") + e.what());
  }
}

}  // namespace tcfp
