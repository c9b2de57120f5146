#include "tcfp/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcfp/error.hpp"

namespace tcfp {

std::vector<Vector> channel_vectors(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<const TimeSeries*> cols;
  for (const auto& n : names) cols.push_back(&ds.channel(n));
  std::vector<Vector> out(ds.length(), Vector(static_cast<Eigen::Index>(names.size())));
  for (std::size_t k = 0; k < ds.length(); ++k) {
    for (std::size_t j = 0; j < cols.size(); ++j) out[k](static_cast<Eigen::Index>(j)) = cols[j]->values[k];
  }
  return out;
}

std::vector<Matrix> markov_parameters(const std::vector<Vector>& u, const std::vector<Vector>& y, int horizon,
                                      double ridge, Vector* residual_std) {
  if (u.size() != y.size()) fail(Errc::LengthError, "input and output traces differ in length");
  if (horizon < 1) fail(Errc::ConfigError, "horizon must be >= 1");
  if (u.empty()) fail(Errc::InsufficientData, "empty trace");
  const auto q = static_cast<std::size_t>(horizon);
  const Eigen::Index p = u.front().size();
  const Eigen::Index m = y.front().size();
  if (u.size() <= q + 1) fail(Errc::InsufficientData, "trace shorter than the horizon");

  const auto rows = static_cast<Eigen::Index>(u.size() - q);
  const Eigen::Index d = static_cast<Eigen::Index>(q) * (m + p);
  Matrix phi(rows, d);
  Matrix target(rows, m);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t k = q + static_cast<std::size_t>(r);
    for (std::size_t i = 1; i <= q; ++i) {
      phi.block(r, static_cast<Eigen::Index>(i - 1) * m, 1, m) = y[k - i].transpose();
      phi.block(r, static_cast<Eigen::Index>(q) * m + static_cast<Eigen::Index>(i - 1) * p, 1, p) =
          u[k - i].transpose();
    }
    target.row(r) = y[k].transpose();
  }

  // Unit-RMS columns so the ridge weight means the same thing for every regressor.
  Vector scale = (phi.colwise().squaredNorm() / static_cast<double>(rows)).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  Matrix aug = Matrix::Zero(rows + d, d);
  aug.topRows(rows) = phi * scale.cwiseInverse().asDiagonal();
  aug.bottomRows(d) = Matrix::Identity(d, d) * std::sqrt(ridge);
  Matrix rhs = Matrix::Zero(rows + d, m);
  rhs.topRows(rows) = target;
  Matrix theta = aug.colPivHouseholderQr().solve(rhs);
  theta = scale.cwiseInverse().asDiagonal() * theta;

  if (residual_std != nullptr) {
    Matrix res = target - phi * theta;
    *residual_std = (res.colwise().squaredNorm() / static_cast<double>(rows)).cwiseSqrt().transpose();
  }

  std::vector<Matrix> alpha(q), beta(q);
  for (std::size_t i = 0; i < q; ++i) {
    alpha[i] = theta.block(static_cast<Eigen::Index>(i) * m, 0, m, m).transpose();
    beta[i] = theta.block(static_cast<Eigen::Index>(q) * m + static_cast<Eigen::Index>(i) * p, 0, p, m).transpose();
  }
  // h_k = beta_k + sum_{i<k} alpha_i h_{k-i}
  std::vector<Matrix> h(q);
  for (std::size_t k = 1; k <= q; ++k) {
    Matrix acc = beta[k - 1];
    for (std::size_t i = 1; i < k; ++i) acc += alpha[i - 1] * h[k - i - 1];
    h[k - 1] = std::move(acc);
  }
  return h;
}

StateSpaceModel realize(const std::vector<Matrix>& markov, int order) {
  if (order < 1) fail(Errc::ConfigError, "order must be >= 1");
  if (markov.size() < 2) fail(Errc::InsufficientData, "need at least two Markov parameters");
  const Eigen::Index m = markov.front().rows();
  const Eigen::Index p = markov.front().cols();
  // H0 holds H_1..H_{q-1}, the shifted H1 holds H_2..H_q.
  const std::size_t r = markov.size() / 2;
  const std::size_t s_used = markov.size() - r;

  const auto R = static_cast<Eigen::Index>(r);
  const auto S = static_cast<Eigen::Index>(s_used);
  Matrix H0(R * m, S * p), H1(R * m, S * p);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < s_used; ++j) {
      H0.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * p, m, p) = markov[i + j];
      H1.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * p, m, p) = markov[i + j + 1];
    }
  }

  Eigen::BDCSVD<Matrix> svd(H0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (smax > 0.0 && sv(i) > 1e-10 * smax) ++rank;
  }
  if (rank < order) {
    fail(Errc::RankDeficient, "Hankel matrix has numerical rank " + std::to_string(rank) + ", requested order " +
                                  std::to_string(order));
  }

  const Eigen::Index n = order;
  Matrix Un = svd.matrixU().leftCols(n);
  Matrix Vn = svd.matrixV().leftCols(n);
  Vector sq = sv.head(n).cwiseSqrt();
  Vector isq = sq.cwiseInverse();

  StateSpaceModel model;
  model.A = isq.asDiagonal() * Un.transpose() * H1 * Vn * isq.asDiagonal();
  Matrix obs = Un * sq.asDiagonal();
  Matrix ctrl = sq.asDiagonal() * Vn.transpose();
  model.B = ctrl.leftCols(p);
  model.C = obs.topRows(m);
  model.process_noise_std = Vector::Zero(n);
  model.sensor_noise_std = Vector::Zero(m);
  return model;
}

namespace {

Vector rms_scale(const std::vector<Vector>& v) {
  Vector acc = Vector::Zero(v.front().size());
  for (const auto& x : v) acc += x.cwiseAbs2();
  acc = (acc / static_cast<double>(v.size())).cwiseSqrt();
  for (Eigen::Index i = 0; i < acc.size(); ++i) {
    if (acc(i) == 0.0) acc(i) = 1.0;
  }
  return acc;
}

// Summed squared open-loop NRMSE over outputs.
double output_error(const StateSpaceModel& model, const std::vector<Vector>& u, const std::vector<Vector>& y) {
  auto y_hat = predict_outputs(model, u, y, std::nullopt);
  double total = 0.0;
  for (Eigen::Index j = 0; j < model.m_outputs(); ++j) {
    double ym = 0.0, pm = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      ym += y[k](j);
      pm += y_hat[k](j);
    }
    ym /= static_cast<double>(y.size());
    pm /= static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double a = y[k](j) - ym;
      const double b = y_hat[k](j) - pm;
      num += (a - b) * (a - b);
      den += a * a;
    }
    total += den > 0.0 ? num / den : num;
  }
  return total;
}

StateSpaceModel pad_states(const StateSpaceModel& m, int order) {
  const Eigen::Index k = m.n_states();
  const Eigen::Index n = order;
  if (k == n) return m;
  StateSpaceModel out;
  out.A = Matrix::Zero(n, n);
  out.A.topLeftCorner(k, k) = m.A;
  out.B = Matrix::Zero(n, m.p_inputs());
  out.B.topRows(k) = m.B;
  out.C = Matrix::Zero(m.m_outputs(), n);
  out.C.leftCols(k) = m.C;
  out.process_noise_std = Vector::Zero(n);
  out.sensor_noise_std = m.sensor_noise_std;
  return out;
}

}  // namespace

StateSpaceModel identify(const Dataset& ds, const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs, const IdentConfig& cfg,
                         std::vector<std::string>* warnings) {
  if (cfg.order < 1 || cfg.horizon < 2) fail(Errc::ConfigError, "order must be >= 1 and horizon >= 2");
  if (cfg.order > cfg.horizon) fail(Errc::ConfigError, "order exceeds horizon");
  if (cfg.ridge < 0.0) fail(Errc::ConfigError, "ridge must be non-negative");
  if (inputs.empty() || outputs.empty()) fail(Errc::ConfigError, "need at least one input and one output");
  if (static_cast<std::size_t>(cfg.horizon) * outputs.size() < static_cast<std::size_t>(cfg.order)) {
    fail(Errc::ConfigError, "horizon * outputs is below the requested order");
  }
  const std::size_t needed = (inputs.size() + 1) * static_cast<std::size_t>(cfg.horizon) + 10;
  if (ds.length() < needed) {
    fail(Errc::InsufficientData,
         std::to_string(ds.length()) + " samples, need at least " + std::to_string(needed));
  }
  if (warnings != nullptr) {
    for (const auto& name : inputs) {
      const auto& v = ds.channel(name).values;
      if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
        warnings->push_back("input " + name + " is constant; the identified model may be poorly excited");
      }
    }
  }
  auto u = channel_vectors(ds, inputs);
  auto y = channel_vectors(ds, outputs);
  // Unit-RMS channels keep small outputs from vanishing next to large ones in the SVD.
  const Vector su = rms_scale(u);
  const Vector sy = rms_scale(y);
  std::vector<Vector> un(u.size()), yn(y.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    un[k] = u[k].cwiseQuotient(su);
    yn[k] = y[k].cwiseQuotient(sy);
  }
  Vector resid;
  auto h = markov_parameters(un, yn, cfg.horizon, cfg.ridge, &resid);
  realize(h, cfg.order);  // rank check at the requested order

  // A truncated realization can fit worse than a smaller one (e.g. when the
  // cut splits a complex pair), so keep the best-fitting order <= cfg.order,
  // padded with decoupled silent states.
  StateSpaceModel best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int order = cfg.order; order >= 1; --order) {
    auto cand = realize(h, order);
    // a diverging candidate still beats having none
    double err = output_error(cand, un, yn);
    if (!std::isfinite(err)) err = std::numeric_limits<double>::max();
    if (err < best_err) {
      best_err = err;
      best = std::move(cand);
    }
  }
  StateSpaceModel model = pad_states(best, cfg.order);
  model.B = model.B * su.cwiseInverse().asDiagonal();
  model.C = sy.asDiagonal() * model.C;
  model.sensor_noise_std = resid.cwiseProduct(sy);
  return model;
}

Vector estimate_initial_state(const StateSpaceModel& model, const std::vector<Vector>& u,
                              const std::vector<Vector>& y) {
  const Eigen::Index n = model.n_states();
  const Eigen::Index m = model.m_outputs();
  const std::size_t K = std::min(y.size(), static_cast<std::size_t>(std::max<Eigen::Index>(10 * n, 100)));
  if (K == 0) return Vector::Zero(n);
  Matrix obs(static_cast<Eigen::Index>(K) * m, n);
  Vector rhs(static_cast<Eigen::Index>(K) * m);
  Vector x_forced = Vector::Zero(n);
  Matrix Ak = Matrix::Identity(n, n);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = static_cast<Eigen::Index>(k) * m;
    obs.middleRows(row, m) = model.C * Ak;
    rhs.segment(row, m) = y[k] - model.C * x_forced;
    x_forced = model.A * x_forced + model.B * u[k];
    Ak = model.A * Ak;
  }
  return obs.completeOrthogonalDecomposition().solve(rhs);
}

std::vector<Vector> predict_outputs(const StateSpaceModel& model, const std::vector<Vector>& u,
                                    const std::vector<Vector>& y, const std::optional<KalmanGain>& gain) {
  if (u.size() != y.size()) fail(Errc::LengthError, "input and output traces differ in length");
  model.validate();
  std::vector<Vector> out;
  out.reserve(y.size());
  Vector x = estimate_initial_state(model, u, y);
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (gain) {
      auto e = kf_step(model, *gain, x, u[k], y[k]);
      out.push_back(std::move(e.y_hat));
      x = std::move(e.x_hat_next);
    } else {
      auto s = step(model, x, u[k]);
      out.push_back(std::move(s.y));
      x = std::move(s.x_next);
    }
  }
  return out;
}

FitReport validate(const StateSpaceModel& model, const Dataset& ds, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs, const std::optional<KalmanGain>& gain) {
  if (static_cast<Eigen::Index>(inputs.size()) != model.p_inputs() ||
      static_cast<Eigen::Index>(outputs.size()) != model.m_outputs()) {
    fail(Errc::DimError, "channel lists do not match the model's input/output count");
  }
  auto u = channel_vectors(ds, inputs);
  auto y = channel_vectors(ds, outputs);
  auto y_hat = predict_outputs(model, u, y, gain);
  FitReport rep;
  rep.outputs = outputs;
  const auto N = static_cast<double>(y.size());
  for (Eigen::Index j = 0; j < model.m_outputs(); ++j) {
    double ym = 0.0, pm = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      ym += y[k](j);
      pm += y_hat[k](j);
    }
    ym /= N;
    pm /= N;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double a = y[k](j) - ym;
      const double b = y_hat[k](j) - pm;
      num += (a - b) * (a - b);
      den += a * a;
    }
    double v;
    if (den > 0.0)
      v = std::sqrt(num / den);
    else
      v = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    rep.nrmse.push_back(v);
  }
  return rep;
}

KalmanGain fit_observer_gain(const StateSpaceModel& model, const Dataset& ds, const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs) {
  model.validate();
  Vector r = model.sensor_noise_std.array().square();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) <= 0.0) r(i) = 1e-12;
  }
  const Matrix R = r.asDiagonal();
  const Eigen::Index n = model.n_states();
  std::optional<KalmanGain> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int e = -10; e <= 2; ++e) {
    KalmanGain g;
    try {
      g = steady_state_gain(model, Matrix::Identity(n, n) * std::pow(10.0, e), R);
    } catch (const Error&) {
      continue;
    }
    const auto rep = validate(model, ds, inputs, outputs, g);
    double err = 0.0;
    for (double v : rep.nrmse) err += v * v;
    if (err < best_err) {
      best_err = err;
      best = std::move(g);
    }
  }
  if (!best) fail(Errc::RiccatiDiverged, "no stable observer gain on the search grid");
  return *best;
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& ds, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(Errc::ConfigError, "train fraction must be in (0, 1)");
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(ds.length()) * train_fraction));
  if (cut == 0 || cut >= ds.length()) fail(Errc::InsufficientData, "dataset too short to split");
  return {window(ds, 0, cut), window(ds, cut, ds.length())};
}

}  // namespace tcfp
