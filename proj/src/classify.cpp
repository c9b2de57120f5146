#include "tcfp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numeric>

#include "tcfp/error.hpp"

namespace tcfp {

std::string kernel_name(Kernel k) {
  switch (k) {
    case Kernel::linear: return "linear";
    case Kernel::polynomial: return "polynomial";
    case Kernel::rbf: return "rbf";
    case Kernel::sigmoid: return "sigmoid";
  }
  return "?";
}

Kernel parse_kernel(const std::string& s) {
  for (auto k : {Kernel::linear, Kernel::polynomial, Kernel::rbf, Kernel::sigmoid}) {
    if (kernel_name(k) == s) return k;
  }
  if (s == "poly") return Kernel::polynomial;
  fail(Errc::ConfigError, "unknown kernel '" + s + "'");
}

double kernel_value(const SvmModel& m, const Vector& a, const Vector& b) {
  switch (m.kernel) {
    case Kernel::linear: return a.dot(b);
    case Kernel::polynomial: return std::pow(m.gamma * a.dot(b) + m.coef0, m.degree);
    case Kernel::rbf: return std::exp(-m.gamma * (a - b).squaredNorm());
    case Kernel::sigmoid: return std::tanh(m.gamma * a.dot(b) + m.coef0);
  }
  return 0.0;
}

namespace {

void check_finite(const Matrix& X) {
  if (!X.allFinite()) fail(Errc::BadInput, "non-finite feature value");
}

Vector normalize(const SvmModel& m, const Vector& x) {
  Vector z(static_cast<Eigen::Index>(m.kept.size()));
  for (std::size_t j = 0; j < m.kept.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(m.kept[j]);
    z(static_cast<Eigen::Index>(j)) = (x(c) - m.mean(c)) / m.scale(c);
  }
  return z;
}

}  // namespace

SvmModel train(const Matrix& X, const std::vector<std::string>& labels, const TrainConfig& cfg) {
  if (static_cast<std::size_t>(X.rows()) != labels.size()) fail(Errc::LengthError, "one label per sample row");
  if (cfg.epochs < 1 || !(cfg.lambda > 0.0)) fail(Errc::ConfigError, "epochs and lambda must be positive");
  check_finite(X);
  SvmModel m;
  m.kernel = cfg.kernel;
  m.degree = cfg.degree;
  m.input_dim = static_cast<std::size_t>(X.cols());
  std::map<std::string, std::size_t> count;
  for (const auto& l : labels) ++count[l];
  if (count.size() < 2) fail(Errc::DegenerateLabels, "training needs at least two classes");
  for (const auto& [name, n] : count) {
    if (n < 2) fail(Errc::DegenerateLabels, "class '" + name + "' has a single sample");
    m.classes.push_back(name);
  }

  const auto n = X.rows();
  m.mean = X.colwise().mean().transpose();
  m.scale = Vector::Ones(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - m.mean(c)).square().sum() / static_cast<double>(std::max<Eigen::Index>(1, n - 1));
    if (var > 0.0) {
      m.scale(c) = std::sqrt(var);
      m.kept.push_back(static_cast<int>(c));
    }
  }
  const double d = std::max<double>(1.0, static_cast<double>(m.kept.size()));
  m.gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / d;
  m.coef0 = cfg.coef0 >= 0.0 ? cfg.coef0 : (cfg.kernel == Kernel::polynomial ? 1.0 : 0.0);

  m.support.resize(n, static_cast<Eigen::Index>(m.kept.size()));
  for (Eigen::Index i = 0; i < n; ++i) m.support.row(i) = normalize(m, X.row(i).transpose()).transpose();

  // Gram matrix plus a constant 1 for the bias term.
  Matrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      G(i, j) = G(j, i) = kernel_value(m, m.support.row(i).transpose(), m.support.row(j).transpose()) + 1.0;
    }
  }

  const auto C = static_cast<Eigen::Index>(m.classes.size());
  m.coef = Matrix::Zero(C, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index c = 0; c < C; ++c) {
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] == m.classes[static_cast<std::size_t>(c)] ? 1.0 : -1.0;
    Vector alpha = Vector::Zero(n);
    Vector ay = Vector::Zero(n);  // alpha .* y, kept in step
    Rng rng(cfg.seed + static_cast<std::uint64_t>(c));
    std::size_t t = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        ++t;
        const double f = G.row(i).dot(ay) / (cfg.lambda * static_cast<double>(t));
        if (y(i) * f < 1.0) {
          alpha(i) += 1.0;
          ay(i) += y(i);
        }
      }
    }
    m.coef.row(c) = (ay / (cfg.lambda * static_cast<double>(t))).transpose();
  }
  return m;
}

Vector decision_values(const SvmModel& m, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != m.input_dim) fail(Errc::BadInput, "feature count differs from training");
  if (!x.allFinite()) fail(Errc::BadInput, "non-finite feature value");
  const Vector z = normalize(m, x);
  Vector k(m.support.rows());
  for (Eigen::Index i = 0; i < m.support.rows(); ++i) k(i) = kernel_value(m, m.support.row(i).transpose(), z) + 1.0;
  return m.coef * k;
}

std::string predict(const SvmModel& m, const Vector& x) {
  const Vector v = decision_values(m, x);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < v.size(); ++c) {
    if (v(c) > v(best)) best = c;
  }
  return m.classes[static_cast<std::size_t>(best)];
}

double accuracy(const SvmModel& m, const Matrix& X, const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(X.rows()) != labels.size()) fail(Errc::LengthError, "one label per sample row");
  if (labels.empty()) return 0.0;
  std::size_t ok = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) ok += predict(m, X.row(i).transpose()) == labels[static_cast<std::size_t>(i)];
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

Matrix feature_matrix(const std::vector<FeatureVector>& rows) {
  Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(FeatureVector::size));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto a = rows[i].as_array();
    for (std::size_t j = 0; j < a.size(); ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[j];
  }
  return X;
}

CvResult cross_validate(const Matrix& X, const std::vector<std::string>& labels, int folds, const TrainConfig& cfg) {
  if (folds < 2) fail(Errc::ConfigError, "folds must be at least 2");
  if (static_cast<std::size_t>(X.rows()) != labels.size()) fail(Errc::LengthError, "one label per sample row");
  std::map<std::string, std::vector<Eigen::Index>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<Eigen::Index>(i));
  if (by_class.size() < 2) fail(Errc::DegenerateLabels, "cross-validation needs at least two classes");
  std::vector<int> fold_of(labels.size());
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& [name, idx] : by_class) {
    if (idx.size() < static_cast<std::size_t>(folds)) {
      fail(Errc::StratifyError, "class '" + name + "' has fewer samples than folds");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) fold_of[static_cast<std::size_t>(idx[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  CvResult r;
  r.kernel = cfg.kernel;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    Matrix Xtr(static_cast<Eigen::Index>(tr.size()), X.cols()), Xte(static_cast<Eigen::Index>(te.size()), X.cols());
    std::vector<std::string> ytr, yte;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
      ytr.push_back(labels[static_cast<std::size_t>(tr[i])]);
    }
    for (std::size_t i = 0; i < te.size(); ++i) {
      Xte.row(static_cast<Eigen::Index>(i)) = X.row(te[i]);
      yte.push_back(labels[static_cast<std::size_t>(te[i])]);
    }
    r.fold_accuracy.push_back(accuracy(train(Xtr, ytr, cfg), Xte, yte));
  }
  r.accuracy = std::accumulate(r.fold_accuracy.begin(), r.fold_accuracy.end(), 0.0) / folds;
  return r;
}

std::vector<CvResult> cross_validate_kernels(const Matrix& X, const std::vector<std::string>& labels, int folds,
                                             TrainConfig cfg) {
  std::vector<CvResult> out;
  for (auto k : {Kernel::linear, Kernel::polynomial, Kernel::rbf, Kernel::sigmoid}) {
    cfg.kernel = k;
    out.push_back(cross_validate(X, labels, folds, cfg));
  }
  return out;
}

namespace {

nlohmann::json mat_rows(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    out.push_back(r);
  }
  return out;
}

Matrix mat_from(const nlohmann::json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != static_cast<std::size_t>(cols)) fail(Errc::SchemaError, "ragged matrix in model document");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), c) = j[i][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string svm_to_json(const SvmModel& m) {
  nlohmann::json j;
  j["kernel"] = kernel_name(m.kernel);
  j["gamma"] = m.gamma;
  j["coef0"] = m.coef0;
  j["degree"] = m.degree;
  j["classes"] = m.classes;
  j["kept"] = m.kept;
  j["input_dim"] = m.input_dim;
  j["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
  j["scale"] = std::vector<double>(m.scale.data(), m.scale.data() + m.scale.size());
  j["support"] = mat_rows(m.support);
  j["coef"] = mat_rows(m.coef);
  return j.dump();
}

SvmModel svm_from_json(const std::string& text) {
  SvmModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.kernel = parse_kernel(j.at("kernel").get<std::string>());
    m.gamma = j.at("gamma").get<double>();
    m.coef0 = j.at("coef0").get<double>();
    m.degree = j.at("degree").get<int>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.kept = j.at("kept").get<std::vector<int>>();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto scale = j.at("scale").get<std::vector<double>>();
    if (mean.size() != m.input_dim || scale.size() != m.input_dim) fail(Errc::SchemaError, "normalization size");
    m.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.scale = Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
    m.support = mat_from(j.at("support"), static_cast<Eigen::Index>(m.kept.size()));
    m.coef = mat_from(j.at("coef"), m.support.rows());
    if (static_cast<std::size_t>(m.coef.rows()) != m.classes.size()) fail(Errc::SchemaError, "one coefficient row per class");
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, std::string("model document: ") + e.what());
  }
  return m;
}

}  // namespace tcfp
