#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tcfp/classify.hpp"

using namespace tcfp;
using tcfp::test::error_code;

namespace {

struct Data {
  Matrix X;
  std::vector<std::string> y;
};

// Well separated gaussian blobs in 8 dims, one per class.
Data blobs(int classes, int per_class, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, spread);
  Data d;
  d.X.resize(classes * per_class, 8);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      for (int j = 0; j < 8; ++j) d.X(r, j) = 5.0 * ((c >> (j % 2)) & 1) + 3.0 * c * (j == 2) + n(rng);
      d.y.push_back("c" + std::to_string(c));
    }
  }
  return d;
}

Data xor_data() {
  Data d;
  d.X.resize(8, 2);
  const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  for (int r = 0; r < 8; ++r) {
    d.X(r, 0) = pts[r % 4][0] + (r >= 4 ? 0.05 : 0.0);
    d.X(r, 1) = pts[r % 4][1] - (r >= 4 ? 0.05 : 0.0);
    d.y.push_back(r % 4 < 2 ? "same" : "diff");
  }
  return d;
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("1-D separable classes with the linear kernel") {
    Matrix X(6, 1);
    X << -1.0, -1.1, -0.9, 1.0, 1.1, 0.9;
    const std::vector<std::string> y{"neg", "neg", "neg", "pos", "pos", "pos"};
    TrainConfig cfg;
    cfg.kernel = Kernel::linear;
    const auto m = train(X, y, cfg);
    CHECK(accuracy(m, X, y) == 1.0);
    Vector x(1);
    x << -1.0;
    CHECK(predict(m, x) == "neg");
  }

  TEST_CASE("XOR needs a nonlinear kernel") {
    const auto d = xor_data();
    TrainConfig cfg;
    cfg.kernel = Kernel::linear;
    CHECK(accuracy(train(d.X, d.y, cfg), d.X, d.y) <= 0.75);
    cfg.kernel = Kernel::rbf;
    cfg.gamma = 2.0;
    CHECK(accuracy(train(d.X, d.y, cfg), d.X, d.y) == 1.0);
  }

  TEST_CASE("four separated clusters give 100% cross-validated accuracy") {
    const auto d = blobs(4, 25, 0.3, 3);
    TrainConfig cfg;
    for (auto k : {Kernel::linear, Kernel::polynomial}) {
      cfg.kernel = k;
      const auto r = cross_validate(d.X, d.y, 5, cfg);
      CHECK(r.fold_accuracy.size() == 5);
      CHECK(r.accuracy == 1.0);
    }
  }

  TEST_CASE("all-zero decision values tie to class 0") {
    SvmModel m;
    m.kernel = Kernel::linear;
    m.classes = {"a", "b", "c"};
    m.input_dim = 2;
    m.kept = {0, 1};
    m.mean = Vector::Zero(2);
    m.scale = Vector::Ones(2);
    m.support = Matrix::Zero(1, 2);
    m.coef = Matrix::Zero(3, 1);
    CHECK(predict(m, Vector::Ones(2)) == "a");
  }

  TEST_CASE("predictions survive positive rescaling of decision values") {
    const auto d = blobs(3, 12, 1.5, 8);
    auto m = train(d.X, d.y);
    std::vector<std::string> before;
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) before.push_back(predict(m, d.X.row(i).transpose()));
    m.coef *= 3.7;
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) CHECK(predict(m, d.X.row(i).transpose()) == before[i]);
  }

  TEST_CASE("shuffled labels score near chance") {
    auto d = blobs(4, 30, 0.5, 4);
    std::mt19937_64 rng(11);
    std::shuffle(d.y.begin(), d.y.end(), rng);
    const auto r = cross_validate(d.X, d.y, 5);
    CHECK(std::abs(r.accuracy - 0.25) <= 0.15);
  }

  TEST_CASE("identical samples across classes are indistinguishable") {
    Data d;
    d.X = Matrix::Constant(20, 8, 1.5);
    for (int i = 0; i < 20; ++i) d.y.push_back(i % 2 ? "x" : "y");
    const auto r = cross_validate(d.X, d.y, 5);
    CHECK(r.accuracy <= 0.5 + 1e-12);
  }

  TEST_CASE("error cases") {
    Matrix X(4, 1);
    X << 0, 1, 2, 3;
    CHECK(error_code([&] { train(X, {"a", "a", "a", "a"}); }) == Errc::DegenerateLabels);
    CHECK(error_code([&] { train(X, {"a", "a", "a", "b"}); }) == Errc::DegenerateLabels);
    CHECK(error_code([&] { train(X, {"a", "b"}); }) == Errc::LengthError);
    Matrix bad = X;
    bad(1, 0) = std::nan("");
    CHECK(error_code([&] { train(bad, {"a", "a", "b", "b"}); }) == Errc::BadInput);
    CHECK(error_code([&] { cross_validate(X, {"a", "a", "b", "b"}, 3); }) == Errc::StratifyError);
    CHECK(error_code([] { parse_kernel("cubic"); }) == Errc::ConfigError);
    CHECK(parse_kernel("poly") == Kernel::polynomial);
    const auto m = train(X, {"a", "a", "b", "b"});
    CHECK(error_code([&] { predict(m, Vector::Zero(2)); }) == Errc::BadInput);
  }

  TEST_CASE("same seed, same accuracy") {
    const auto d = blobs(3, 15, 2.0, 5);
    TrainConfig cfg;
    cfg.seed = 42;
    const auto a = cross_validate(d.X, d.y, 5, cfg);
    const auto b = cross_validate(d.X, d.y, 5, cfg);
    CHECK(a.fold_accuracy == b.fold_accuracy);
  }

  TEST_CASE("linear decision function is affine in the input") {
    const auto d = blobs(3, 10, 1.0, 6);
    TrainConfig cfg;
    cfg.kernel = Kernel::linear;
    const auto m = train(d.X, d.y, cfg);
    const Vector x1 = d.X.row(0).transpose(), x2 = d.X.row(25).transpose();
    for (double a : {-0.5, 0.3, 1.7}) {
      const Vector lhs = decision_values(m, a * x1 + (1 - a) * x2);
      const Vector rhs = a * decision_values(m, x1) + (1 - a) * decision_values(m, x2);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("kernel matrix symmetric, rbf in (0, 1]") {
    const auto d = blobs(2, 10, 1.0, 7);
    for (auto k : {Kernel::linear, Kernel::polynomial, Kernel::rbf, Kernel::sigmoid}) {
      TrainConfig cfg;
      cfg.kernel = k;
      const auto m = train(d.X, d.y, cfg);
      for (Eigen::Index i = 0; i < m.support.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.support.rows(); ++j) {
          const Vector a = m.support.row(i).transpose(), b = m.support.row(j).transpose();
          CHECK(kernel_value(m, a, b) == kernel_value(m, b, a));
          if (k == Kernel::rbf) {
            CHECK(kernel_value(m, a, b) > 0.0);
            CHECK(kernel_value(m, a, b) <= 1.0);
          }
        }
      }
      CHECK(m.coef.allFinite());
    }
  }

  TEST_CASE("zero-variance columns are dropped") {
    auto d = blobs(2, 10, 1.0, 9);
    d.X.col(5).setConstant(4.0);
    const auto m = train(d.X, d.y);
    CHECK(m.kept.size() == 7);
    CHECK(std::find(m.kept.begin(), m.kept.end(), 5) == m.kept.end());
  }

  TEST_CASE("model JSON round trip") {
    const auto d = blobs(3, 8, 1.0, 10);
    const auto m = train(d.X, d.y);
    const auto back = svm_from_json(svm_to_json(m));
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
      const Vector x = d.X.row(i).transpose();
      CHECK((decision_values(m, x) - decision_values(back, x)).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(error_code([] { svm_from_json("{\"kernel\": 1}"); }) == Errc::SchemaError);
  }
}
