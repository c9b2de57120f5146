#include <doctest.h>

#include <cmath>
#include <random>

#include "tcfp/error.hpp"
#include "tcfp/plantsim.hpp"
#include "tcfp/scenarios.hpp"
#include "tcfp/sysid.hpp"

using namespace tcfp;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::BadInput;
}

StateSpaceModel two_state_truth() {
  StateSpaceModel m;
  m.A.resize(2, 2);
  m.A << 0.9, 0.15, -0.15, 0.8;
  m.B.resize(2, 1);
  m.B << 1.0, 0.3;
  m.C.resize(1, 2);
  m.C << 1.0, -0.5;
  m.process_noise_std = Vector::Zero(2);
  m.sensor_noise_std = Vector::Zero(1);
  return m;
}

StateSpaceModel four_state_truth() {
  StateSpaceModel m;
  m.A = Matrix::Zero(4, 4);
  m.A(0, 0) = 0.95;
  m.A(1, 1) = 0.7;
  m.A(2, 2) = 0.5;
  m.A(2, 3) = 0.3;
  m.A(3, 2) = -0.3;
  m.A(3, 3) = 0.5;
  m.B.resize(4, 1);
  m.B << 1.0, 0.8, 0.6, 0.4;
  m.C.resize(1, 4);
  m.C << 1.0, 1.0, 1.0, 1.0;
  m.process_noise_std = Vector::Zero(4);
  m.sensor_noise_std = Vector::Zero(1);
  return m;
}

// Piecewise-constant binary inputs with random hold lengths.
std::vector<Vector> switching_inputs(std::size_t n, Eigen::Index p, std::uint64_t seed, int min_hold, int max_hold) {
  Rng rng(seed);
  std::uniform_int_distribution<int> hold(min_hold, max_hold);
  std::vector<Vector> u(n, Vector::Zero(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::size_t k = 0;
    double level = 0.0;
    while (k < n) {
      const auto len = static_cast<std::size_t>(hold(rng));
      for (std::size_t i = k; i < std::min(n, k + len); ++i) u[i](j) = level;
      k += len;
      level = 1.0 - level;
    }
  }
  return u;
}

Dataset rollout(const StateSpaceModel& m, const std::vector<Vector>& u, Rng* rng,
                const std::vector<std::string>& in_names, const std::vector<std::string>& out_names) {
  Dataset ds;
  for (const auto& n : in_names) ds.channels.push_back({n, ChannelKind::sensor, "", {}});
  for (const auto& n : out_names) ds.channels.push_back({n, ChannelKind::sensor, "", {}});
  Vector x = Vector::Zero(m.n_states());
  for (const auto& uk : u) {
    auto s = step(m, x, uk, rng);
    for (std::size_t j = 0; j < in_names.size(); ++j) ds.channels[j].values.push_back(uk(static_cast<Eigen::Index>(j)));
    for (std::size_t j = 0; j < out_names.size(); ++j) {
      ds.channels[in_names.size() + j].values.push_back(s.y(static_cast<Eigen::Index>(j)));
    }
    x = s.x_next;
  }
  return ds;
}

const std::vector<std::string> kU{"u"};
const std::vector<std::string> kY{"y"};

}  // namespace

TEST_SUITE("sysid") {
  TEST_CASE("noise-free two-state data is recovered to held-out precision") {
    auto truth = two_state_truth();
    auto ds = rollout(truth, switching_inputs(600, 1, 1, 1, 8), nullptr, kU, kY);
    auto [train, test] = holdout_split(ds);
    CHECK(test.length() == 180);
    auto model = identify(train, kU, kY, IdentConfig{2, 20, 1e-8});
    CHECK(model.n_states() == 2);
    auto rep = validate(model, test, kU, kY);
    CHECK(rep.nrmse[0] < 1e-6);
  }

  TEST_CASE("Markov parameters match C A^(k-1) B on exact data") {
    auto truth = four_state_truth();
    auto u = switching_inputs(500, 1, 3, 1, 6);
    auto ds = rollout(truth, u, nullptr, kU, kY);
    auto h = markov_parameters(channel_vectors(ds, kU), channel_vectors(ds, kY), 12, 1e-10);
    Matrix Ak = Matrix::Identity(4, 4);
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double expected = (truth.C * Ak * truth.B)(0, 0);
      CHECK(h[k](0, 0) == doctest::Approx(expected).epsilon(1e-6));
      Ak = truth.A * Ak;
    }
  }

  TEST_CASE("all-zero records have no realizable state") {
    Dataset ds;
    ds.channels = {{"u", ChannelKind::sensor, "", std::vector<double>(200, 0.0)},
                   {"y", ChannelKind::sensor, "", std::vector<double>(200, 0.0)}};
    std::vector<std::string> warnings;
    CHECK(code_of([&] { identify(ds, kU, kY, IdentConfig{2, 20, 1e-8}, &warnings); }) == Errc::RankDeficient);
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("short records and bad configs are refused") {
    auto ds = rollout(two_state_truth(), switching_inputs(49, 1, 1, 1, 5), nullptr, kU, kY);
    CHECK(code_of([&] { identify(ds, kU, kY, IdentConfig{2, 20, 1e-8}); }) == Errc::InsufficientData);
    CHECK(code_of([&] { identify(ds, kU, kY, IdentConfig{30, 20, 1e-8}); }) == Errc::ConfigError);
  }

  TEST_CASE("validation definitions") {
    auto truth = four_state_truth();
    auto ds = rollout(truth, switching_inputs(400, 1, 5, 2, 10), nullptr, kU, kY);
    CHECK(validate(truth, ds, kU, kY).nrmse[0] < 1e-9);

    StateSpaceModel zero;
    zero.A = Matrix::Zero(2, 2);
    zero.B = Matrix::Zero(2, 1);
    zero.C = Matrix::Zero(1, 2);
    zero.process_noise_std = Vector::Zero(2);
    zero.sensor_noise_std = Vector::Zero(1);
    CHECK(validate(zero, ds, kU, kY).nrmse[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(validate(zero, ds, kU, kY).best_fit_pct(0) == doctest::Approx(0.0));

    CHECK(code_of([&] { validate(truth, ds, {"u", "y"}, kY); }) == Errc::DimError);
  }

  TEST_CASE("under-ordered models fit worse than the true order") {
    auto truth = four_state_truth();
    auto ds = rollout(truth, switching_inputs(800, 1, 9, 1, 12), nullptr, kU, kY);
    auto m2 = identify(ds, kU, kY, IdentConfig{2, 20, 1e-8});
    auto m4 = identify(ds, kU, kY, IdentConfig{4, 20, 1e-8});
    CHECK(validate(m2, ds, kU, kY).nrmse[0] > validate(m4, ds, kU, kY).nrmse[0]);
  }

  TEST_CASE("training error never grows with the order") {
    auto truth = four_state_truth();
    auto ds = rollout(truth, switching_inputs(800, 1, 11, 1, 12), nullptr, kU, kY);
    double prev = std::numeric_limits<double>::infinity();
    for (int order = 1; order <= 4; ++order) {
      const double e = validate(identify(ds, kU, kY, IdentConfig{order, 20, 1e-8}), ds, kU, kY).nrmse[0];
      CHECK(e <= prev + 1e-9);
      prev = e;
    }
  }

  TEST_CASE("identified behaviour is invariant to a similarity transform of the source") {
    auto truth = four_state_truth();
    Rng rng(17);
    std::normal_distribution<double> nd;
    Matrix T(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) T(i, j) = nd(rng) + (i == j ? 3.0 : 0.0);
    REQUIRE(std::abs(T.determinant()) > 1e-3);
    auto moved = truth;
    moved.A = T * truth.A * T.inverse();
    moved.B = T * truth.B;
    moved.C = truth.C * T.inverse();

    auto u = switching_inputs(600, 1, 21, 1, 10);
    auto ds_a = rollout(truth, u, nullptr, kU, kY);
    auto ds_b = rollout(moved, u, nullptr, kU, kY);
    auto ma = identify(ds_a, kU, kY, IdentConfig{4, 20, 1e-8});
    auto mb = identify(ds_b, kU, kY, IdentConfig{4, 20, 1e-8});
    auto ya = predict_outputs(ma, channel_vectors(ds_a, kU), channel_vectors(ds_a, kY), std::nullopt);
    auto yb = predict_outputs(mb, channel_vectors(ds_a, kU), channel_vectors(ds_a, kY), std::nullopt);
    double scale = 0.0, gap = 0.0;
    for (std::size_t k = 0; k < ya.size(); ++k) {
      scale += ya[k].squaredNorm();
      gap += (ya[k] - yb[k]).squaredNorm();
    }
    CHECK(std::sqrt(gap / scale) < 1e-8);
  }

  TEST_CASE("stage-1 fixture is tracked at orders 4 and 10") {
    auto truth = stage1_four_state_model();
    const std::vector<std::string> in{"MV101", "P101", "P102"};
    const std::vector<std::string> out{"FIT101", "LIT101"};
    Rng rng(5);
    auto ds = rollout(truth, switching_inputs(3000, 3, 8, 30, 120), &rng, in, out);
    for (int order : {4, 10}) {
      auto model = identify(ds, in, out, IdentConfig{order, 20, 1e-8});
      auto gain = fit_observer_gain(model, ds, in, out);
      auto rep = validate(model, ds, in, out, gain);
      INFO("order " << order << " fits " << rep.best_fit_pct(0) << "% / " << rep.best_fit_pct(1) << "%");
      CHECK(rep.best_fit_pct(0) > 90.0);
      CHECK(rep.best_fit_pct(1) > 90.0);
    }
  }

  TEST_CASE("every candidate diverging still yields a model of the requested shape") {
    // raw status codes and uncentred flows, horizon too short for the valve response
    const auto r = simulate(default_scenario(), 28000.0, 3);
    const std::vector<std::string> in{"MV101"}, out{"FIT101"};
    const auto model = identify(r.reported, in, out, IdentConfig{2, 20, 1e-8});
    CHECK(model.n_states() == 2);
    CHECK(model.p_inputs() == 1);
    CHECK(model.m_outputs() == 1);
    CHECK(model.B.allFinite());
  }
}
