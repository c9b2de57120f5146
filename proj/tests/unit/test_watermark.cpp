#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tcfp/watermark.hpp"

using namespace tcfp;
using tcfp::test::error_code;

namespace {

TankParams tank(double high_margin, double low_margin, double rin = 0.48, double rout = 0.47) {
  TankParams t;
  t.name = "T";
  t.level_sensor = "L";
  t.low_sp = 500.0;
  t.high_sp = 800.0;
  t.critical_high = 800.0 + high_margin;
  t.critical_low = 500.0 - low_margin;
  t.max_in_rate = rin;
  t.max_out_rate = rout;
  return t;
}

CriticalStateConfig cfg(bool h1, bool l1, bool h2, bool l2) {
  CriticalStateConfig c;
  c.stage1 = tank(200.0, 350.0);
  c.stage2 = tank(300.0, 47.0);  // T2qL = 100 s
  c.x1_high = h1;
  c.x1_low = l1;
  c.x2_high = h2;
  c.x2_low = l2;
  return c;
}

const char* kPiBits100 =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

std::vector<int> bits_of(const std::string& s) {
  std::vector<int> b;
  for (char c : s) b.push_back(c - '0');
  return b;
}

std::vector<int> random_bits(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> b(n);
  for (auto& v : b) v = static_cast<int>(rng() >> 63);
  return b;
}

}  // namespace

TEST_SUITE("watermark") {
  TEST_CASE("stage-1 single-stage times to critical state") {
    const auto t = tank(200.0, 350.0);
    CHECK(overflow_time(t) == doctest::Approx(416.66).epsilon(0.01 / 416.66));
    CHECK(underflow_time(t) == doctest::Approx(744.68).epsilon(0.01 / 744.68));
    CHECK(std::abs(overflow_time(t) - 416.66) < 0.01);
    CHECK(std::abs(underflow_time(t) - 744.68) < 0.01);
  }

  TEST_CASE("all eight critical modes") {
    const double t1h = 200.0 / 0.48, t1l = 350.0 / 0.47, t2h = 300.0 / 0.48, t2l = 100.0;
    struct Row {
      bool h1, l1, h2, l2;
      int mode;
      double lo, hi;
    };
    const Row rows[] = {
        {false, false, false, true, 1, t2l, t2l},
        {false, false, true, false, 2, t2h, t2h},
        {false, true, false, false, 3, t1l, t1l},
        {false, true, false, true, 4, std::min(t1l, t2l), t1l + t2l},
        {false, true, true, false, 5, std::min(t1l, t2h), t1l + t2h},
        {true, false, false, false, 6, t1h, t1h},
        {true, false, false, true, 7, std::min(t1h, t2l), std::min(t1h, t2l)},
        {true, false, true, false, 8, std::min(t1h, t2h), t1h + t2h},
    };
    for (const auto& r : rows) {
      CAPTURE(r.mode);
      const auto c = cfg(r.h1, r.l1, r.h2, r.l2);
      CHECK(critical_mode(c) == r.mode);
      const auto b = time_to_critical(c);
      CHECK(b.lower == doctest::Approx(r.lo).epsilon(1e-12));
      CHECK(b.upper == doctest::Approx(r.hi).epsilon(1e-12));
      CHECK(b.exact() == (r.lo == r.hi));
    }
    // Mode 7 example: min(416.66, 100) = 100.
    CHECK(time_to_critical(cfg(true, false, false, true)).lower == doctest::Approx(100.0));
  }

  TEST_CASE("impossible flag combinations") {
    for (int code = 0; code < 16; ++code) {
      const bool h1 = code & 8, l1 = code & 4, h2 = code & 2, l2 = code & 1;
      const bool valid = code == 1 || code == 2 || code == 4 || code == 5 || code == 6 || code == 8 || code == 9 ||
                         code == 10;
      if (!valid) CHECK(error_code([&] { time_to_critical(cfg(h1, l1, h2, l2)); }) == Errc::InvalidMode);
    }
  }

  TEST_CASE("time to critical is monotone in margin and rate") {
    double prev = 0.0;
    for (double margin = 50.0; margin <= 400.0; margin += 25.0) {
      const double t = overflow_time(tank(margin, 100.0));
      CHECK(t >= prev);
      prev = t;
    }
    prev = 0.0;
    for (double rate = 2.0; rate >= 0.1; rate -= 0.1) {
      const double t = underflow_time(tank(100.0, 100.0, 0.48, rate));
      CHECK(t >= prev);
      prev = t;
    }
  }

  TEST_CASE("delay draws") {
    WatermarkPolicy p;
    p.enabled = true;
    p.delay_min_s = p.delay_max_s = 10.0;
    Rng rng(1);
    for (int i = 0; i < 20; ++i) CHECK(draw_delay(p, 416.66, rng) == 10);
    p.delay_max_s = 500.0;
    CHECK(error_code([&] { draw_delay(p, 416.66, rng); }) == Errc::UnsafeDelay);
    p.delay_min_s = 5.0;
    p.delay_max_s = 35.0;
    const int n = 100000;
    double sum = 0.0;
    std::size_t lo = 100, hi = 0;
    for (int i = 0; i < n; ++i) {
      const auto d = draw_delay(p, 416.66, rng);
      sum += static_cast<double>(d);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double se = std::sqrt((31.0 * 31.0 - 1.0) / 12.0 / n);
    CHECK(std::abs(sum / n - 20.0) < 3.0 * se);
    CHECK(lo == 5);
    CHECK(hi == 35);
    // Coarser grid: 5 s granularity only yields multiples of 5.
    p.granularity_s = 5.0;
    for (int i = 0; i < 200; ++i) CHECK(draw_delay(p, 416.66, rng) % 5 == 0);
  }

  TEST_CASE("K-S statistic corner cases") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    auto r = ks_two_sample(a, a);
    CHECK(r.d_stat == 0.0);
    CHECK_FALSE(r.distinct);
    r = ks_two_sample(a, {10, 11, 12, 13, 14});
    CHECK(r.d_stat == 1.0);
    CHECK(r.distinct);
    CHECK(error_code([&] { ks_two_sample(a, {1, 2, 3, 4}); }) == Errc::InsufficientData);
    // Critical value uses c(alpha) = sqrt(-ln(alpha) / 2).
    CHECK(r.critical == doctest::Approx(std::sqrt(-0.5 * std::log(0.05)) * std::sqrt(11.0 / 30.0)));
  }

  TEST_CASE("K-S detects a 3-sigma shift and is symmetric") {
    Rng rng(4);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> a(100), b(100);
    for (std::size_t i = 0; i < 100; ++i) {
      a[i] = nd(rng);
      b[i] = a[i] + 3.0;
    }
    CHECK(ks_two_sample(a, b).distinct);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(5 + t), y(7 + 2 * t);
      for (auto& v : x) v = nd(rng);
      for (auto& v : y) v = nd(rng) + 0.3;
      const double d1 = ks_two_sample(x, y).d_stat, d2 = ks_two_sample(y, x).d_stat;
      CHECK(d1 == d2);
      CHECK(d1 >= 0.0);
      CHECK(d1 <= 1.0);
    }
  }

  TEST_CASE("replay check") {
    Rng rng(9);
    std::normal_distribution<double> tc(17.8, 2.2);
    std::uniform_int_distribution<int> delay(35, 45);
    std::vector<double> normal(60), honest(40), replay(40), delays(40);
    for (auto& v : normal) v = tc(rng);
    for (std::size_t i = 0; i < 40; ++i) {
      delays[i] = delay(rng);
      const double base = tc(rng);
      honest[i] = base + delays[i];
      replay[i] = base;  // recorded timing, no delay
    }
    CHECK_FALSE(replay_check(normal, honest, delays).distinct);
    CHECK(replay_check(normal, replay, delays).distinct);
    CHECK(error_code([&] { replay_check(normal, replay, {1.0}); }) == Errc::LengthError);
  }

  TEST_CASE("entropy basics") {
    const std::vector<int> x{0, 1, 2, 3, 0, 1, 2, 3};
    CHECK(entropy_bits(x, 4) == doctest::Approx(2.0));
    CHECK(mutual_information_bits(x, x, 4) == doctest::Approx(2.0));
    CHECK(entropy_bits(x, 4) - mutual_information_bits(x, x, 4) == doctest::Approx(0.0));
    CHECK(bin_indices({0.0, 0.5, 1.0}, 10) == std::vector<int>{0, 5, 9});
    CHECK(bin_indices({2.0, 2.0}, 10) == std::vector<int>{0, 0});
  }

  TEST_CASE("mutual information is symmetric and bounded by the marginals") {
    Rng rng(12);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
      std::vector<double> a(200), b(200);
      for (std::size_t i = 0; i < 200; ++i) {
        a[i] = nd(rng);
        b[i] = 0.1 * t * a[i] + nd(rng);
      }
      const auto la = bin_indices(a, 10), lb = bin_indices(b, 10);
      const double ab = mutual_information_bits(la, lb, 10), ba = mutual_information_bits(lb, la, 10);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(ab <= std::min(entropy_bits(la, 10), entropy_bits(lb, 10)) + 1e-12);
      CHECK(ab >= 0.0);
    }
  }

  TEST_CASE("independent uniforms keep high conditional entropy") {
    Rng rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const auto lx = bin_indices(x, 10), ly = bin_indices(y, 10);
    const double h = (entropy_bits(lx, 10) - mutual_information_bits(lx, ly, 10)) / std::log2(10.0);
    CHECK(h >= 0.9);
    // Binning bias of the plug-in estimate is small at this size.
    CHECK(mutual_information_bits(lx, ly, 10) < 0.01);
  }

  TEST_CASE("entropy analysis report") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<FeatureVector>> groups(3, std::vector<FeatureVector>(200));
    for (std::size_t g = 0; g < 3; ++g) {
      for (auto& f : groups[g]) {
        std::array<double, FeatureVector::size> a{};
        for (auto& v : a) v = u(rng);
        if (g == 2) a[7] = 4.0;  // constant feature
        f = FeatureVector::from_array(a);
      }
    }
    // The third process copies the first: fully dependent.
    for (std::size_t i = 0; i < 200; ++i) {
      auto a = groups[0][i].as_array();
      a[7] = 4.0;
      groups[2][i] = FeatureVector::from_array(a);
    }
    const auto rep = entropy_analysis(groups, {"a", "b", "c"});
    CHECK(rep.conditional(0, 0) == doctest::Approx(0.0));
    CHECK(rep.conditional(0, 1) > 0.85);
    // The shuffle correction leaves the bias estimate on a copied process.
    CHECK(rep.conditional(0, 2) < 0.15);
    const auto raw = entropy_analysis(groups, {"a", "b", "c"}, 10, MiCorrection::none);
    CHECK(raw.conditional(0, 2) < 1e-12);
    CHECK(raw.conditional(0, 1) < rep.conditional(0, 1));
    CHECK(rep.entropy(0) > 0.9);
    CHECK(rep.warnings.size() == 1);
    CHECK(error_code([&] { entropy_analysis({groups[0]}, {"a"}); }) == Errc::InsufficientData);
    auto small = groups;
    small[1].resize(10);
    CHECK(error_code([&] { entropy_analysis(small, {"a", "b", "c"}); }) == Errc::InsufficientData);
  }

  TEST_CASE("incomplete gamma against closed forms") {
    for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 80.0}) {
      CHECK(igamc(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
      CHECK(igamc(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
      // Q(2, x) = (1 + x) e^{-x}
      CHECK(igamc(2.0, x) == doctest::Approx((1.0 + x) * std::exp(-x)).epsilon(1e-12));
    }
    CHECK(error_code([] { igamc(0.0, 1.0); }) == Errc::BadInput);
  }

  TEST_CASE("NIST worked examples on the 100-bit expansion of pi") {
    const auto b = bits_of(kPiBits100);
    REQUIRE(b.size() == 100);
    CHECK(nist_frequency(b) == doctest::Approx(0.109599).epsilon(1e-5));
    CHECK(nist_block_frequency(b, 10) == doctest::Approx(0.706438).epsilon(1e-5));
    CHECK(nist_runs(b) == doctest::Approx(0.500798).epsilon(1e-5));
    CHECK(nist_cusum(b, false) == doctest::Approx(0.219194).epsilon(1e-5));
    CHECK(nist_cusum(b, true) == doctest::Approx(0.114866).epsilon(1e-5));
    CHECK(nist_approximate_entropy(b, 2) == doctest::Approx(0.235301).epsilon(1e-5));
  }

  TEST_CASE("NIST longest run worked example") {
    const auto b = bits_of(
        "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
        "111001101101100010110010");
    REQUIRE(b.size() == 128);
    CHECK(nist_longest_run(b) == doctest::Approx(0.180609).epsilon(1e-3));
  }

  TEST_CASE("degenerate sequences fail") {
    const std::vector<int> zeros(10000, 0);
    CHECK(nist_frequency(zeros) < 1e-10);
    std::vector<int> alt(10000);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = static_cast<int>(i % 2);
    CHECK(nist_runs(alt) < 0.01);
    CHECK(nist_frequency(alt) == doctest::Approx(1.0));
    for (const auto& t : nist_subset(zeros)) {
      CAPTURE(t.name);
      CHECK(t.applicable);
      CHECK(t.p_value <= 0.01);
    }
  }

  TEST_CASE("random bits pass and p-values stay in [0, 1]") {
    const auto b = random_bits(200000, 17);
    for (const auto& t : nist_subset(b)) {
      CAPTURE(t.name);
      CHECK(t.applicable);
      CHECK(t.p_value > 0.01);
      CHECK(t.p_value <= 1.0);
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto r = random_bits(2000, s);
      for (const auto& t : nist_subset(r)) {
        CHECK(t.p_value >= 0.0);
        CHECK(t.p_value <= 1.0);
      }
    }
  }

  TEST_CASE("short sequences are not applicable") {
    const auto tests = nist_subset(random_bits(50, 1));
    for (const auto& t : tests) CHECK_FALSE(t.applicable);
    const auto mid = nist_subset(random_bits(1000, 1));
    for (const auto& t : mid) {
      if (t.name == "approximate_entropy" || t.name == "serial_1") CHECK(t.applicable);
    }
    CHECK(error_code([] { nist_frequency({0, 1, 2}); }) == Errc::NotApplicable);
    CHECK(error_code([] { nist_frequency(std::vector<int>(200, 2)); }) == Errc::BadInput);
  }

  TEST_CASE("delay serialization uses fixed-width indices") {
    WatermarkPolicy p;
    p.delay_min_s = 5.0;
    p.delay_max_s = 36.0;
    const auto bits = serialize_delays({5, 6, 36}, p);
    CHECK(bits == std::vector<int>{0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1});
    CHECK(error_code([&] { serialize_delays({40}, p); }) == Errc::BadInput);
  }

  TEST_CASE("serialized delay draws pass the NIST subset") {
    WatermarkPolicy p;
    p.enabled = true;
    p.delay_min_s = 5.0;
    p.delay_max_s = 36.0;
    Rng rng(2024);
    std::vector<std::size_t> d(100000);
    for (auto& v : d) v = draw_delay(p, 416.66, rng);
    const auto bits = serialize_delays(d, p);
    CHECK(bits.size() == 500000);
    for (const auto& t : nist_subset(bits)) {
      CAPTURE(t.name);
      CHECK(t.applicable);
      CHECK(t.p_value > 0.01);
    }
  }
}
