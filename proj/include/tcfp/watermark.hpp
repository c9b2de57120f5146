#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcfp/fingerprint.hpp"
#include "tcfp/lti.hpp"
#include "tcfp/plantsim.hpp"

namespace tcfp {

// Worst-case seconds from the high set-point to overflow (inflow at the
// maximum rate, no outflow) and from the low set-point to underflow.
double overflow_time(const TankParams& t);
double underflow_time(const TankParams& t);

struct CriticalStateConfig {
  TankParams stage1;
  TankParams stage2;
  bool x1_high = false;
  bool x1_low = false;
  bool x2_high = false;
  bool x2_low = false;
};

struct TqBound {
  double lower = 0.0;
  double upper = 0.0;
  bool exact() const noexcept { return lower == upper; }
};

// Mode number 1..8 of the flag combination. Throws InvalidMode.
int critical_mode(const CriticalStateConfig& cfg);
TqBound time_to_critical(const CriticalStateConfig& cfg);

// Shortest single-stage bound over every tank of a scenario.
double scenario_tq_bound(const Scenario& s);

// Delay in samples, uniform over the policy's grid. Throws UnsafeDelay when
// delay_max exceeds safety_fraction * t_q_bound.
std::size_t draw_delay(const WatermarkPolicy& policy, double t_q_bound, Rng& rng, double sample_period_s = 1.0);
void check_delay_bound(const WatermarkPolicy& policy, double t_q_bound);

struct KsResult {
  double d_stat = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double alpha = 0.05;
  double critical = 0.0;  // D threshold at alpha
  bool distinct = false;
};

// Throws InsufficientData below 5 samples per side.
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

// Removes each observed operation's own watermark delay and compares the
// remainder with the unwatermarked base distribution. `distinct` means the
// observed timings do not carry the drawn delays, i.e. a replay is flagged.
KsResult replay_check(const std::vector<double>& normal_tc, const std::vector<double>& observed_tc,
                      const std::vector<double>& delays_s, double alpha = 0.05);

// Equal-width histogram over the sample's own [min, max]. Entropies in bits.
std::vector<int> bin_indices(const std::vector<double>& x, int bins);
double entropy_bits(const std::vector<int>& labels, int bins);
double joint_entropy_bits(const std::vector<int>& a, const std::vector<int>& b, int bins);
double mutual_information_bits(const std::vector<int>& a, const std::vector<int>& b, int bins);

enum class MiCorrection { none, shuffle };

struct EntropyReport {
  std::vector<std::string> processes;
  Matrix conditional;  // [i][t] normalized H(w_i | w_t), feature-averaged
  Vector entropy;      // normalized H(w_i), feature-averaged
  std::vector<std::string> warnings;
};

// Samples of different processes are paired by position (the shortest group
// sets the length). With the shuffle correction, the mean mutual information
// of `shuffles` random re-pairings is subtracted as the finite-sample bias.
EntropyReport entropy_analysis(const std::vector<std::vector<FeatureVector>>& groups,
                               const std::vector<std::string>& names, int bins = 10,
                               MiCorrection correction = MiCorrection::shuffle, int shuffles = 20,
                               std::uint64_t seed = 1);

struct NistTest {
  std::string name;
  bool applicable = false;
  double p_value = 0.0;
};

double igamc(double a, double x);  // regularized upper incomplete gamma Q(a, x)

double nist_frequency(const std::vector<int>& bits);
double nist_block_frequency(const std::vector<int>& bits, std::size_t block = 128);
double nist_runs(const std::vector<int>& bits);
double nist_longest_run(const std::vector<int>& bits);
double nist_cusum(const std::vector<int>& bits, bool reverse);
double nist_approximate_entropy(const std::vector<int>& bits, int m);
std::pair<double, double> nist_serial(const std::vector<int>& bits, int m);

// Every test of the subset; too-short inputs are reported as not applicable.
std::vector<NistTest> nist_subset(const std::vector<int>& bits);

// Each delay's index within [delay_min, delay_max] on the granularity grid,
// written MSB-first with the fixed width needed for the largest index.
std::vector<int> serialize_delays(const std::vector<std::size_t>& delays_samples, const WatermarkPolicy& policy,
                                  double sample_period_s = 1.0);

}  // namespace tcfp
