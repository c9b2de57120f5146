#pragma once

#include <string>
#include <vector>

#include "tcfp/plantsim.hpp"

namespace tcfp {

// Stage-1 story: MV101 fills T101 through FIT101, P101 (interlocked with
// MV201) drains it through FIT201, hysteresis at 500/800 mm.
Scenario default_scenario();

// Same plant with a narrow 500/530 mm band so operations come every ~65 s.
Scenario detection_scenario();

// detection_scenario with a watermark drawing delays on [min, max] seconds.
Scenario watermark_scenario(double delay_min_s, double delay_max_s, std::uint64_t watermark_seed = 0);

struct BenchDevice {
  std::string id;
  DeviceKind kind = DeviceKind::motorized_valve;
  double open_time_s = 10.0;
  double close_time_s = 11.5;
  double jitter_std_s = 0.5;
  double process_tau_s = 5.0;
  double spread = 0.0;
  double max_rate = 2.4;
};

// Timer-driven rig: every device drives its own flow line (sensor
// "<id>.flow") between an external source and sink.
Scenario bench_scenario(const std::vector<BenchDevice>& devices, double on_s, double off_s, double sample_period_s,
                        double duration_s, double flow_noise_std = 0.0);

// Two valves and two pumps with distinct nominal times.
std::vector<BenchDevice> campaign_devices();

// Five identical valves told apart only by the per-id spread.
std::vector<BenchDevice> five_valve_devices(double spread = 0.08);

// Eight distinct devices for the uniqueness study.
std::vector<BenchDevice> entropy_devices();

}  // namespace tcfp
