#include "tcfp/scenarios.hpp"

namespace tcfp {

Scenario default_scenario() {
  Scenario s;
  s.name = "default";
  s.duration_s = 3600.0;

  TankParams t;
  t.name = "T101";
  t.level_sensor = "LIT101";
  t.noise_std = 0.5;
  s.tanks.push_back(t);

  DeviceParams mv101;
  mv101.id = "MV101";
  mv101.jitter_std_s = 2.0;
  mv101.initial_on = true;
  DeviceParams mv201 = mv101;
  mv201.id = "MV201";
  mv201.initial_on = false;
  mv201.jitter_std_s = 1.0;
  DeviceParams p101;
  p101.id = "P101";
  p101.kind = DeviceKind::pump;
  p101.open_time_s = 4.0;
  p101.close_time_s = 5.0;
  p101.jitter_std_s = 0.5;
  p101.process_tau_s = 3.0;
  p101.interlock = "MV201";
  s.devices = {mv101, mv201, p101};

  s.lines.push_back({"FIT101", "MV101", 2.4, "", "T101", 0.02});
  s.lines.push_back({"FIT201", "P101", 2.35, "T101", "", 0.02});

  s.rules.push_back({"MV101", RuleAction::fill, "T101", 0.0, 0.0});
  s.rules.push_back({"P101", RuleAction::drain, "T101", 0.0, 0.0});
  return s;
}

Scenario detection_scenario() {
  Scenario s = default_scenario();
  s.name = "detection";
  s.tanks[0].initial_level = 515.0;
  s.tanks[0].high_sp = 530.0;
  return s;
}

Scenario watermark_scenario(double delay_min_s, double delay_max_s, std::uint64_t watermark_seed) {
  Scenario s = detection_scenario();
  s.name = "watermark";
  s.watermark.enabled = true;
  s.watermark.delay_min_s = delay_min_s;
  s.watermark.delay_max_s = delay_max_s;
  s.watermark.seed = watermark_seed;
  return s;
}

Scenario bench_scenario(const std::vector<BenchDevice>& devices, double on_s, double off_s, double sample_period_s,
                        double duration_s, double flow_noise_std) {
  Scenario s;
  s.name = "bench";
  s.sample_period_s = sample_period_s;
  s.duration_s = duration_s;
  for (const auto& b : devices) {
    DeviceParams d;
    d.id = b.id;
    d.kind = b.kind;
    d.open_time_s = b.open_time_s;
    d.close_time_s = b.close_time_s;
    d.jitter_std_s = b.jitter_std_s;
    d.process_tau_s = b.process_tau_s;
    d.spread = b.spread;
    s.devices.push_back(d);
    s.lines.push_back({b.id + ".flow", b.id, b.max_rate, "", "", flow_noise_std});
    s.rules.push_back({b.id, RuleAction::cycle, "", on_s, off_s});
  }
  return s;
}

std::vector<BenchDevice> campaign_devices() {
  return {
      // Jitter does not grow with travel time, so no class sits between
      // the others in every feature.
      {"MV1", DeviceKind::motorized_valve, 10.0, 11.5, 0.2, 5.0, 0.0, 2.4},
      {"MV2", DeviceKind::motorized_valve, 13.0, 15.0, 0.8, 5.0, 0.0, 2.4},
      {"P1", DeviceKind::pump, 4.0, 5.0, 0.2, 3.0, 0.0, 2.35},
      {"P2", DeviceKind::pump, 6.0, 7.5, 0.8, 3.0, 0.0, 2.35},
  };
}

std::vector<BenchDevice> five_valve_devices(double spread) {
  std::vector<BenchDevice> out;
  for (int i = 1; i <= 5; ++i) {
    out.push_back({"V" + std::to_string(i), DeviceKind::motorized_valve, 10.0, 11.5, 0.02, 1.0, spread, 2.4});
  }
  return out;
}

std::vector<BenchDevice> entropy_devices() {
  std::vector<BenchDevice> out;
  for (int i = 0; i < 8; ++i) {
    const bool pump = i % 2 == 1;
    const double nominal = pump ? 4.0 + 0.7 * i : 8.0 + 0.9 * i;
    out.push_back({(pump ? "P" : "MV") + std::to_string(i + 1), pump ? DeviceKind::pump : DeviceKind::motorized_valve,
                   nominal, 1.15 * nominal, 0.05 * nominal, pump ? 3.0 : 5.0, 0.0, pump ? 2.35 : 2.4});
  }
  return out;
}

}  // namespace tcfp
