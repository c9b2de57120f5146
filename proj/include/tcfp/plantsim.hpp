#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcfp/timeseries.hpp"

namespace tcfp {

enum class DeviceKind { motorized_valve, pump };

struct DeviceParams {
  std::string id;
  DeviceKind kind = DeviceKind::motorized_valve;
  double open_time_s = 10.0;   // full travel (valves) or spin-up (pumps)
  double close_time_s = 11.5;
  double jitter_std_s = 0.0;   // per-operation Gaussian jitter on the travel time
  double process_tau_s = 5.0;  // first-order lag of the driven flow
  // Fractional manufacturing spread. Each id draws fixed open/close factors
  // in [1 - spread, 1 + spread] from a hash of the id.
  double spread = 0.0;
  std::string interlock;  // pumps only: valve that must be fully open
  bool initial_on = false;  // starts fully open / running
};

struct TankParams {
  std::string name;
  std::string level_sensor;
  double level_per_flow = 0.2;  // mm/s of level per m3/h of net inflow
  double initial_level = 650.0;
  double low_sp = 500.0;
  double high_sp = 800.0;
  double critical_low = 150.0;
  double critical_high = 1000.0;
  double max_in_rate = 0.48;  // mm/s
  double max_out_rate = 0.47;
  double noise_std = 0.0;
};

struct FlowLine {
  std::string sensor;
  std::string device;
  double max_rate = 2.4;  // m3/h
  std::string from_tank;  // empty: external source
  std::string to_tank;    // empty: external sink
  double noise_std = 0.0;
};

// fill: ON at level <= low_sp, OFF at >= high_sp. drain: the mirror image.
// cycle: timer-driven bench rig, on_s seconds ON then off_s seconds OFF.
enum class RuleAction { fill, drain, cycle };

struct ControlRule {
  std::string device;
  RuleAction action = RuleAction::fill;
  std::string tank;
  double on_s = 0.0;
  double off_s = 0.0;
};

struct WatermarkPolicy {
  bool enabled = false;
  double delay_min_s = 0.0;
  double delay_max_s = 0.0;
  std::uint64_t seed = 0;
  double granularity_s = 0.0;  // 0 means one sample period
  double safety_fraction = 0.5;
};

enum class AttackType { A1, B1, C1, D1, D2, E1, F1 };

std::string attack_name(AttackType t);
AttackType parse_attack(const std::string& s);

// Per-type targets and params:
//   A1 sensors...          value (default: reading at start)
//   B1 device              command (1 on, 0 off)
//   C1 device              period (s between toggles)
//   D1 device, sensor      duration (s of the sigmoid)
//   D2 device, sensor      hold (s)
//   E1 device, sensor      duration (s of the sigmoid)
//   F1 sensor, sensor
struct AttackSpec {
  AttackType type = AttackType::A1;
  std::vector<std::string> targets;
  std::size_t start_idx = 0;
  std::size_t duration = 0;  // samples
  std::map<std::string, double> params;
};

struct Scenario {
  std::string name = "scenario";
  double sample_period_s = 1.0;
  double duration_s = 3600.0;
  std::vector<TankParams> tanks;
  std::vector<DeviceParams> devices;
  std::vector<FlowLine> lines;
  std::vector<ControlRule> rules;
  WatermarkPolicy watermark;
  std::vector<AttackSpec> attacks;

  // Throws ConfigError (and UnsafeDelay for an over-long watermark).
  void validate() const;

  const DeviceParams& device(const std::string& id) const;
  const TankParams& tank(const std::string& name) const;
  // Flow sensor of the line a device drives.
  std::string sensor_for(const std::string& device_id) const;
};

struct CommandRecord {
  std::string device;
  bool on = false;
  std::size_t trigger_idx = 0;
  std::size_t exec_idx = 0;
  std::size_t delay_samples = 0;
  std::string source = "plc";  // plc | attack
};

struct AttackRecord {
  AttackType type = AttackType::A1;
  std::vector<std::string> targets;
  std::size_t start_idx = 0;  // scheduled window [start_idx, end_idx)
  std::size_t end_idx = 0;
  // Samples where reported data or commands were actually manipulated;
  // unset when the attack found nothing to act on.
  std::optional<std::size_t> active_start;
  std::optional<std::size_t> active_end;
  bool no_op_attack = false;  // B1 that commanded the state already in force
};

struct GroundTruth {
  Dataset truth;  // noise-free levels/flows, true status, plus <device>.openness
  std::vector<CommandRecord> commands;
  std::vector<AttackRecord> attacks;
  bool critical_state_reached = false;
  std::optional<std::size_t> first_critical_idx;

  std::string to_json() const;
};

struct SimResult {
  Dataset reported;
  GroundTruth truth;
};

// Nominal open/close times after the per-id spread draw.
std::pair<double, double> effective_travel_times(const DeviceParams& d);

SimResult simulate(const Scenario& scenario, std::uint64_t seed);
SimResult simulate(const Scenario& scenario, double duration_s, std::uint64_t seed);

// Index-aligned substitution of every channel inside the windows.
struct IndexWindow {
  std::size_t start = 0;
  std::size_t end = 0;
};
Dataset replay_attack(const Dataset& recorded, const Dataset& live, const std::vector<IndexWindow>& windows);

// Fingerprint-preserving replay: for every live command of `device`, the
// recorded operation of the same direction (taken in order, cycling) is pasted
// at the live trigger instant over `segment_len` samples, for the device status
// and the listed sensors. The live run's watermark delays are thereby hidden.
Dataset replay_operations(const SimResult& recorded, const SimResult& live, const std::string& device,
                          const std::vector<std::string>& sensors, std::size_t segment_len);

// Attack records of a GroundTruth::to_json document. Throws SchemaError.
std::vector<AttackRecord> attack_records_from_json(const std::string& ground_truth_json);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace tcfp
