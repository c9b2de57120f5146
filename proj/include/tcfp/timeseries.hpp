#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tcfp {

enum class ChannelKind { sensor, actuator };

// Actuator status codes follow the historian convention: a valve in travel
// reports `transit`, settled devices report `off` (closed/stopped) or `on`.
namespace status {
inline constexpr double transit = 0.0;
inline constexpr double off = 1.0;
inline constexpr double on = 2.0;
}  // namespace status

bool is_status_code(double v) noexcept;

struct TimeSeries {
  std::string name;
  ChannelKind kind = ChannelKind::sensor;
  std::string unit;
  std::vector<double> values;

  bool operator==(const TimeSeries&) const = default;
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::sensor;
  std::string unit;
};

using ChannelSchema = std::map<std::string, ChannelSpec, std::less<>>;

// Uniformly sampled plant trace. Timestamps are never stored: sample i sits
// at start_time + i * sample_period_s.
struct Dataset {
  double sample_period_s = 1.0;
  std::int64_t start_time = 0;
  std::vector<TimeSeries> channels;
  std::string provenance = "simulated";

  std::size_t length() const noexcept { return channels.empty() ? 0 : channels.front().values.size(); }
  bool empty() const noexcept { return length() == 0; }

  const TimeSeries* find(std::string_view name) const noexcept;
  TimeSeries* find(std::string_view name) noexcept;
  // Throws UnknownChannel.
  const TimeSeries& channel(std::string_view name) const;
  TimeSeries& channel(std::string_view name);

  ChannelSchema schema() const;

  // Throws BadInput when lengths differ or an actuator holds a non-status value.
  void validate() const;

  // Provenance is a tag and does not take part in equality.
  bool operator==(const Dataset& other) const {
    return sample_period_s == other.sample_period_s && start_time == other.start_time &&
           channels == other.channels;
  }
};

Dataset ingest_csv(const std::filesystem::path& path, const ChannelSchema& schema);
void export_csv(const Dataset& ds, const std::filesystem::path& path);

// Half-open [start_idx, end_idx).
Dataset window(const Dataset& ds, std::size_t start_idx, std::size_t end_idx);

// Shortest representation that parses back to the same double.
std::string format_real(double v);

}  // namespace tcfp
