#include "tcfp/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcfp/error.hpp"

namespace tcfp {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return cells;
}

double parse_real(std::string_view cell, std::size_t row, std::string_view column) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (cell.empty()) {
    fail(Errc::BadInput, "blank cell at row " + std::to_string(row) + ", column " + std::string(column));
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    fail(Errc::BadInput, "cannot parse '" + std::string(cell) + "' at row " + std::to_string(row));
  }
  return v;
}

}  // namespace

bool is_status_code(double v) noexcept {
  return v == status::transit || v == status::off || v == status::on;
}

const TimeSeries* Dataset::find(std::string_view name) const noexcept {
  for (const auto& c : channels)
    if (c.name == name) return &c;
  return nullptr;
}

TimeSeries* Dataset::find(std::string_view name) noexcept {
  for (auto& c : channels)
    if (c.name == name) return &c;
  return nullptr;
}

const TimeSeries& Dataset::channel(std::string_view name) const {
  if (const auto* c = find(name)) return *c;
  fail(Errc::UnknownChannel, "no channel named '" + std::string(name) + "'");
}

TimeSeries& Dataset::channel(std::string_view name) {
  if (auto* c = find(name)) return *c;
  fail(Errc::UnknownChannel, "no channel named '" + std::string(name) + "'");
}

ChannelSchema Dataset::schema() const {
  ChannelSchema s;
  for (const auto& c : channels) s[c.name] = ChannelSpec{c.kind, c.unit};
  return s;
}

void Dataset::validate() const {
  if (!(sample_period_s > 0.0) || !std::isfinite(sample_period_s)) {
    fail(Errc::BadInput, "sample period must be positive");
  }
  const auto n = length();
  for (const auto& c : channels) {
    if (c.values.size() != n) fail(Errc::BadInput, "channel '" + c.name + "' has a different length");
    if (c.kind == ChannelKind::actuator) {
      for (double v : c.values)
        if (!is_status_code(v)) {
          fail(Errc::BadInput, "actuator '" + c.name + "' holds non-status value " + format_real(v));
        }
    }
  }
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset ingest_csv(const std::filesystem::path& path, const ChannelSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.empty()) fail(Errc::EmptyDataset, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_row(line);
  if (header.empty() || header.front() != "time") {
    fail(Errc::BadInput, "first column of " + path.string() + " must be 'time'");
  }

  Dataset ds;
  ds.provenance = "ingested";
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto it = schema.find(header[i]);
    if (it == schema.end()) fail(Errc::UnknownChannel, "column '" + std::string(header[i]) + "' not in schema");
    ds.channels.push_back(TimeSeries{std::string(header[i]), it->second.kind, it->second.unit, {}});
  }

  std::vector<double> times;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != header.size()) {
      fail(Errc::BadInput, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()));
    }
    times.push_back(parse_real(cells[0], row, "time"));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      ds.channels[i - 1].values.push_back(parse_real(cells[i], row, header[i]));
    }
  }
  if (times.empty()) fail(Errc::EmptyDataset, path.string() + " has no data rows");

  const double t0 = times.front();
  if (t0 != std::floor(t0)) fail(Errc::BadInput, "start time must be whole seconds");
  ds.start_time = static_cast<std::int64_t>(t0);
  if (times.size() >= 2) {
    ds.sample_period_s = times[1] - times[0];
    if (!(ds.sample_period_s > 0.0)) fail(Errc::RaggedSampling, "timestamps must increase");
    const double tol = 1e-6 * ds.sample_period_s;
    for (std::size_t i = 2; i < times.size(); ++i) {
      const double expected = t0 + static_cast<double>(i) * ds.sample_period_s;
      if (std::abs(times[i] - expected) > tol) {
        fail(Errc::RaggedSampling, "non-uniform timestamp " + format_real(times[i]) + " at row " +
                                       std::to_string(i + 2));
      }
    }
  }
  ds.validate();
  return ds;
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
  if (ds.channels.empty() || ds.empty()) fail(Errc::EmptyDataset, "nothing to export");
  ds.validate();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());

  std::string buf = "time";
  for (const auto& c : ds.channels) {
    buf += ',';
    buf += c.name;
  }
  buf += '\n';

  const bool whole_period = ds.sample_period_s == std::floor(ds.sample_period_s);
  const auto n = ds.length();
  for (std::size_t i = 0; i < n; ++i) {
    if (whole_period) {
      buf += std::to_string(ds.start_time + static_cast<std::int64_t>(i) * static_cast<std::int64_t>(ds.sample_period_s));
    } else {
      buf += format_real(static_cast<double>(ds.start_time) + static_cast<double>(i) * ds.sample_period_s);
    }
    for (const auto& c : ds.channels) {
      buf += ',';
      buf += format_real(c.values[i]);
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

Dataset window(const Dataset& ds, std::size_t start_idx, std::size_t end_idx) {
  if (start_idx >= end_idx || end_idx > ds.length()) {
    fail(Errc::IndexError, "window [" + std::to_string(start_idx) + ", " + std::to_string(end_idx) +
                               ") outside [0, " + std::to_string(ds.length()) + ")");
  }
  Dataset out;
  out.sample_period_s = ds.sample_period_s;
  out.provenance = ds.provenance;
  out.start_time = ds.start_time + static_cast<std::int64_t>(std::llround(static_cast<double>(start_idx) * ds.sample_period_s));
  for (const auto& c : ds.channels) {
    TimeSeries t{c.name, c.kind, c.unit, {}};
    t.values.assign(c.values.begin() + static_cast<std::ptrdiff_t>(start_idx),
                    c.values.begin() + static_cast<std::ptrdiff_t>(end_idx));
    out.channels.push_back(std::move(t));
  }
  return out;
}

}  // namespace tcfp
