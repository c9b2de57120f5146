#pragma once

#include <string>
#include <vector>

namespace tcfp::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool step = false;  // ECDF-style staircase
};

// Minimal line chart with axes, min/max tick labels and a legend.
std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, int width = 720, int height = 360);

// Empirical CDF of a sample as a staircase series.
Series ecdf(const std::string& label, std::vector<double> sample, const std::string& color);

}  // namespace tcfp::svg
