#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tcfp::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, int width, int height) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double l = 70, r = 160, t = 40, b = 50;
  const double pw = width - l - r, ph = height - t - b;
  auto px = [&](double v) { return l + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return t + ph - (v - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << l << "\" y=\"" << t + ph + 16 << "\" text-anchor=\"middle\">" << num(x0) << "</text>\n";
  o << "<text x=\"" << l + pw << "\" y=\"" << t + ph + 16 << "\" text-anchor=\"middle\">" << num(x1) << "</text>\n";
  o << "<text x=\"" << l - 6 << "\" y=\"" << t + ph << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
  o << "<text x=\"" << l - 6 << "\" y=\"" << t + 10 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
  o << "<text x=\"" << l + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">" << escape(x_label)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << t + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << t + ph / 2
    << ")\">" << escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (s.step && k > 0) o << num(px(s.x[k])) << ',' << num(py(s.y[k - 1])) << ' ';
      o << num(px(s.x[k])) << ',' << num(py(s.y[k])) << ' ';
    }
    o << "\"/>\n";
    const double ly = t + 14 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << l + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << l + pw + 32 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << l + pw + 38 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

Series ecdf(const std::string& label, std::vector<double> sample, const std::string& color) {
  std::sort(sample.begin(), sample.end());
  Series s{label, {}, {}, color, true};
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    s.x.push_back(sample[i]);
    s.y.push_back(static_cast<double>(i + 1) / n);
  }
  return s;
}

}  // namespace tcfp::svg
