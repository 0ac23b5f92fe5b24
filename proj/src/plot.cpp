#include "autowindow/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace autowindow::plot {

namespace {

constexpr double kPanelWidth = 720;
constexpr double kPanelHeight = 240;
constexpr double kMargin = 48;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
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

std::string line_plot_svg(const std::vector<Panel>& panels) {
  const double width = kPanelWidth + 2 * kMargin;
  const double height = static_cast<double>(panels.size()) * (kPanelHeight + kMargin) + kMargin;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double top = kMargin + static_cast<double>(p) * (kPanelHeight + kMargin);
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : panel.series) {
      for (double v : s.x) { x_lo = std::min(x_lo, v); x_hi = std::max(x_hi, v); }
      for (double v : s.y) { y_lo = std::min(y_lo, v); y_hi = std::max(y_hi, v); }
    }
    if (!(x_hi > x_lo)) { x_lo -= 1; x_hi += 1; }
    if (!(y_hi > y_lo)) { y_lo -= 1; y_hi += 1; }
    const auto px = [&](double v) { return kMargin + (v - x_lo) / (x_hi - x_lo) * kPanelWidth; };
    const auto py = [&](double v) { return top + kPanelHeight - (v - y_lo) / (y_hi - y_lo) * kPanelHeight; };

    out += "<text x=\"" + num(kMargin) + "\" y=\"" + num(top - 8) + "\">" + escape(panel.title) + "</text>\n";
    out += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(top) + "\" width=\"" + num(kPanelWidth) +
           "\" height=\"" + num(kPanelHeight) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    out += "<text x=\"" + num(kMargin) + "\" y=\"" + num(top + kPanelHeight + 14) + "\">" + num(x_lo) + "</text>\n";
    out += "<text x=\"" + num(kMargin + kPanelWidth) + "\" y=\"" + num(top + kPanelHeight + 14) +
           "\" text-anchor=\"end\">" + num(x_hi) + "</text>\n";
    out += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(top + 10) + "\" text-anchor=\"end\">" + num(y_hi) + "</text>\n";
    out += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(top + kPanelHeight) + "\" text-anchor=\"end\">" +
           num(y_lo) + "</text>\n";
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const auto& series = panel.series[s];
      const char* colour = kPalette[s % std::size(kPalette)];
      out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"";
      const std::size_t count = std::min(series.x.size(), series.y.size());
      for (std::size_t i = 0; i < count; ++i) {
        if (i) out += ' ';
        out += num(px(series.x[i])) + "," + num(py(series.y[i]));
      }
      out += "\"/>\n";
      out += "<text x=\"" + num(kMargin + kPanelWidth - 4) + "\" y=\"" + num(top + 16 + 14 * static_cast<double>(s)) +
             "\" text-anchor=\"end\" fill=\"" + colour + "\">" + escape(series.label) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string response_svg(const ResponseCurve& curve) {
  static constexpr const char* kTitles[3] = {"window extractor", "tanh rectifier", "fusion"};
  const Eigen::MatrixXd* stages[3] = {&curve.extracted, &curve.rectified, &curve.fused};
  std::vector<double> xs(curve.inputs.begin(), curve.inputs.end());
  std::vector<Panel> panels;
  for (int s = 0; s < 3; ++s) {
    Panel panel{kTitles[s], {}};
    for (Eigen::Index w = 0; w < stages[s]->cols(); ++w) {
      Series series{"window " + std::to_string(w), xs, {}};
      series.y.resize(xs.size());
      Eigen::VectorXd::Map(series.y.data(), static_cast<Eigen::Index>(xs.size())) = stages[s]->col(w);
      panel.series.push_back(std::move(series));
    }
    panels.push_back(std::move(panel));
  }
  return line_plot_svg(panels);
}

std::string heatmap_svg(const Eigen::MatrixXd& values, const std::string& title) {
  constexpr double cell = 64;
  const double width = 2 * kMargin + cell * static_cast<double>(values.cols());
  const double height = 2 * kMargin + cell * static_cast<double>(values.rows());
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kMargin) + "\" y=\"" + num(kMargin - 16) + "\">" + escape(title) + "</text>\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double v = std::clamp(values(i, j), 0.0, 1.0);
      const int r = static_cast<int>(std::lround(255 - 247 * v));
      const int g = static_cast<int>(std::lround(255 - 207 * v));
      const int b = static_cast<int>(std::lround(255 - 148 * v));
      const double x = kMargin + cell * static_cast<double>(j);
      const double y = kMargin + cell * static_cast<double>(i);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
             "\" fill=\"rgb(" + std::to_string(r) + "," + std::to_string(g) + "," + std::to_string(b) +
             ")\" stroke=\"#444\"/>\n";
      out += "<text x=\"" + num(x + cell / 2) + "\" y=\"" + num(y + cell / 2 + 4) + "\" text-anchor=\"middle\" fill=\"" +
             (v > 0.5 ? "white" : "black") + "\">" + num(values(i, j)) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace autowindow::plot
