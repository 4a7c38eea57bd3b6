#include <algorithm>
#include <cmath>
#include <fstream>

#include "risro/bench.hpp"

namespace risro::bench {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, bool log_y) {
  const double width = 720, height = 480;
  const double left = 80, right = 30, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_y && y <= 0.0) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = log_y ? 1e-1 : 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = log_y ? ymin * 10 : ymin + 1;

  auto tx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto ty = [&](double y) {
    const double t = log_y ? (std::log10(y) - std::log10(ymin)) /
                                 (std::log10(ymax) - std::log10(ymin))
                           : (y - ymin) / (ymax - ymin);
    return top + (1.0 - t) * plot_h;
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
      << "font-family=\"sans-serif\">" << title << "</text>\n";

  // frame
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // y ticks: decades when log, 5 even steps otherwise
  if (log_y) {
    const int lo = static_cast<int>(std::floor(std::log10(ymin)));
    const int hi = static_cast<int>(std::ceil(std::log10(ymax)));
    for (int e = lo; e <= hi; ++e) {
      const double y = std::pow(10.0, e);
      if (y < ymin || y > ymax) continue;
      out << "<line x1=\"" << left << "\" y1=\"" << ty(y) << "\" x2=\"" << left + plot_w
          << "\" y2=\"" << ty(y) << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << left - 8 << "\" y=\"" << ty(y) + 4
          << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
          << "</text>\n";
    }
  } else {
    for (int k = 0; k <= 5; ++k) {
      const double y = ymin + (ymax - ymin) * k / 5.0;
      out << "<line x1=\"" << left << "\" y1=\"" << ty(y) << "\" x2=\"" << left + plot_w
          << "\" y2=\"" << ty(y) << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << left - 8 << "\" y=\"" << ty(y) + 4
          << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << y
          << "</text>\n";
    }
  }
  for (int k = 0; k <= 6; ++k) {
    const double x = xmin + (xmax - xmin) * k / 6.0;
    out << "<text x=\"" << tx(x) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << x
        << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
      << "transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  int color = 0;
  double legend_y = top + 16;
  for (const auto& s : series) {
    const char* c = kPalette[color++ % 6];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.8\" points=\"";
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_y && y <= 0.0) continue;
      out << tx(x) << ',' << ty(y) << ' ';
    }
    out << "\"/>\n";
    out << "<line x1=\"" << left + plot_w - 130 << "\" y1=\"" << legend_y << "\" x2=\""
        << left + plot_w - 106 << "\" y2=\"" << legend_y << "\" stroke=\"" << c
        << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << left + plot_w - 100 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace risro::bench
