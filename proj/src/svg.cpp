#include "stretto/svg.hpp"

#include "stretto/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stretto {

namespace {
constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}
}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgPlot::add_line(const std::vector<double>& xs,
                       const std::vector<double>& ys, const std::string& label,
                       const std::string& color) {
  series_.push_back({xs, ys, {}, label, color, false});
}

void SvgPlot::add_scatter(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::vector<double>& radii,
                          const std::string& color) {
  series_.push_back({xs, ys, radii, "", color, true});
}

void SvgPlot::save(const std::string& path) const {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (first) {
        xmin = xmax = s.xs[i];
        ymin = ymax = s.ys[i];
        first = false;
      }
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    return kHeight - kBottom -
           (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  };

  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
    << kHeight << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">"
    << title_ << "</text>\n";

  // axes
  f << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
    << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
    << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = xmin + (xmax - xmin) * i / 5.0;
    double yv = ymin + (ymax - ymin) * i / 5.0;
    f << "<line x1=\"" << px(xv) << "\" y1=\"" << kHeight - kBottom
      << "\" x2=\"" << px(xv) << "\" y2=\"" << kHeight - kBottom + 5
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kBottom + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt(xv) << "</text>\n";
    f << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(yv) << "\" x2=\""
      << kLeft << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(yv) << "</text>\n";
  }
  f << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
    << kHeight - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << x_label_ << "</text>\n";
  f << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       "transform=\"rotate(-90 16 "
    << (kTop + kHeight - kBottom) / 2 << ")\">" << y_label_ << "</text>\n";

  double legend_y = kTop + 6;
  for (const auto& s : series_) {
    if (s.scatter) {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        double r = i < s.radii.size() ? s.radii[i] : 3.0;
        f << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
          << "\" r=\"" << r << "\" fill=\"" << s.color
          << "\" fill-opacity=\"0.45\"/>\n";
      }
    } else {
      f << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        f << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
      f << "\"/>\n";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        f << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      if (!s.label.empty()) {
        f << "<line x1=\"" << kWidth - kRight - 110 << "\" y1=\"" << legend_y
          << "\" x2=\"" << kWidth - kRight - 86 << "\" y2=\"" << legend_y
          << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << kWidth - kRight - 80 << "\" y=\"" << legend_y + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
          << "</text>\n";
        legend_y += 16;
      }
    }
  }
  f << "</svg>\n";
}

}  // namespace stretto
