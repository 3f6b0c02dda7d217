#ifndef STRETTO_SVG_HPP
#define STRETTO_SVG_HPP

#include <string>
#include <vector>

namespace stretto {

// Minimal standalone SVG chart writer; plotting is presentation-only and
// kept out of any acceptance logic.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& label, const std::string& color);
  // radius per point, in pixels
  void add_scatter(const std::vector<double>& xs, const std::vector<double>& ys,
                   const std::vector<double>& radii, const std::string& color);

  void save(const std::string& path) const;

 private:
  struct Series {
    std::vector<double> xs, ys, radii;
    std::string label, color;
    bool scatter = false;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace stretto

#endif
