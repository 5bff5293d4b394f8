#pragma once

// A very small static plotter: one panel with axes, polylines, rectangles
// and text, written as standalone SVG.

#include <filesystem>
#include <span>
#include <sstream>
#include <string>

namespace fkrige {

class SvgPlot {
 public:
  SvgPlot(double x_min, double x_max, double y_min, double y_max, int width = 640, int height = 400);

  void title(const std::string& text);
  void x_label(const std::string& text);
  void y_label(const std::string& text);

  void polyline(std::span<const double> xs, std::span<const double> ys, const std::string& color,
                double stroke_width = 1.5, bool dashed = false);
  /// Rectangle in data coordinates.
  void rect(double x0, double y0, double x1, double y1, const std::string& fill,
            const std::string& stroke = "none");
  void line(double x0, double y0, double x1, double y1, const std::string& color, double stroke_width = 1.0);
  void text(double x, double y, const std::string& content, int size = 11);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  double px(double x) const;
  double py(double y) const;

  double x_min_, x_max_, y_min_, y_max_;
  int width_, height_;
  std::string title_, x_label_, y_label_;
  std::ostringstream body_;
};

}  // namespace fkrige
