#include "fkrige/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "fkrige/error.hpp"

namespace fkrige {

namespace {

constexpr double kLeft = 76, kRight = 20, kTop = 36, kBottom = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
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

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max, int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width), height_(height) {
  if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
  if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
}

void SvgPlot::title(const std::string& text) { title_ = text; }
void SvgPlot::x_label(const std::string& text) { x_label_ = text; }
void SvgPlot::y_label(const std::string& text) { y_label_ = text; }

double SvgPlot::px(double x) const {
  return kLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kLeft - kRight);
}

double SvgPlot::py(double y) const {
  return height_ - kBottom - (y - y_min_) / (y_max_ - y_min_) * (height_ - kTop - kBottom);
}

void SvgPlot::polyline(std::span<const double> xs, std::span<const double> ys, const std::string& color,
                       double stroke_width, bool dashed) {
  require(xs.size() == ys.size(), "SvgPlot::polyline: length mismatch");
  body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(stroke_width) << "\"";
  if (dashed) body_ << " stroke-dasharray=\"6,4\"";
  body_ << " points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) body_ << (i ? " " : "") << num(px(xs[i])) << ',' << num(py(ys[i]));
  body_ << "\"/>\n";
}

void SvgPlot::rect(double x0, double y0, double x1, double y1, const std::string& fill,
                   const std::string& stroke) {
  const double left = std::min(px(x0), px(x1)), right = std::max(px(x0), px(x1));
  const double top = std::min(py(y0), py(y1)), bottom = std::max(py(y0), py(y1));
  body_ << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(bottom - top) << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void SvgPlot::line(double x0, double y0, double x1, double y1, const std::string& color, double stroke_width) {
  body_ << "<line x1=\"" << num(px(x0)) << "\" y1=\"" << num(py(y0)) << "\" x2=\"" << num(px(x1))
        << "\" y2=\"" << num(py(y1)) << "\" stroke=\"" << color << "\" stroke-width=\"" << num(stroke_width)
        << "\"/>\n";
}

void SvgPlot::text(double x, double y, const std::string& content, int size) {
  body_ << "<text x=\"" << num(px(x)) << "\" y=\"" << num(py(y)) << "\" font-size=\"" << size
        << "\" text-anchor=\"middle\">" << escape(content) << "</text>\n";
}

std::string SvgPlot::str() const {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
      << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = px(x_min_), x1 = px(x_max_), y0 = py(y_min_), y1 = py(y_max_);
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_min_ + (x_max_ - x_min_) * k / 4.0;
    const double yv = y_min_ + (y_max_ - y_min_) * k / 4.0;
    out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y0 + 16) << "\" font-size=\"10\" text-anchor=\"middle\">"
        << tick(xv) << "</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(yv) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
        << tick(yv) << "</text>\n";
  }
  if (!title_.empty())
    out << "<text x=\"" << width_ / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" << escape(title_)
        << "</text>\n";
  if (!x_label_.empty())
    out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << height_ - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(x_label_) << "</text>\n";
  if (!y_label_.empty())
    out << "<text x=\"14\" y=\"" << num((y0 + y1) / 2) << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num((y0 + y1) / 2) << ")\">" << escape(y_label_) << "</text>\n";
  out << body_.str();
  out << "</svg>\n";
  return out.str();
}

void SvgPlot::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << str();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace fkrige
