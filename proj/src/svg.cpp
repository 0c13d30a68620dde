#include "kstep/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kstep/errors.hpp"

namespace kstep::svg {

namespace {

constexpr double kMarginLeft = 56, kMarginRight = 16, kMarginTop = 30, kMarginBottom = 44;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// About five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0) || !std::isfinite(span)) return {lo};
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double step = (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  const double first = std::ceil(lo / step - 1e-9);
  for (double k = first; k * step <= hi + 1e-9 * step; k += 1.0) {
    const double v = k * step;
    ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return ticks;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dash_attr(const std::string& dash) { return dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\""; }

}  // namespace

Plot::Plot(double width, double height, std::string title) : width_(width), height_(height), title_(std::move(title)) {}

Plot& Plot::xrange(double lo, double hi) {
  x0_ = lo;
  x1_ = hi > lo ? hi : lo + 1.0;
  return *this;
}

Plot& Plot::yrange(double lo, double hi) {
  y0_ = lo;
  y1_ = hi > lo ? hi : lo + 1.0;
  return *this;
}

Plot& Plot::labels(std::string x, std::string y) {
  xlabel_ = std::move(x);
  ylabel_ = std::move(y);
  return *this;
}

double Plot::sx(double x) const {
  return kMarginLeft + (x - x0_) / (x1_ - x0_) * (width_ - kMarginLeft - kMarginRight);
}

double Plot::sy(double y) const {
  return height_ - kMarginBottom - (y - y0_) / (y1_ - y0_) * (height_ - kMarginTop - kMarginBottom);
}

Plot& Plot::line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double width,
                 const std::string& dash, double opacity) {
  std::string pts;
  for (Eigen::Index i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!std::isfinite(x(i)) || !std::isfinite(y(i))) continue;
    pts += num(sx(x(i))) + "," + num(sy(y(i))) + " ";
  }
  items_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
                   "\" stroke-opacity=\"" + num(opacity) + "\"" + dash_attr(dash) + " points=\"" + pts + "\"/>");
  return *this;
}

Plot& Plot::band(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                 const std::string& fill, double opacity) {
  std::string pts;
  for (Eigen::Index i = 0; i < x.size(); ++i) pts += num(sx(x(i))) + "," + num(sy(hi(i))) + " ";
  for (Eigen::Index i = x.size(); i-- > 0;) pts += num(sx(x(i))) + "," + num(sy(lo(i))) + " ";
  items_.push_back("<polygon fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\" stroke=\"none\" points=\"" +
                   pts + "\"/>");
  return *this;
}

Plot& Plot::points(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double radius) {
  for (Eigen::Index i = 0; i < std::min(x.size(), y.size()); ++i) {
    items_.push_back("<circle cx=\"" + num(sx(x(i))) + "\" cy=\"" + num(sy(y(i))) + "\" r=\"" + num(radius) +
                     "\" fill=\"" + color + "\"/>");
  }
  return *this;
}

Plot& Plot::bars(const Eigen::VectorXd& edges, const Eigen::VectorXd& heights, const std::string& fill) {
  for (Eigen::Index i = 0; i < heights.size(); ++i) {
    const double left = sx(edges(i));
    const double right = sx(edges(i + 1));
    const double top = sy(heights(i));
    const double base = sy(std::max(y0_, 0.0));
    items_.push_back("<rect x=\"" + num(left) + "\" y=\"" + num(std::min(top, base)) + "\" width=\"" +
                     num(std::max(0.0, right - left)) + "\" height=\"" + num(std::abs(base - top)) + "\" fill=\"" +
                     fill + "\" stroke=\"#fff\" stroke-width=\"0.5\"/>");
  }
  return *this;
}

Plot& Plot::hline(double y, const std::string& color, const std::string& dash) {
  items_.push_back("<line x1=\"" + num(sx(x0_)) + "\" x2=\"" + num(sx(x1_)) + "\" y1=\"" + num(sy(y)) + "\" y2=\"" +
                   num(sy(y)) + "\" stroke=\"" + color + "\"" + dash_attr(dash) + "/>");
  return *this;
}

Plot& Plot::legend(const std::string& text, const std::string& color, const std::string& dash) {
  legend_.emplace_back(text, "stroke=\"" + color + "\"" + dash_attr(dash));
  return *this;
}

std::string Plot::body(const std::string& clip_id) const {
  std::ostringstream os;
  const double left = kMarginLeft, right = width_ - kMarginRight;
  const double top = kMarginTop, bottom = height_ - kMarginBottom;
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(width_) << "\" height=\"" << num(height_) << "\" fill=\"#fff\"/>\n";
  os << "<defs><clipPath id=\"" << clip_id << "\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
     << num(right - left) << "\" height=\"" << num(bottom - top) << "\"/></clipPath></defs>\n";
  os << "<g clip-path=\"url(#" << clip_id << ")\">\n";
  for (const auto& item : items_) os << item << '\n';
  os << "</g>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left) << "\" height=\""
     << num(bottom - top) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double xv : nice_ticks(x0_, x1_)) {
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(bottom + 14) << "\" font-size=\"10\" text-anchor=\"middle\">"
       << tick_label(xv) << "</text>\n";
  }
  for (double yv : nice_ticks(y0_, y1_)) {
    os << "<text x=\"" << num(left - 4) << "\" y=\"" << num(sy(yv) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
       << tick_label(yv) << "</text>\n";
  }
  if (!title_.empty()) {
    os << "<text x=\"" << num(width_ / 2) << "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">" << escape(title_)
       << "</text>\n";
  }
  if (!xlabel_.empty()) {
    os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(height_ - 10)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(xlabel_) << "</text>\n";
  }
  if (!ylabel_.empty()) {
    os << "<text transform=\"translate(14," << num((top + bottom) / 2)
       << ") rotate(-90)\" font-size=\"11\" text-anchor=\"middle\">" << escape(ylabel_) << "</text>\n";
  }
  double ly = top + 12;
  for (const auto& [text, style] : legend_) {
    os << "<line x1=\"" << num(right - 120) << "\" x2=\"" << num(right - 100) << "\" y1=\"" << num(ly - 4) << "\" y2=\""
       << num(ly - 4) << "\" " << style << " stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(right - 95) << "\" y=\"" << num(ly) << "\" font-size=\"10\">" << escape(text)
       << "</text>\n";
    ly += 14;
  }
  return os.str();
}

std::string Plot::str() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
     << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_) << "\" font-family=\"sans-serif\">\n"
     << body("c0") << "</svg>\n";
  return os.str();
}

void Plot::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << str();
}

Figure::Figure(int cols, std::string title) : cols_(std::max(1, cols)), title_(std::move(title)) {}

Plot& Figure::add(Plot plot) {
  panels_.push_back(std::move(plot));
  return panels_.back();
}

std::string Figure::str() const {
  double pw = 0, ph = 0;
  for (const auto& p : panels_) {
    pw = std::max(pw, p.width());
    ph = std::max(ph, p.height());
  }
  const int rows = static_cast<int>((panels_.size() + static_cast<std::size_t>(cols_) - 1) / static_cast<std::size_t>(cols_));
  const double head = title_.empty() ? 0.0 : 28.0;
  const double w = pw * cols_;
  const double h = ph * rows + head;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" viewBox=\"0 0 "
     << num(w) << " " << num(h) << "\" font-family=\"sans-serif\">\n";
  if (!title_.empty()) {
    os << "<text x=\"" << num(w / 2) << "\" y=\"20\" font-size=\"15\" text-anchor=\"middle\">" << escape(title_)
       << "</text>\n";
  }
  for (std::size_t i = 0; i < panels_.size(); ++i) {
    const double x = pw * static_cast<double>(i % static_cast<std::size_t>(cols_));
    const double y = head + ph * static_cast<double>(i / static_cast<std::size_t>(cols_));
    os << "<g transform=\"translate(" << num(x) << "," << num(y) << ")\">\n" << panels_[i].body("c" + std::to_string(i)) << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void Figure::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << str();
}

Eigen::VectorXd histogram(const Eigen::VectorXd& values, double lo, double hi, int bins) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    auto b = static_cast<int>(std::floor((values(i) - lo) / (hi - lo) * bins));
    counts(std::clamp(b, 0, bins - 1)) += 1.0;
  }
  return counts;
}

}  // namespace kstep::svg
