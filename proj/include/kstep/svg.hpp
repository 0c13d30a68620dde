#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace kstep::svg {

/// A single set of axes rendered to SVG. Data coordinates map linearly
/// into the plotting area; callers set the ranges.
class Plot {
 public:
  Plot(double width = 560, double height = 380, std::string title = {});

  Plot& xrange(double lo, double hi);
  Plot& yrange(double lo, double hi);
  Plot& labels(std::string x, std::string y);

  Plot& line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color = "#000",
             double width = 1.5, const std::string& dash = {}, double opacity = 1.0);
  Plot& band(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
             const std::string& fill = "#bbb", double opacity = 0.6);
  Plot& points(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color = "#000",
               double radius = 3.0);
  /// Histogram bars: edges has one more entry than heights.
  Plot& bars(const Eigen::VectorXd& edges, const Eigen::VectorXd& heights, const std::string& fill = "#888");
  Plot& hline(double y, const std::string& color = "#999", const std::string& dash = "4,3");
  Plot& legend(const std::string& text, const std::string& color, const std::string& dash = {});

  double width() const { return width_; }
  double height() const { return height_; }

  /// Elements only, for embedding in a Figure.
  std::string body(const std::string& clip_id) const;
  std::string str() const;
  void save(const std::string& path) const;

 private:
  double sx(double x) const;
  double sy(double y) const;

  double width_, height_;
  std::string title_, xlabel_, ylabel_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::vector<std::string> items_;
  std::vector<std::pair<std::string, std::string>> legend_;  // text, style
};

/// Grid of plots in one document.
class Figure {
 public:
  Figure(int cols, std::string title = {});
  Plot& add(Plot plot);
  std::string str() const;
  void save(const std::string& path) const;

 private:
  int cols_;
  std::string title_;
  std::vector<Plot> panels_;
};

/// Histogram counts of `values` over `bins` equal-width bins on [lo, hi].
Eigen::VectorXd histogram(const Eigen::VectorXd& values, double lo, double hi, int bins);

}  // namespace kstep::svg
