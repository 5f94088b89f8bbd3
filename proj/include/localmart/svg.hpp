#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace localmart {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional symmetric error bars, same length as y.
  std::vector<double> err;
};

/// Static line plot with markers and optional error bars.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

/// Histogram of the finite values with `bins` equal-width bins.
std::string svg_histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values,
                          std::size_t bins = 40);

}  // namespace localmart
