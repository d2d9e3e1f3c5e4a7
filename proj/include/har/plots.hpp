#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace har {

struct BarItem {
  std::string label;
  double value = 0.0;
};

/// Vertical bar chart with a zero baseline; positive bars blue, negative
/// red (shift-reduction sign convention).
void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<BarItem>& items, const std::string& y_label);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with markers; one polyline per series.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<Series>& series, const std::string& x_label,
                          const std::string& y_label);

}  // namespace har
