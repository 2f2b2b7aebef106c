#pragma once

#include <array>
#include <string>
#include <vector>

#include "scenmap/aggregate.hpp"

namespace scenmap::vizmap {

struct Range {
  double min = -1.0;
  double max = 1.0;
};

struct MapOptions {
  std::string x;
  std::string y;
  Range x_range;
  Range y_range;
  bool show_regression = true;
  bool show_diagonal = true;
  // top-left, top-right, bottom-left, bottom-right
  std::array<std::string, 4> quadrant_labels;
  bool error_bars = false;
  int width = 640;
  int height = 640;
  std::string title;

  void validate() const;
};

/// Plot area inside the canvas and the affine data -> pixel map.
struct Viewport {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
  Range x;
  Range y;

  double px(double data_x) const { return left + (data_x - x.min) / (x.max - x.min) * width; }
  double py(double data_y) const { return top + (y.max - data_y) / (y.max - y.min) * height; }
  double data_x(double pixel_x) const { return x.min + (pixel_x - left) / width * (x.max - x.min); }
  double data_y(double pixel_y) const { return y.max - (pixel_y - top) / height * (y.max - y.min); }
};

Viewport map_viewport(const MapOptions& options);

/// Two-dimensional topic map. Element ids: topic-<index>, regression-line,
/// diagonal, axis-x, axis-y.
std::string scatter_map(const aggregate::TopicSummary& summary, const MapOptions& options);

struct ProfileOptions {
  int width = 720;
  int row_height = 22;
  std::string title;
};

/// One row per topic with a mean marker and +-1 sd whisker per dimension,
/// ordered by the first dimension's mean (descending, ties by topic index).
std::string profile_chart(const aggregate::TopicSummary& summary, const std::vector<std::string>& dimensions,
                          const ProfileOptions& options = {});

/// Topic order used by `profile_chart`.
std::vector<int> profile_order(const aggregate::TopicSummary& summary, const std::string& first_dimension);

}  // namespace scenmap::vizmap
