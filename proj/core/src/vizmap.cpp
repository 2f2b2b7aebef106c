#include "scenmap/vizmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "numfmt.hpp"
#include "scenmap/error.hpp"
#include "scenmap/stats.hpp"

namespace scenmap::vizmap {

namespace {

constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 28.0;
constexpr double kMarginTop = 48.0;
constexpr double kMarginBottom = 64.0;
constexpr double kCharWidth = 6.2;  // rough advance at font-size 11
constexpr double kLabelHeight = 12.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Pixel coordinates; six decimals keep the inverse map exact to well below 1e-6.
std::string px(double v) { return detail::format_fixed(v, 6); }

std::string percent(double v) {
  const double pct = std::round(v * 1000.0) / 10.0;
  if (pct == std::round(pct)) return fmt::format("{:.0f}%", pct == 0.0 ? 0.0 : pct);
  return fmt::format("{:.1f}%", pct);
}

std::vector<double> ticks(const Range& r) {
  std::vector<double> out;
  for (int i = 0; i <= 4; ++i) out.push_back(r.min + (r.max - r.min) * i / 4.0);
  return out;
}

std::string svg_open(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      detail::format_sig(width), detail::format_sig(height));
}

struct Box {
  double x0, y0, x1, y1;
  bool overlaps(const Box& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
};

struct Point {
  const aggregate::TopicRow* row;
  double x, y;
  aggregate::Stat x_sd, y_sd;
};

}  // namespace

void MapOptions::validate() const {
  if (x.empty() || y.empty()) throw Error(ErrorKind::invalid_input, "map needs both an x and a y dimension");
  if (x == y) throw Error(ErrorKind::invalid_input, fmt::format("x and y are both '{}'", x));
  if (!(x_range.max > x_range.min) || !(y_range.max > y_range.min)) {
    throw Error(ErrorKind::invalid_input, "axis ranges must have max > min");
  }
  if (width < 200 || height < 200) throw Error(ErrorKind::invalid_input, "canvas must be at least 200x200");
}

Viewport map_viewport(const MapOptions& options) {
  Viewport v;
  v.left = kMarginLeft;
  v.top = kMarginTop;
  v.width = options.width - kMarginLeft - kMarginRight;
  v.height = options.height - kMarginTop - kMarginBottom;
  v.x = options.x_range;
  v.y = options.y_range;
  return v;
}

std::string scatter_map(const aggregate::TopicSummary& summary, const MapOptions& options) {
  options.validate();
  const int xd = summary.dimension(options.x);
  const int yd = summary.dimension(options.y);
  if (xd < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", options.x));
  if (yd < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", options.y));

  std::vector<Point> points;
  for (const auto& row : summary.rows) {
    const auto& cx = row.cells[static_cast<std::size_t>(xd)];
    const auto& cy = row.cells[static_cast<std::size_t>(yd)];
    if (cx.mean && cy.mean) points.push_back(Point{&row, *cx.mean, *cy.mean, cx.sd, cy.sd});
  }
  if (points.empty()) {
    throw Error(ErrorKind::invalid_input, fmt::format("no topic has defined means on both '{}' and '{}'", options.x, options.y));
  }

  const Viewport vp = map_viewport(options);
  const double right = vp.left + vp.width;
  const double bottom = vp.top + vp.height;
  std::ostringstream svg;
  svg << svg_open(options.width, options.height);
  svg << fmt::format("<defs><clipPath id=\"plot-area\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath></defs>\n",
                     px(vp.left), px(vp.top), px(vp.width), px(vp.height));
  const std::string title = options.title.empty() ? fmt::format("{} vs. {}", options.y, options.x) : options.title;
  svg << fmt::format("<text id=\"title\" x=\"{}\" y=\"28\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                     px(options.width / 2.0), xml_escape(title));

  // Quadrants split at the origin when it lies inside the ranges, else at the centre.
  const double split_x = (vp.x.min < 0.0 && vp.x.max > 0.0) ? 0.0 : (vp.x.min + vp.x.max) / 2.0;
  const double split_y = (vp.y.min < 0.0 && vp.y.max > 0.0) ? 0.0 : (vp.y.min + vp.y.max) / 2.0;
  const double qx = vp.px(split_x);
  const double qy = vp.py(split_y);
  struct Quadrant {
    const char* id;
    double x0, y0, x1, y1;
    const char* fill;
  };
  const Quadrant quadrants[] = {
      {"quadrant-top-left", vp.left, vp.top, qx, qy, "#f3f7fb"},
      {"quadrant-top-right", qx, vp.top, right, qy, "#fafafa"},
      {"quadrant-bottom-left", vp.left, qy, qx, bottom, "#fafafa"},
      {"quadrant-bottom-right", qx, qy, right, bottom, "#fbf4f3"},
  };
  svg << "<g id=\"quadrants\">\n";
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& q = quadrants[i];
    svg << fmt::format("<rect id=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", q.id, px(q.x0),
                       px(q.y0), px(q.x1 - q.x0), px(q.y1 - q.y0), q.fill);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (options.quadrant_labels[i].empty()) continue;
    const auto& q = quadrants[i];
    const bool left_side = (i % 2 == 0);
    const bool top_side = (i < 2);
    svg << fmt::format("<text id=\"{}-label\" x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#777777\" text-anchor=\"{}\">{}</text>\n",
                       q.id, px(left_side ? q.x0 + 6.0 : q.x1 - 6.0), px(top_side ? q.y0 + 16.0 : q.y1 - 8.0),
                       left_side ? "start" : "end", xml_escape(options.quadrant_labels[i]));
  }
  svg << "</g>\n";

  // Grid, ticks, axes.
  svg << "<g id=\"grid\" stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : ticks(vp.x)) {
    svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", px(vp.px(t)), px(vp.top), px(bottom));
  }
  for (double t : ticks(vp.y)) {
    svg << fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\"/>\n", px(vp.py(t)), px(vp.left), px(right));
  }
  svg << "</g>\n";
  svg << fmt::format("<line id=\"axis-x\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n",
                     px(vp.left), px(bottom), px(right), px(bottom));
  svg << fmt::format("<line id=\"axis-y\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n",
                     px(vp.left), px(vp.top), px(vp.left), px(bottom));
  svg << "<g id=\"ticks\" font-size=\"10\" fill=\"#333333\">\n";
  for (double t : ticks(vp.x)) {
    svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(vp.px(t)), px(bottom + 16.0), percent(t));
  }
  for (double t : ticks(vp.y)) {
    svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(vp.left - 6.0), px(vp.py(t) + 3.5),
                       percent(t));
  }
  svg << "</g>\n";
  svg << fmt::format("<text id=\"axis-x-label\" x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                     px(vp.left + vp.width / 2.0), px(bottom + 40.0), xml_escape(options.x));
  svg << fmt::format(
      "<text id=\"axis-y-label\" x=\"{0}\" y=\"{1}\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
      px(vp.left - 48.0), px(vp.top + vp.height / 2.0), xml_escape(options.y));

  if (options.show_diagonal) {
    const double lo = std::max(vp.x.min, vp.y.min);
    const double hi = std::min(vp.x.max, vp.y.max);
    if (hi > lo) {
      svg << fmt::format(
          "<line id=\"diagonal\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-width=\"1\" "
          "stroke-dasharray=\"4 4\"/>\n",
          px(vp.px(lo)), px(vp.py(lo)), px(vp.px(hi)), px(vp.py(hi)));
    }
  }

  if (options.show_regression) {
    std::optional<std::pair<double, double>> fit;  // intercept, slope
    std::string warning;
    if (points.size() < 2) {
      warning = "regression omitted: fewer than two topics";
    } else if (points.size() == 2) {
      const auto& a = points[0];
      const auto& b = points[1];
      if (a.x == b.x) {
        warning = "regression omitted: topics share one x value";
      } else {
        const double slope = (b.y - a.y) / (b.x - a.x);
        fit.emplace(a.y - slope * a.x, slope);
      }
    } else {
      stats::Column xs, ys;
      for (const auto& p : points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
      }
      try {
        const auto report = stats::ols(ys, {xs}, {options.x});
        fit.emplace(report.intercept, report.coefficients.front());
      } catch (const Error& e) {
        // A flat outcome still has a well-defined horizontal fit.
        if (e.kind() == ErrorKind::degenerate) {
          fit.emplace(*ys.front(), 0.0);
        } else {
          warning = fmt::format("regression omitted: {}", e.what());
        }
      }
    }
    if (fit) {
      const auto [intercept, slope] = *fit;
      svg << fmt::format(
          "<line id=\"regression-line\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
          "clip-path=\"url(#plot-area)\" data-intercept=\"{}\" data-slope=\"{}\"/>\n",
          px(vp.px(vp.x.min)), px(vp.py(intercept + slope * vp.x.min)), px(vp.px(vp.x.max)),
          px(vp.py(intercept + slope * vp.x.max)), detail::format_sig(intercept), detail::format_sig(slope));
      svg << fmt::format(
          "<text id=\"regression-label\" x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#c0392b\" text-anchor=\"end\">"
          "fit: y = {} + {} x</text>\n",
          px(right - 4.0), px(bottom - 6.0), detail::format_sig(intercept, 3), detail::format_sig(slope, 3));
    } else {
      svg << fmt::format("<text id=\"regression-warning\" x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#c0392b\" text-anchor=\"end\">{}</text>\n",
                         px(right - 4.0), px(bottom - 6.0), xml_escape(warning));
    }
  }

  if (options.error_bars) {
    svg << "<g id=\"error-bars\" stroke=\"#7f8c8d\" stroke-width=\"1\" clip-path=\"url(#plot-area)\">\n";
    for (const auto& p : points) {
      if (p.x_sd) {
        svg << fmt::format("<line class=\"error-bar-x\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", px(vp.px(p.x - *p.x_sd)),
                           px(vp.py(p.y)), px(vp.px(p.x + *p.x_sd)), px(vp.py(p.y)));
      }
      if (p.y_sd) {
        svg << fmt::format("<line class=\"error-bar-y\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", px(vp.px(p.x)),
                           px(vp.py(p.y - *p.y_sd)), px(vp.px(p.x)), px(vp.py(p.y + *p.y_sd)));
      }
    }
    svg << "</g>\n";
  }

  // Labels sit above-right of the marker; on collision a single pass flips them below.
  std::vector<Box> placed;
  svg << "<g id=\"topics\">\n";
  for (const auto& p : points) {
    const double mx = vp.px(p.x);
    const double my = vp.py(p.y);
    const std::string label = p.row->label.empty() ? fmt::format("topic {}", p.row->topic) : p.row->label;
    const double w = kCharWidth * static_cast<double>(label.size());
    Box above{mx + 6.0, my - 6.0 - kLabelHeight, mx + 6.0 + w, my - 6.0};
    Box below{mx + 6.0, my + 6.0, mx + 6.0 + w, my + 6.0 + kLabelHeight};
    const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Box& b) { return b.overlaps(above); });
    const bool flip = clash && std::none_of(placed.begin(), placed.end(), [&](const Box& b) { return b.overlaps(below); });
    const Box& box = flip ? below : above;
    placed.push_back(box);

    svg << fmt::format(
        "<circle id=\"topic-{}\" class=\"marker\" cx=\"{}\" cy=\"{}\" r=\"4.5\" fill=\"#2c3e50\" data-x=\"{}\" data-y=\"{}\"/>\n",
        p.row->topic, px(mx), px(my), detail::format_sig(p.x), detail::format_sig(p.y));
    svg << fmt::format("<text id=\"label-{}\" x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#2c3e50\">{}</text>\n", p.row->topic,
                       px(box.x0), px(box.y1 - 2.0), xml_escape(label));
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::vector<int> profile_order(const aggregate::TopicSummary& summary, const std::string& first_dimension) {
  const int d = summary.dimension(first_dimension);
  if (d < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", first_dimension));
  std::vector<const aggregate::TopicRow*> rows;
  for (const auto& r : summary.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [d](const auto* a, const auto* b) {
    const auto& ma = a->cells[static_cast<std::size_t>(d)].mean;
    const auto& mb = b->cells[static_cast<std::size_t>(d)].mean;
    if (ma.has_value() != mb.has_value()) return ma.has_value();  // undefined last
    if (ma && *ma != *mb) return *ma > *mb;
    return a->topic < b->topic;
  });
  std::vector<int> out;
  for (const auto* r : rows) out.push_back(r->topic);
  return out;
}

std::string profile_chart(const aggregate::TopicSummary& summary, const std::vector<std::string>& dimensions,
                          const ProfileOptions& options) {
  if (dimensions.empty()) throw Error(ErrorKind::invalid_input, "profile chart needs at least one dimension");
  std::vector<std::size_t> dims;
  for (const auto& name : dimensions) {
    const int d = summary.dimension(name);
    if (d < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", name));
    dims.push_back(static_cast<std::size_t>(d));
  }
  const auto order = profile_order(summary, dimensions.front());

  constexpr double label_width = 210.0;
  constexpr double top = 56.0;
  const double rows = static_cast<double>(order.size());
  const double height = top + rows * options.row_height + 56.0;
  Viewport vp;
  vp.left = label_width;
  vp.top = top;
  vp.width = options.width - label_width - 30.0;
  vp.height = rows * options.row_height;
  const double bottom = vp.top + vp.height;

  std::ostringstream svg;
  svg << svg_open(options.width, height);
  const std::string title = options.title.empty() ? "Average evaluations per topic" : options.title;
  svg << fmt::format("<text id=\"title\" x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                     px(options.width / 2.0), xml_escape(title));

  svg << "<g id=\"grid\" stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : ticks(vp.x)) {
    svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", px(vp.px(t)), px(vp.top), px(bottom));
  }
  svg << "</g>\n";
  svg << fmt::format("<line id=\"axis-x\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n", px(vp.left),
                     px(vp.top), px(vp.left + vp.width), px(vp.top));
  svg << "<g id=\"ticks\" font-size=\"10\" fill=\"#333333\">\n";
  for (double t : ticks(vp.x)) {
    svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(vp.px(t)), px(vp.top - 6.0), percent(t));
  }
  svg << "</g>\n";

  const double spread = 4.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto* row = summary.find(order[i]);
    const double cy = vp.top + (static_cast<double>(i) + 0.5) * options.row_height;
    const std::string label = row->label.empty() ? fmt::format("topic {}", row->topic) : row->label;
    svg << fmt::format("<g id=\"topic-{}\" class=\"profile-row\">\n", row->topic);
    svg << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n", px(vp.left - 8.0),
                       px(cy + 4.0), xml_escape(label));
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const auto& cell = row->cells[dims[k]];
      if (!cell.mean) continue;
      const double y = cy + (static_cast<double>(k) - (static_cast<double>(dims.size()) - 1.0) / 2.0) * spread;
      const double sd = cell.sd.value_or(0.0);
      const char* color = kPalette[k % std::size(kPalette)];
      svg << fmt::format("<line class=\"whisker\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>\n",
                         px(vp.px(*cell.mean - sd)), px(y), px(vp.px(*cell.mean + sd)), px(y), color);
      svg << fmt::format(
          "<circle class=\"mean\" data-dimension=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"{}\" data-mean=\"{}\" data-sd=\"{}\"/>\n",
          xml_escape(dimensions[k]), px(vp.px(*cell.mean)), px(y), color, detail::format_sig(*cell.mean),
          detail::format_sig(sd));
    }
    svg << "</g>\n";
  }

  svg << "<g id=\"legend\" font-size=\"11\">\n";
  double lx = vp.left;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    svg << fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n", px(lx), px(bottom + 28.0), color);
    svg << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(lx + 8.0), px(bottom + 32.0), xml_escape(dimensions[k]));
    lx += 24.0 + kCharWidth * static_cast<double>(dimensions[k].size());
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace scenmap::vizmap
