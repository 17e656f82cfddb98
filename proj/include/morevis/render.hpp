#pragma once

// Static SVG rendering of a layout: ribbons, hatched spurious links, the
// spurious-count bar chart and the spatial color bar.

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morevis/dataset.hpp"
#include "morevis/layout.hpp"

namespace morevis {

struct Color {
  double r = 0, g = 0, b = 0;  // 0..255
  friend bool operator==(const Color&, const Color&) = default;
};

inline std::string to_hex(const Color& c) {
  auto byte = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0))); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", byte(c.r), byte(c.g), byte(c.b));
  return buf;
}

inline Color mix(const Color& a, const Color& b, double t) {
  return {a.r + t * (b.r - a.r), a.g + t * (b.g - a.g), a.b + t * (b.b - a.b)};
}

enum class ColorMode { identity_palette, attribute, spatial_colormap };

inline ColorMode parse_color_mode(std::string_view s) {
  if (s == "identity" || s == "identity-palette") return ColorMode::identity_palette;
  if (s == "attribute") return ColorMode::attribute;
  if (s == "spatial" || s == "spatial-colormap") return ColorMode::spatial_colormap;
  throw ParseError("unknown color mode '" + std::string(s) + "'");
}

/// Corners of the 2D color map, in the order bottom-left, bottom-right,
/// top-left, top-right.
using ColormapCorners = std::array<Color, 4>;

inline constexpr ColormapCorners kDefaultCorners{{{0, 128, 128}, {0xF0, 0xE4, 0x42}, {0x5E, 0x3C, 0x99}, {0xE7, 0x29, 0x8A}}};

struct RenderSpec {
  int width = 1200;
  int height = 600;
  ColorMode color_mode = ColorMode::spatial_colormap;
  std::optional<std::string> attribute_name;
  ColormapCorners colormap_corners = kDefaultCorners;

  void check() const {
    if (width < 100 || height < 100) throw ValidationError("render size must be at least 100x100 pixels");
    if ((color_mode == ColorMode::attribute) != attribute_name.has_value())
      throw ValidationError("attribute name is required exactly when coloring by attribute");
  }
};

/// Bilinear blend of the corner colors at `p`, normalized to the dataset's
/// bounding box and clamped to it.
inline Color spatial_color(const BoundingBox& box, Point p, const ColormapCorners& corners = kDefaultCorners) {
  auto unit = [](double v, double lo, double hi) { return hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5; };
  const double u = unit(p.x, box.min.x, box.max.x);
  const double v = unit(p.y, box.min.y, box.max.y);
  return mix(mix(corners[0], corners[1], u), mix(corners[2], corners[3], u), v);
}

inline Color spatial_color(const MovingRegionDataset& ds, Point p, const ColormapCorners& corners = kDefaultCorners) {
  return spatial_color(ds.bounds(), p, corners);
}

/// Categorical palette (Tableau 10).
inline Color palette_color(std::size_t i) {
  static constexpr Color kPalette[] = {{0x4e, 0x79, 0xa7}, {0xf2, 0x8e, 0x2b}, {0xe1, 0x57, 0x59}, {0x76, 0xb7, 0xb2},
                                       {0x59, 0xa1, 0x4f}, {0xed, 0xc9, 0x48}, {0xb0, 0x7a, 0xa1}, {0xff, 0x9d, 0xa7},
                                       {0x9c, 0x75, 0x5f}, {0xba, 0xb0, 0xac}};
  return kPalette[i % std::size(kPalette)];
}

/// Sequential ramp for numeric attributes, t in [0, 1].
inline Color ramp_color(double t) {
  static constexpr Color kStops[] = {{0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x90, 0x8d}, {0x5d, 0xc8, 0x63},
                                     {0xfd, 0xe7, 0x25}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(t));
  return mix(kStops[i], kStops[i + 1], t - static_cast<double>(i));
}

/// Fill color of every (object, timestep) rect.
inline std::map<std::pair<std::string, int>, Color> rect_colors(const Layout& layout, const MovingRegionDataset& ds,
                                                                const RenderSpec& spec) {
  spec.check();
  std::map<std::pair<std::string, int>, Color> out;
  const auto box = ds.bounds();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.objects.size(); ++i) index[ds.objects[i].id] = i;
  auto observation = [&](const RibbonRect& r) -> const RegionObservation& {
    const auto it = index.find(r.object_id);
    if (it == index.end()) throw ValidationError("layout object '" + r.object_id + "' is not in the dataset", r.object_id);
    const auto& obs = ds.objects[it->second].observations;
    const auto o = obs.find(r.timestep);
    if (o == obs.end()) throw ValidationError("layout rect has no matching observation", r.object_id);
    return o->second;
  };

  if (spec.color_mode == ColorMode::attribute) {
    const auto* attr = ds.attribute(*spec.attribute_name);
    if (!attr) throw ValidationError("unknown attribute '" + *spec.attribute_name + "'");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::map<std::string, std::size_t> categories;
    for (const auto& o : ds.objects)
      for (const auto& [t, obs] : o.observations) {
        const auto it = obs.attributes.find(attr->name);
        if (it == obs.attributes.end()) continue;
        if (const auto* v = std::get_if<double>(&it->second)) {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        } else {
          categories.emplace(std::get<std::string>(it->second), 0);
        }
      }
    std::size_t next = 0;
    for (auto& [name, i] : categories) i = next++;
    for (const auto& r : layout.rects) {
      const auto& obs = observation(r);
      const auto it = obs.attributes.find(attr->name);
      Color c{0xbb, 0xbb, 0xbb};  // missing value
      if (it != obs.attributes.end()) {
        if (const auto* v = std::get_if<double>(&it->second))
          c = ramp_color(hi > lo ? (*v - lo) / (hi - lo) : 0.5);
        else
          c = palette_color(categories.at(std::get<std::string>(it->second)));
      }
      out[{r.object_id, r.timestep}] = c;
    }
    return out;
  }
  for (const auto& r : layout.rects) {
    const auto& obs = observation(r);
    out[{r.object_id, r.timestep}] = spec.color_mode == ColorMode::identity_palette
                                         ? palette_color(index.at(r.object_id))
                                         : spatial_color(box, centroid(obs.polygon), spec.colormap_corners);
  }
  return out;
}

/// Pixel geometry shared by the renderer and its tests.
struct PlotFrame {
  double left = 0, top = 0, width = 0, height = 0;  // plot area
  double y_lo = 0, y_hi = 1;                        // layout units
  double column_width = 0;
  double rect_width = 0;
  std::map<int, double> column_center;

  double py(double y) const { return top + (y_hi - y) / (y_hi - y_lo) * height; }
  double pixels_per_unit() const { return height / (y_hi - y_lo); }
};

inline PlotFrame plot_frame(const Layout& layout, const RenderSpec& spec) {
  PlotFrame f;
  const double colorbar = 28, bars = 70, margin = 20, axis = 30;
  f.left = margin + colorbar + 12;
  f.top = margin + bars + 10;
  f.width = spec.width - f.left - margin;
  f.height = spec.height - f.top - axis;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : layout.rects) {
    lo = std::min(lo, r.bottom());
    hi = std::max(hi, r.top());
  }
  if (!(hi > lo)) {
    lo = 0;
    hi = 1;
  }
  f.y_lo = lo;
  f.y_hi = hi;
  const auto T = std::max<std::size_t>(1, layout.timesteps.size());
  f.column_width = f.width / static_cast<double>(T);
  f.rect_width = layout.config.column_fill * f.column_width;
  for (std::size_t k = 0; k < layout.timesteps.size(); ++k)
    f.column_center[layout.timesteps[k]] = f.left + (static_cast<double>(k) + 0.5) * f.column_width;
  return f;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline constexpr std::size_t kColorbarCells = 120;

/// One color per vertical cell of the plot: the overlap-weighted blend of the
/// colors of every rect covering that cell, over all timesteps.
inline std::vector<std::optional<Color>> colorbar_cells(const Layout& layout,
                                                        const std::map<std::pair<std::string, int>, Color>& colors,
                                                        double y_lo, double y_hi, std::size_t cells = kColorbarCells) {
  std::vector<Color> sum(cells);
  std::vector<double> weight(cells, 0.0);
  const double step = (y_hi - y_lo) / static_cast<double>(cells);
  for (const auto& r : layout.rects) {
    const auto& c = colors.at({r.object_id, r.timestep});
    for (std::size_t k = 0; k < cells; ++k) {
      const double lo = y_lo + step * static_cast<double>(k);
      const double w = std::max(0.0, std::min(lo + step, r.top()) - std::max(lo, r.bottom()));
      if (w <= 0) continue;
      sum[k].r += w * c.r;
      sum[k].g += w * c.g;
      sum[k].b += w * c.b;
      weight[k] += w;
    }
  }
  std::vector<std::optional<Color>> out(cells);
  for (std::size_t k = 0; k < cells; ++k)
    if (weight[k] > 0) out[k] = Color{sum[k].r / weight[k], sum[k].g / weight[k], sum[k].b / weight[k]};
  return out;
}

inline std::string render_svg(const Layout& layout, const MovingRegionDataset& ds, const RenderSpec& spec = {}) {
  using detail::fmt;
  const auto colors = rect_colors(layout, ds, spec);
  const auto f = plot_frame(layout, spec);
  std::map<std::pair<std::string, int>, const RibbonRect*> rect_at;
  for (const auto& r : layout.rects) rect_at[{r.object_id, r.timestep}] = &r;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
         std::to_string(spec.height) + "\">\n";
  svg += "<defs>\n<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" "
         "patternTransform=\"rotate(45)\"><path d=\"M 0 0 L 0 6\" stroke=\"#d62728\" stroke-width=\"2\"/></pattern>\n"
         "</defs>\n";
  svg += "<path class=\"background\" d=\"M 0 0 H " + std::to_string(spec.width) + " V " + std::to_string(spec.height) +
         " H 0 Z\" fill=\"#ffffff\"/>\n";

  // Ribbons between consecutive observations.
  svg += "<g class=\"bands\">\n";
  for (const auto& l : layout.links) {
    const auto* a = rect_at.at({l.object_id, l.from});
    const auto* b = rect_at.at({l.object_id, l.to});
    const double x1 = f.column_center.at(l.from) + 0.5 * f.rect_width;
    const double x2 = f.column_center.at(l.to) - 0.5 * f.rect_width;
    const std::string d = "M " + fmt(x1) + " " + fmt(f.py(a->top())) + " L " + fmt(x2) + " " + fmt(f.py(b->top())) +
                          " L " + fmt(x2) + " " + fmt(f.py(b->bottom())) + " L " + fmt(x1) + " " +
                          fmt(f.py(a->bottom())) + " Z";
    const std::string color = to_hex(colors.at({l.object_id, l.from}));
    svg += "<path class=\"" + std::string(l.spurious() ? "band spurious" : "band") + "\" data-object=\"" +
           detail::xml_escape(l.object_id) + "\" data-from=\"" + std::to_string(l.from) + "\" data-to=\"" +
           std::to_string(l.to) + "\" d=\"" + d + "\" fill=\"" + (l.spurious() ? "url(#hatch)" : color) +
           "\" fill-opacity=\"0.55\" stroke=\"" + color + "\" stroke-width=\"0.5\"/>\n";
  }
  svg += "</g>\n";

  // Rectangles; the only <rect> elements in the document.
  svg += "<g class=\"rects\">\n";
  for (const auto& r : layout.rects) {
    svg += "<rect data-object=\"" + detail::xml_escape(r.object_id) + "\" data-t=\"" + std::to_string(r.timestep) +
           "\" x=\"" + fmt(f.column_center.at(r.timestep) - 0.5 * f.rect_width) + "\" y=\"" + fmt(f.py(r.top())) +
           "\" width=\"" + fmt(f.rect_width) + "\" height=\"" + fmt(r.height * f.pixels_per_unit()) + "\" fill=\"" +
           to_hex(colors.at({r.object_id, r.timestep})) + "\" stroke=\"#333333\" stroke-width=\"0.3\"/>\n";
  }
  svg += "</g>\n";

  // Spurious intersections per timestep.
  std::size_t max_count = 0;
  for (const auto& s : layout.slices) max_count = std::max(max_count, s.spurious_count());
  const double bar_bottom = f.top - 10, bar_height = 70;
  svg += "<g class=\"bars\" data-max=\"" + std::to_string(max_count) + "\">\n";
  for (const auto& s : layout.slices) {
    const std::size_t n = s.spurious_count();
    const double h = max_count ? bar_height * static_cast<double>(n) / static_cast<double>(max_count) : 0.0;
    const double x = f.column_center.at(s.timestep) - 0.5 * f.rect_width;
    svg += "<path class=\"bar\" data-t=\"" + std::to_string(s.timestep) + "\" data-count=\"" + std::to_string(n) +
           "\" d=\"M " + fmt(x) + " " + fmt(bar_bottom) + " h " + fmt(f.rect_width) + " v " + fmt(-h) + " h " +
           fmt(-f.rect_width) + " Z\" fill=\"#d62728\"/>\n";
  }
  svg += "</g>\n";

  // Color bar next to the y axis.
  const auto cells = colorbar_cells(layout, colors, f.y_lo, f.y_hi);
  const double cell_px = f.height / static_cast<double>(cells.size());
  svg += "<g class=\"colorbar\">\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!cells[k]) continue;
    const double y_bottom = f.top + f.height - cell_px * static_cast<double>(k);
    svg += "<path d=\"M 20.00 " + fmt(y_bottom) + " h 28.00 v " + fmt(-cell_px) + " h -28.00 Z\" fill=\"" +
           to_hex(*cells[k]) + "\"/>\n";
  }
  svg += "</g>\n";

  // Timestep labels, thinned to at most ~25.
  const std::size_t T = layout.timesteps.size();
  const std::size_t every = std::max<std::size_t>(1, (T + 24) / 25);
  svg += "<g class=\"axis\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333333\">\n";
  for (std::size_t k = 0; k < T; k += every) {
    const int t = layout.timesteps[k];
    svg += "<text x=\"" + fmt(f.column_center.at(t)) + "\" y=\"" + fmt(f.top + f.height + 18) + "\">" +
           std::to_string(t) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace morevis
