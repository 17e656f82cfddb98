#pragma once

// Dataset readers and writers: regions-json, tracking-csv, hurdat-csv.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "morevis/dataset.hpp"

namespace morevis {

enum class DatasetFormat { regions_json, tracking_csv, hurdat_csv };

inline DatasetFormat parse_dataset_format(std::string_view s) {
  if (s == "regions-json") return DatasetFormat::regions_json;
  if (s == "tracking-csv") return DatasetFormat::tracking_csv;
  if (s == "hurdat-csv") return DatasetFormat::hurdat_csv;
  throw ParseError("unknown dataset format '" + std::string(s) + "'");
}

struct LoadOptions {
  /// Replace non-convex or clockwise polygons by their convex hull instead
  /// of rejecting them.
  bool hull = false;
  /// hurdat-csv: width of one timestep window.
  double window_hours = 48.0;
  /// hurdat-csv: drop the year and bin by time of year.
  bool seasonal = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline double require_number(const std::string& s, const std::string& where) {
  if (auto v = to_number(s)) return *v;
  throw ParseError(where + ": expected a number, got '" + s + "'");
}

inline int require_int(const std::string& s, const std::string& where) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(where + ": expected an integer, got '" + s + "'");
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline CsvTable parse_csv(std::string_view text, std::span<const std::string_view> required) {
  CsvTable t;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split_csv(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      if (t.header.size() < required.size()) throw ParseError("csv header has too few columns");
      for (std::size_t i = 0; i < required.size(); ++i)
        if (t.header[i] != required[i])
          throw ParseError("csv header column " + std::to_string(i + 1) + " must be '" + std::string(required[i]) +
                           "', got '" + t.header[i] + "'");
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw ParseError("csv input is empty");
  return t;
}

/// Infers attribute kinds (numeric unless any value fails to parse) and
/// converts the stored values to match.
inline void infer_schema(MovingRegionDataset& ds, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    bool numeric = true;
    for (const auto& o : ds.objects)
      for (const auto& [t, obs] : o.observations)
        if (auto it = obs.attributes.find(name); it != obs.attributes.end() && !std::holds_alternative<double>(it->second))
          numeric = false;
    ds.attribute_schema.push_back({name, numeric ? AttributeKind::numeric : AttributeKind::categorical});
    if (numeric) continue;
    for (auto& o : ds.objects)
      for (auto& [t, obs] : o.observations)
        if (auto it = obs.attributes.find(name); it != obs.attributes.end())
          if (const double* d = std::get_if<double>(&it->second)) {
            std::ostringstream ss;
            ss << *d;
            it->second = ss.str();
          }
  }
}

inline void apply_hull_option(MovingRegionDataset& ds, const LoadOptions& opt) {
  if (!opt.hull) return;
  for (auto& o : ds.objects)
    for (auto& [t, obs] : o.observations) {
      const auto defect = classify_polygon(obs.polygon.vertices);
      if (defect == PolygonDefect::non_convex || defect == PolygonDefect::winding ||
          defect == PolygonDefect::repeated_vertex) {
        try {
          obs.polygon = convex_hull(obs.polygon.vertices);
        } catch (const ValidationError&) {
          throw ValidationError("object '" + o.id + "' t=" + std::to_string(t) + ": polygon is degenerate", o.id);
        }
      }
    }
}

inline AttributeValue csv_value(const std::string& s) {
  if (auto d = to_number(s)) return *d;
  return s;
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
inline long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

struct Timestamp {
  int year = 0, month = 1, day = 1, hour = 0, minute = 0;
};

/// Accepts "YYYY-MM-DDTHH:MM[:SS]" or "YYYY-MM-DD HH:MM[:SS]".
inline Timestamp parse_timestamp(const std::string& s, const std::string& where) {
  Timestamp ts;
  int second = 0;
  char sep = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &ts.year, &ts.month, &ts.day, &sep, &ts.hour,
                            &ts.minute, &second);
  if (n < 6 || (sep != 'T' && sep != ' ') || ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > 31 ||
      ts.hour < 0 || ts.hour > 23 || ts.minute < 0 || ts.minute > 59)
    throw ParseError(where + ": bad timestamp '" + s + "'");
  return ts;
}

/// Hours since Jan 1 of a fixed non-leap year (Feb 29 folds onto Mar 1).
inline double seasonal_hours(const Timestamp& ts) {
  static constexpr int kCum[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  const int day = std::min(kCum[ts.month - 1] + ts.day - 1, 364);
  return day * 24.0 + ts.hour + ts.minute / 60.0;
}

inline double absolute_hours(const Timestamp& ts) {
  return days_from_civil(ts.year, static_cast<unsigned>(ts.month), static_cast<unsigned>(ts.day)) * 24.0 + ts.hour +
         ts.minute / 60.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// regions-json

inline nlohmann::json attribute_to_json(const AttributeValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

inline nlohmann::json to_regions_json(const MovingRegionDataset& ds) {
  nlohmann::json j;
  j["timesteps"] = ds.timesteps;
  nlohmann::json schema = nlohmann::json::array();
  for (const auto& a : ds.attribute_schema)
    schema.push_back({{"name", a.name}, {"kind", a.kind == AttributeKind::numeric ? "numeric" : "categorical"}});
  j["attribute_schema"] = schema;
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : ds.objects) {
    nlohmann::json jo;
    jo["id"] = o.id;
    jo["label"] = o.label;
    nlohmann::json observations = nlohmann::json::object();
    for (const auto& [t, obs] : o.observations) {
      nlohmann::json poly = nlohmann::json::array();
      for (const auto& p : obs.polygon.vertices) poly.push_back({p.x, p.y});
      nlohmann::json attrs = nlohmann::json::object();
      for (const auto& [name, value] : obs.attributes) attrs[name] = attribute_to_json(value);
      observations[std::to_string(t)] = {{"polygon", poly}, {"attributes", attrs}};
    }
    jo["observations"] = observations;
    objs.push_back(jo);
  }
  j["objects"] = objs;
  return j;
}

/// Parses a regions-json document. `attribute_schema` is optional; when
/// absent it is inferred from the values.
inline MovingRegionDataset from_regions_json(const nlohmann::json& j) {
  MovingRegionDataset ds;
  try {
    for (const auto& t : j.at("timesteps")) ds.timesteps.push_back(t.get<int>());
    std::vector<std::string> attr_names;
    for (const auto& jo : j.at("objects")) {
      MovingObject o;
      o.id = jo.at("id").get<std::string>();
      o.label = jo.contains("label") ? jo.at("label").get<std::string>() : o.id;
      for (const auto& [key, jobs] : jo.at("observations").items()) {
        const int t = detail::require_int(key, "object '" + o.id + "'");
        RegionObservation obs;
        for (const auto& p : jobs.at("polygon")) {
          if (!p.is_array() || p.size() != 2) throw ParseError("object '" + o.id + "': polygon vertex must be [x, y]");
          obs.polygon.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        if (jobs.contains("attributes")) {
          for (const auto& [name, v] : jobs.at("attributes").items()) {
            if (v.is_number()) obs.attributes[name] = v.get<double>();
            else if (v.is_string()) obs.attributes[name] = v.get<std::string>();
            else if (v.is_boolean()) obs.attributes[name] = std::string(v.get<bool>() ? "true" : "false");
            else throw ParseError("object '" + o.id + "': attribute '" + name + "' must be a number or string");
            if (std::find(attr_names.begin(), attr_names.end(), name) == attr_names.end()) attr_names.push_back(name);
          }
        }
        o.observations.emplace(t, std::move(obs));
      }
      ds.objects.push_back(std::move(o));
    }
    if (j.contains("attribute_schema")) {
      for (const auto& a : j.at("attribute_schema")) {
        const auto kind = a.at("kind").get<std::string>();
        if (kind != "numeric" && kind != "categorical") throw ParseError("attribute kind must be numeric or categorical");
        ds.attribute_schema.push_back(
            {a.at("name").get<std::string>(), kind == "numeric" ? AttributeKind::numeric : AttributeKind::categorical});
      }
    } else {
      detail::infer_schema(ds, attr_names);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("regions-json: ") + e.what());
  }
  return ds;
}

// ---------------------------------------------------------------------------
// tracking-csv: id,t,xmin,ymin,xmax,ymax[,attr...]

inline MovingRegionDataset parse_tracking_csv(std::string_view text) {
  static constexpr std::string_view kCols[] = {"id", "t", "xmin", "ymin", "xmax", "ymax"};
  const auto table = detail::parse_csv(text, kCols);
  MovingRegionDataset ds;
  std::set<int> steps;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.line_numbers[r]);
    const int t = detail::require_int(row[1], where);
    const double x0 = detail::require_number(row[2], where), y0 = detail::require_number(row[3], where);
    const double x1 = detail::require_number(row[4], where), y1 = detail::require_number(row[5], where);
    auto [it, inserted] = index.emplace(row[0], ds.objects.size());
    if (inserted) ds.objects.push_back({row[0], row[0], {}});
    auto& obj = ds.objects[it->second];
    RegionObservation obs;
    obs.polygon = box_polygon(x0, y0, x1, y1);
    for (std::size_t c = 6; c < row.size(); ++c) obs.attributes[table.header[c]] = detail::csv_value(row[c]);
    if (!obj.observations.emplace(t, std::move(obs)).second)
      throw ValidationError(where + ": duplicate observation for object '" + row[0] + "' at t=" + std::to_string(t),
                            row[0]);
    steps.insert(t);
  }
  ds.timesteps.assign(steps.begin(), steps.end());
  detail::infer_schema(ds, {table.header.begin() + 6, table.header.end()});
  return ds;
}

inline std::string to_tracking_csv(const MovingRegionDataset& ds) {
  std::ostringstream out;
  out << std::setprecision(17) << "id,t,xmin,ymin,xmax,ymax";
  for (const auto& a : ds.attribute_schema) out << ',' << a.name;
  out << '\n';
  for (const auto& o : ds.objects)
    for (const auto& [t, obs] : o.observations) {
      const auto b = bounding_box(obs.polygon);
      out << o.id << ',' << t << ',' << b.min.x << ',' << b.min.y << ',' << b.max.x << ',' << b.max.y;
      for (const auto& a : ds.attribute_schema) {
        out << ',';
        if (auto it = obs.attributes.find(a.name); it != obs.attributes.end()) {
          if (const double* d = std::get_if<double>(&it->second)) out << *d;
          else out << std::get<std::string>(it->second);
        }
      }
      out << '\n';
    }
  return out.str();
}

// ---------------------------------------------------------------------------
// hurdat-csv: id,timestamp,lon,lat,extent_km[,wind,pressure]

struct StormFix {
  std::string id;
  std::string timestamp;
  double lon = 0.0, lat = 0.0, extent_km = 0.0;
  std::optional<double> wind, pressure;
};

inline constexpr double kKmPerDegree = 111.32;

/// Square footprint of side `extent_km` centred on the fix, in lon/lat
/// degrees (longitude span widened by 1/cos(lat)).
inline std::array<Point, 4> fix_footprint(const StormFix& f) {
  const double half_lat = 0.5 * f.extent_km / kKmPerDegree;
  const double coslat = std::max(std::cos(f.lat * std::numbers::pi / 180.0), 1e-3);
  const double half_lon = half_lat / coslat;
  return {Point{f.lon - half_lon, f.lat - half_lat}, Point{f.lon + half_lon, f.lat - half_lat},
          Point{f.lon + half_lon, f.lat + half_lat}, Point{f.lon - half_lon, f.lat + half_lat}};
}

inline MovingRegionDataset parse_hurdat_csv(std::string_view text, const LoadOptions& opt = {}) {
  static constexpr std::string_view kCols[] = {"id", "timestamp", "lon", "lat", "extent_km"};
  const auto table = detail::parse_csv(text, kCols);
  const bool has_wind = table.header.size() > 5 && table.header[5] == "wind";
  const bool has_pressure = table.header.size() > 6 && table.header[6] == "pressure";
  if (table.header.size() > 5 && !has_wind) throw ParseError("hurdat-csv: sixth column must be 'wind'");
  if (table.header.size() > 7) throw ParseError("hurdat-csv: too many columns");
  if (!(opt.window_hours > 0)) throw ParseError("hurdat-csv: window must be positive");

  struct Fix {
    StormFix f;
    double hours;
  };
  std::vector<Fix> fixes;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.line_numbers[r]);
    Fix fx;
    fx.f.id = row[0];
    fx.f.timestamp = row[1];
    fx.f.lon = detail::require_number(row[2], where);
    fx.f.lat = detail::require_number(row[3], where);
    fx.f.extent_km = detail::require_number(row[4], where);
    if (!(fx.f.extent_km > 0)) throw ValidationError(where + ": extent_km must be positive", row[0]);
    if (has_wind && !row[5].empty()) fx.f.wind = detail::require_number(row[5], where);
    if (has_pressure && !row[6].empty()) fx.f.pressure = detail::require_number(row[6], where);
    const auto ts = detail::parse_timestamp(row[1], where);
    fx.hours = opt.seasonal ? detail::seasonal_hours(ts) : detail::absolute_hours(ts);
    fixes.push_back(std::move(fx));
  }
  double origin = 0.0;
  if (!opt.seasonal && !fixes.empty()) {
    origin = fixes.front().hours;
    for (const auto& f : fixes) origin = std::min(origin, f.hours);
  }

  MovingRegionDataset ds;
  std::map<std::string, std::size_t> index;
  // (object, window) -> footprint corners and attribute aggregates
  struct Window {
    std::vector<Point> corners;
    std::optional<double> wind, pressure;
  };
  std::vector<std::map<int, Window>> windows;
  std::set<int> steps;
  for (const auto& fx : fixes) {
    const int w = static_cast<int>(std::floor((fx.hours - origin) / opt.window_hours));
    auto [it, inserted] = index.emplace(fx.f.id, ds.objects.size());
    if (inserted) {
      ds.objects.push_back({fx.f.id, fx.f.id, {}});
      windows.emplace_back();
    }
    auto& win = windows[it->second][w];
    for (const auto& c : fix_footprint(fx.f)) win.corners.push_back(c);
    if (fx.f.wind) win.wind = std::max(win.wind.value_or(*fx.f.wind), *fx.f.wind);
    if (fx.f.pressure) win.pressure = std::min(win.pressure.value_or(*fx.f.pressure), *fx.f.pressure);
    steps.insert(w);
  }
  for (std::size_t i = 0; i < ds.objects.size(); ++i)
    for (auto& [w, win] : windows[i]) {
      RegionObservation obs;
      obs.polygon = convex_hull(std::move(win.corners));
      if (win.wind) obs.attributes["wind"] = *win.wind;
      if (win.pressure) obs.attributes["pressure"] = *win.pressure;
      ds.objects[i].observations.emplace(w, std::move(obs));
    }
  ds.timesteps.assign(steps.begin(), steps.end());
  if (has_wind) ds.attribute_schema.push_back({"wind", AttributeKind::numeric});
  if (has_pressure) ds.attribute_schema.push_back({"pressure", AttributeKind::numeric});
  return ds;
}

inline std::string to_hurdat_csv(std::span<const StormFix> fixes) {
  std::ostringstream out;
  out << std::setprecision(10) << "id,timestamp,lon,lat,extent_km,wind,pressure\n";
  for (const auto& f : fixes) {
    out << f.id << ',' << f.timestamp << ',' << f.lon << ',' << f.lat << ',' << f.extent_km << ',';
    if (f.wind) out << *f.wind;
    out << ',';
    if (f.pressure) out << *f.pressure;
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

/// Parses `text` under `format`, applies the hull option and validates.
/// Throws ParseError or ValidationError.
inline MovingRegionDataset parse_dataset(std::string_view text, DatasetFormat format, const LoadOptions& opt = {}) {
  MovingRegionDataset ds;
  switch (format) {
    case DatasetFormat::regions_json: {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("regions-json: ") + e.what());
      }
      ds = from_regions_json(j);
      break;
    }
    case DatasetFormat::tracking_csv: ds = parse_tracking_csv(text); break;
    case DatasetFormat::hurdat_csv: ds = parse_hurdat_csv(text, opt); break;
  }
  detail::apply_hull_option(ds, opt);
  require_valid(ds);
  return ds;
}

inline MovingRegionDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                                        const LoadOptions& opt = {}) {
  if (!std::filesystem::exists(path)) throw ParseError("input file '" + path.string() + "' does not exist");
  const auto text = detail::read_file(path);
  try {
    return parse_dataset(text, format, opt);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what(), e.record());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void save_regions_json(const MovingRegionDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_regions_json(ds).dump() << '\n';
}

}  // namespace morevis
