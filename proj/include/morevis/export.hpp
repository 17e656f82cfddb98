#pragma once

// Layout JSON document (schema "morevis-layout", version 1).

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "morevis/error.hpp"
#include "morevis/layout.hpp"
#include "morevis/metrics.hpp"

namespace morevis {

inline constexpr int kLayoutSchemaVersion = 1;

struct ExportOptions {
  /// Per-timestep solve times; off by default so output is reproducible.
  bool timings = false;
};

struct LayoutDocument {
  Layout layout;
  std::optional<MetricsReport> metrics;
};

namespace detail {

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline SolveStatus parse_solve_status(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "infeasible") return SolveStatus::infeasible;
  if (s == "iteration-limit") return SolveStatus::iteration_limit;
  throw ParseError("unknown solver status '" + s + "'");
}

}  // namespace detail

inline nlohmann::json config_to_json(const LayoutConfig& c) {
  return {{"lambda1", c.lambda1},
          {"lambda2", c.lambda2},
          {"column_fill", c.column_fill},
          {"max_group_binaries", c.max_group_binaries},
          {"y_min", c.y_min},
          {"y_max", c.y_max},
          {"node_limit", c.node_limit},
          {"projection",
           {{"method", to_string(c.projection.method)},
            {"distance_mode", to_string(c.projection.distance_mode)},
            {"curve_order", c.projection.curve_order},
            {"iterations", c.projection.iterations},
            {"learning_rate", c.projection.learning_rate},
            {"seed", c.projection.seed}}}};
}

inline LayoutConfig config_from_json(const nlohmann::json& j) {
  LayoutConfig c;
  c.lambda1 = j.at("lambda1").get<double>();
  c.lambda2 = j.at("lambda2").get<double>();
  c.column_fill = j.at("column_fill").get<double>();
  c.max_group_binaries = j.at("max_group_binaries").get<std::size_t>();
  c.y_min = j.at("y_min").get<double>();
  c.y_max = j.at("y_max").get<double>();
  c.node_limit = j.at("node_limit").get<std::size_t>();
  const auto& p = j.at("projection");
  c.projection.method = parse_projection_method(p.at("method").get<std::string>());
  c.projection.distance_mode = parse_distance_mode(p.at("distance_mode").get<std::string>());
  c.projection.curve_order = p.at("curve_order").get<int>();
  c.projection.iterations = p.at("iterations").get<int>();
  c.projection.learning_rate = p.at("learning_rate").get<double>();
  c.projection.seed = p.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json metrics_to_json(const MetricsReport& m, const ExportOptions& opt = {}) {
  nlohmann::json j{{"stress", m.stress}, {"crossing_metric", m.crossing_metric}, {"jump_distance", m.jump_distance}};
  detail::put_optional(j, "intersection_area_ratio_error", m.intersection_area_ratio_error);
  detail::put_optional(j, "spurious_intersection_error", m.spurious_intersection_error);
  if (opt.timings) j["per_timestep_runtimes"] = m.per_timestep_runtimes;
  return j;
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.stress = j.at("stress").get<double>();
  m.crossing_metric = j.at("crossing_metric").get<double>();
  m.jump_distance = j.at("jump_distance").get<double>();
  m.intersection_area_ratio_error = detail::get_optional<double>(j, "intersection_area_ratio_error");
  m.spurious_intersection_error = detail::get_optional<double>(j, "spurious_intersection_error");
  if (j.contains("per_timestep_runtimes")) m.per_timestep_runtimes = j.at("per_timestep_runtimes").get<std::vector<double>>();
  return m;
}

inline nlohmann::json layout_to_json(const Layout& l, const std::optional<MetricsReport>& metrics = std::nullopt,
                                     const ExportOptions& opt = {}) {
  nlohmann::json j;
  j["schema"] = "morevis-layout";
  j["version"] = kLayoutSchemaVersion;
  j["config"] = config_to_json(l.config);
  j["area_scale"] = l.area_scale;
  j["objects"] = l.object_ids;
  j["timesteps"] = l.timesteps;

  auto& rects = j["rects"] = nlohmann::json::array();
  for (const auto& r : l.rects)
    rects.push_back({{"object", r.object_id}, {"t", r.timestep}, {"y", r.y_center}, {"height", r.height}, {"y_prime", r.y_prime}});

  auto& links = j["links"] = nlohmann::json::array();
  for (const auto& k : l.links)
    links.push_back({{"object", k.object_id}, {"from", k.from}, {"to", k.to}, {"spurious_with", k.spurious_crossings}});

  auto& slices = j["slices"] = nlohmann::json::array();
  for (const auto& s : l.slices) {
    nlohmann::json js{{"t", s.timestep}, {"optimal", s.optimal}, {"f3", s.f3}};
    detail::put_optional(js, "f1", s.f1);
    detail::put_optional(js, "f2", s.f2);
    detail::put_optional(js, "f1_group_mean", s.f1_group_mean);
    detail::put_optional(js, "f2_group_mean", s.f2_group_mean);
    if (opt.timings) js["runtime_seconds"] = s.runtime_seconds;
    auto& groups = js["groups"] = nlohmann::json::array();
    for (const auto& g : s.groups) {
      nlohmann::json jg{{"members", g.members},   {"status", to_string(g.status)}, {"optimal", g.optimal},
                        {"binaries", g.binaries}, {"nodes", g.nodes},              {"f3", g.f3},
                        {"objective", g.objective}};
      detail::put_optional(jg, "f1", g.f1);
      detail::put_optional(jg, "f2", g.f2);
      groups.push_back(std::move(jg));
    }
    auto& pairs = js["pairs"] = nlohmann::json::array();
    for (const auto& p : s.pairs) {
      nlohmann::json jp{{"i", p.i}, {"j", p.j}, {"w", p.w}, {"overlap", p.overlap}, {"containment", p.containment}};
      detail::put_optional(jp, "k", p.k);
      detail::put_optional(jp, "c", p.c);
      pairs.push_back(std::move(jp));
    }
    slices.push_back(std::move(js));
  }
  j["projection_diagnostics"] = l.projection_diagnostics;
  if (metrics) j["metrics"] = metrics_to_json(*metrics, opt);
  return j;
}

inline LayoutDocument layout_from_json(const nlohmann::json& j) {
  LayoutDocument doc;
  auto& l = doc.layout;
  try {
    if (j.at("schema").get<std::string>() != "morevis-layout") throw ParseError("not a morevis layout document");
    const int version = j.at("version").get<int>();
    if (version != kLayoutSchemaVersion)
      throw ParseError("unsupported layout schema version " + std::to_string(version));
    l.config = config_from_json(j.at("config"));
    l.area_scale = j.at("area_scale").get<double>();
    l.object_ids = j.at("objects").get<std::vector<std::string>>();
    l.timesteps = j.at("timesteps").get<std::vector<int>>();
    for (const auto& r : j.at("rects"))
      l.rects.push_back({r.at("object").get<std::string>(), r.at("t").get<int>(), r.at("y").get<double>(),
                         r.at("height").get<double>(), r.at("y_prime").get<double>()});
    for (const auto& k : j.at("links"))
      l.links.push_back({k.at("object").get<std::string>(), k.at("from").get<int>(), k.at("to").get<int>(),
                         k.at("spurious_with").get<std::vector<std::string>>()});
    for (const auto& js : j.at("slices")) {
      TimeSliceSolution s;
      s.timestep = js.at("t").get<int>();
      s.optimal = js.at("optimal").get<bool>();
      s.f3 = js.at("f3").get<double>();
      s.f1 = detail::get_optional<double>(js, "f1");
      s.f2 = detail::get_optional<double>(js, "f2");
      s.f1_group_mean = detail::get_optional<double>(js, "f1_group_mean");
      s.f2_group_mean = detail::get_optional<double>(js, "f2_group_mean");
      s.runtime_seconds = js.value("runtime_seconds", 0.0);
      for (const auto& jg : js.at("groups")) {
        GroupRecord g;
        g.members = jg.at("members").get<std::vector<std::string>>();
        g.status = detail::parse_solve_status(jg.at("status").get<std::string>());
        g.optimal = jg.at("optimal").get<bool>();
        g.binaries = jg.at("binaries").get<std::size_t>();
        g.nodes = jg.at("nodes").get<std::size_t>();
        g.f3 = jg.at("f3").get<double>();
        g.objective = jg.at("objective").get<double>();
        g.f1 = detail::get_optional<double>(jg, "f1");
        g.f2 = detail::get_optional<double>(jg, "f2");
        s.groups.push_back(std::move(g));
      }
      for (const auto& jp : js.at("pairs")) {
        PairRecord p;
        p.i = jp.at("i").get<std::string>();
        p.j = jp.at("j").get<std::string>();
        p.w = jp.at("w").get<double>();
        p.overlap = jp.at("overlap").get<double>();
        p.containment = jp.at("containment").get<bool>();
        p.k = detail::get_optional<double>(jp, "k");
        p.c = detail::get_optional<int>(jp, "c");
        s.pairs.push_back(std::move(p));
      }
      l.slices.push_back(std::move(s));
    }
    l.projection_diagnostics = j.at("projection_diagnostics").get<std::map<std::string, double>>();
    if (j.contains("metrics")) doc.metrics = metrics_from_json(j.at("metrics"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("layout json: ") + e.what());
  }
  return doc;
}

/// Serialized text; stable for identical inputs.
inline std::string dump_layout(const Layout& l, const std::optional<MetricsReport>& metrics = std::nullopt,
                               const ExportOptions& opt = {}) {
  return layout_to_json(l, metrics, opt).dump(1) + "\n";
}

inline LayoutDocument parse_layout(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("layout json: ") + e.what());
  }
  return layout_from_json(j);
}

inline LayoutDocument load_layout(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open layout file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_layout(text);
}

}  // namespace morevis
