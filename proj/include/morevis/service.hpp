#pragma once

// Read-only HTTP API over a precomputed layout and its dataset.

#include <cstdio>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morevis/export.hpp"
#include "morevis/io.hpp"

// After Eigen: <resolv.h> defines an _res macro that breaks Eigen's kernels.
#include <httplib.h>

namespace morevis {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Per-object aggregates used for filtering.
struct ObjectSummary {
  std::string id;
  std::map<std::string, double> values;  // mean_area, path_length, observation_count, numeric attribute means
};

inline std::vector<ObjectSummary> summarize_objects(const MovingRegionDataset& ds) {
  std::vector<ObjectSummary> out;
  for (const auto& o : ds.objects) {
    ObjectSummary s{o.id, {}};
    double area_sum = 0, path = 0;
    std::optional<Point> prev;
    std::map<std::string, std::pair<double, std::size_t>> attr;
    for (const auto& [t, obs] : o.observations) {
      area_sum += area(obs.polygon);
      const Point c = centroid(obs.polygon);
      if (prev) path += distance(*prev, c);
      prev = c;
      for (const auto& [name, v] : obs.attributes)
        if (const auto* d = std::get_if<double>(&v)) {
          attr[name].first += *d;
          attr[name].second += 1;
        }
    }
    const auto n = static_cast<double>(o.observations.size());
    s.values["mean_area"] = n > 0 ? area_sum / n : 0.0;
    s.values["path_length"] = path;
    s.values["observation_count"] = n;
    for (const auto& [name, acc] : attr) s.values[name] = acc.first / static_cast<double>(acc.second);
    out.push_back(std::move(s));
  }
  return out;
}

inline const char* const kDerivedAttributes[] = {"mean_area", "path_length", "observation_count"};

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

class Service {
 public:
  /// Installs the data to serve. `layout_text` is served byte for byte.
  void initialize(std::string layout_text, MovingRegionDataset dataset) {
    auto s = std::make_shared<State>();
    s->doc = parse_layout(layout_text);
    s->layout_text = std::move(layout_text);
    char tag[24];
    std::snprintf(tag, sizeof tag, "\"%016llx\"", static_cast<unsigned long long>(fnv1a(s->layout_text)));
    s->etag = tag;
    s->dataset = std::move(dataset);
    s->summaries = summarize_objects(s->dataset);
    for (const auto& r : s->doc.layout.rects)
      if (!s->dataset.object_index(r.object_id))
        throw ValidationError("layout object '" + r.object_id + "' is not in the dataset", r.object_id);
    std::lock_guard lock(mutex_);
    state_ = std::move(s);
  }

  bool ready() const { return state() != nullptr; }

  Reply get_layout(const std::string& if_none_match = {}) const {
    const auto s = state();
    if (!s) return unavailable();
    Reply r;
    r.headers["ETag"] = s->etag;
    if (!if_none_match.empty() && if_none_match == s->etag) {
      r.status = 304;
      return r;
    }
    r.body = s->layout_text;
    return r;
  }

  /// Intersection graphs for every layout timestep in [t0, t1]. `objects`
  /// restricts both endpoints when non-empty.
  Reply get_intersections(std::optional<int> t0, std::optional<int> t1, const std::set<std::string>& objects = {}) const {
    const auto s = state();
    if (!s) return unavailable();
    const auto& l = s->doc.layout;
    if (l.timesteps.empty()) return error(400, "layout has no timesteps");
    const int first = l.timesteps.front(), last = l.timesteps.back();
    const int a = t0.value_or(first), b = t1.value_or(last);
    if (a > b) return error(400, "t0 must not exceed t1");
    if (a < first || b > last)
      return error(400, "range must lie within [" + std::to_string(first) + ", " + std::to_string(last) + "]");
    for (const auto& id : objects)
      if (!s->dataset.object_index(id)) return error(400, "unknown object '" + id + "'");

    nlohmann::json out = nlohmann::json::array();
    for (const auto& slice : l.slices) {
      if (slice.timestep < a || slice.timestep > b) continue;
      std::set<std::string> nodes;
      nlohmann::json edges = nlohmann::json::array();
      for (const auto& p : slice.pairs) {
        if (!(p.overlap > kOverlapEps)) continue;
        if (!objects.empty() && (!objects.count(p.i) || !objects.count(p.j))) continue;
        nodes.insert(p.i);
        nodes.insert(p.j);
        edges.push_back({{"i", p.i},
                         {"j", p.j},
                         {"w", p.w},
                         {"overlap", p.overlap},
                         {"kind", p.intersecting() ? "real" : "spurious"}});
      }
      out.push_back({{"t", slice.timestep}, {"nodes", nodes}, {"edges", std::move(edges)}});
    }
    return ok(out.dump());
  }

  Reply get_object_track(const std::string& id) const {
    const auto s = state();
    if (!s) return unavailable();
    const auto idx = s->dataset.object_index(id);
    if (!idx) return error(404, "unknown object '" + id + "'");
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [t, obs] : s->dataset.objects[*idx].observations) {
      const Point c = centroid(obs.polygon);
      nlohmann::json poly = nlohmann::json::array();
      for (const auto& v : obs.polygon.vertices) poly.push_back({v.x, v.y});
      nlohmann::json attrs = nlohmann::json::object();
      for (const auto& [name, v] : obs.attributes) attrs[name] = attribute_to_json(v);
      out.push_back({{"t", t}, {"centroid", {c.x, c.y}}, {"polygon", std::move(poly)}, {"attributes", std::move(attrs)}});
    }
    return ok(out.dump());
  }

  /// Body: {"predicates": [{"attribute": name, "min": x, "max": y}, ...]}.
  /// Either bound may be omitted.
  Reply filter_objects(const std::string& body) const {
    const auto s = state();
    if (!s) return unavailable();
    nlohmann::json req;
    try {
      req = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return error(400, "request body is not valid JSON");
    }
    struct Predicate {
      std::string attribute;
      double lo, hi;
    };
    std::vector<Predicate> preds;
    try {
      if (req.contains("predicates")) {
        for (const auto& p : req.at("predicates")) {
          Predicate pr{p.at("attribute").get<std::string>(), -std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
          if (p.contains("min") && !p.at("min").is_null()) pr.lo = p.at("min").get<double>();
          if (p.contains("max") && !p.at("max").is_null()) pr.hi = p.at("max").get<double>();
          if (!filterable(*s, pr.attribute)) return error(400, "unknown or non-numeric attribute '" + pr.attribute + "'");
          preds.push_back(std::move(pr));
        }
      }
    } catch (const nlohmann::json::exception&) {
      return error(400, "each predicate needs an attribute name and numeric bounds");
    }
    std::vector<std::string> ids;
    for (const auto& sum : s->summaries) {
      bool keep = true;
      for (const auto& p : preds) {
        const auto it = sum.values.find(p.attribute);
        if (it == sum.values.end() || it->second < p.lo || it->second > p.hi) {
          keep = false;
          break;
        }
      }
      if (keep) ids.push_back(sum.id);
    }
    return ok(nlohmann::json{{"ids", ids}}.dump());
  }

  /// Per-object aggregates, for the parallel-coordinates axes.
  Reply get_attributes() const {
    const auto s = state();
    if (!s) return unavailable();
    nlohmann::json out = nlohmann::json::array();
    for (const auto& sum : s->summaries) out.push_back({{"id", sum.id}, {"values", sum.values}});
    return ok(out.dump());
  }

  Reply get_dataset() const {
    const auto s = state();
    if (!s) return unavailable();
    return ok(to_regions_json(s->dataset).dump());
  }

  /// Registers the routes, CORS headers and preflight handling.
  void mount(httplib::Server& server, const std::string& allow_origin = "*") const {
    server.set_default_headers({{"Access-Control-Allow-Origin", allow_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type, If-None-Match"},
                                {"Access-Control-Expose-Headers", "ETag"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/layout", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, get_layout(req.get_header_value("If-None-Match")));
    });
    server.Get("/intersections", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<int> t0, t1;
      std::set<std::string> objects;
      try {
        if (req.has_param("t0")) t0 = parse_int(req.get_param_value("t0"));
        if (req.has_param("t1")) t1 = parse_int(req.get_param_value("t1"));
      } catch (const std::exception&) {
        send(res, error(400, "t0 and t1 must be integers"));
        return;
      }
      if (req.has_param("objects")) {
        std::stringstream ss(req.get_param_value("objects"));
        for (std::string id; std::getline(ss, id, ',');)
          if (!id.empty()) objects.insert(id);
      }
      send(res, get_intersections(t0, t1, objects));
    });
    server.Get(R"(/objects/([^/]+)/track)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, get_object_track(httplib::detail::decode_url(req.matches[1], false)));
    });
    server.Post("/filter", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, filter_objects(req.body));
    });
    server.Get("/attributes", [this](const httplib::Request&, httplib::Response& res) { send(res, get_attributes()); });
    server.Get("/dataset", [this](const httplib::Request&, httplib::Response& res) { send(res, get_dataset()); });
  }

 private:
  struct State {
    std::string layout_text;
    std::string etag;
    LayoutDocument doc;
    MovingRegionDataset dataset;
    std::vector<ObjectSummary> summaries;
  };

  std::shared_ptr<const State> state() const {
    std::lock_guard lock(mutex_);
    return state_;
  }

  static bool filterable(const State& s, const std::string& name) {
    for (const char* d : kDerivedAttributes)
      if (name == d) return true;
    const auto* a = s.dataset.attribute(name);
    return a && a->kind == AttributeKind::numeric;
  }

  static int parse_int(const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  }

  static Reply ok(std::string body) { return {200, std::move(body), "application/json", {}}; }
  static Reply error(int status, const std::string& message) {
    return {status, nlohmann::json{{"error", message}}.dump(), "application/json", {}};
  }
  static Reply unavailable() { return error(503, "service is not initialized"); }

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    if (r.status != 304) res.set_content(r.body, r.content_type);
  }

  mutable std::mutex mutex_;
  std::shared_ptr<const State> state_;
};

}  // namespace morevis
