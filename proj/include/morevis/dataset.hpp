#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "morevis/geometry.hpp"

namespace morevis {

enum class AttributeKind { numeric, categorical };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

using AttributeValue = std::variant<double, std::string>;

struct RegionObservation {
  ConvexPolygon polygon;
  std::map<std::string, AttributeValue> attributes;
  friend bool operator==(const RegionObservation&, const RegionObservation&) = default;
};

struct MovingObject {
  std::string id;
  std::string label;
  /// Keyed by timestep id; objects may be unobserved at any timestep.
  std::map<int, RegionObservation> observations;
  friend bool operator==(const MovingObject&, const MovingObject&) = default;
};

/// A set of objects whose convex extents move over integer timesteps.
/// Treated as immutable once built.
struct MovingRegionDataset {
  std::vector<MovingObject> objects;
  std::vector<int> timesteps;  // strictly increasing
  std::vector<AttributeSpec> attribute_schema;

  friend bool operator==(const MovingRegionDataset&, const MovingRegionDataset&) = default;

  std::optional<std::size_t> object_index(const std::string& id) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].id == id) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> timestep_index(int t) const {
    auto it = std::lower_bound(timesteps.begin(), timesteps.end(), t);
    if (it == timesteps.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - timesteps.begin());
  }
  const AttributeSpec* attribute(const std::string& name) const {
    for (const auto& a : attribute_schema)
      if (a.name == name) return &a;
    return nullptr;
  }
  std::size_t observation_count() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.observations.size();
    return n;
  }
  BoundingBox bounds() const {
    BoundingBox b;
    for (const auto& o : objects)
      for (const auto& [t, obs] : o.observations)
        for (const auto& v : obs.polygon.vertices) b.expand(v);
    return b;
  }
};

struct Violation {
  std::string object_id;       // empty for dataset-level problems
  std::optional<int> timestep;
  std::string kind;            // "winding", "non-convex", "duplicate-id", ...
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Reports every invariant violation; never throws.
inline ValidationReport validate(const MovingRegionDataset& ds) {
  ValidationReport r;
  auto add = [&](std::string id, std::optional<int> t, std::string kind, std::string msg) {
    r.violations.push_back({std::move(id), t, std::move(kind), std::move(msg)});
  };
  for (std::size_t i = 1; i < ds.timesteps.size(); ++i)
    if (ds.timesteps[i] <= ds.timesteps[i - 1])
      add({}, ds.timesteps[i], "timestep-order", "timestep ids must be strictly increasing");

  const std::set<int> known(ds.timesteps.begin(), ds.timesteps.end());
  std::set<std::string> seen;
  for (const auto& obj : ds.objects) {
    if (!seen.insert(obj.id).second) add(obj.id, std::nullopt, "duplicate-id", "object id appears more than once");
    if (obj.observations.empty()) add(obj.id, std::nullopt, "no-observations", "object has no observations");
    for (const auto& [t, obs] : obj.observations) {
      if (!known.count(t)) add(obj.id, t, "unknown-timestep", "observation timestep not in dataset timesteps");
      const auto defect = classify_polygon(obs.polygon.vertices);
      if (defect != PolygonDefect::none)
        add(obj.id, t, to_string(defect), "polygon must be convex, counter-clockwise, with positive area");
      for (const auto& [name, value] : obs.attributes) {
        const auto* spec = ds.attribute(name);
        if (!spec) {
          add(obj.id, t, "unknown-attribute", "attribute '" + name + "' is not in the schema");
        } else if ((spec->kind == AttributeKind::numeric) != std::holds_alternative<double>(value)) {
          add(obj.id, t, "attribute-kind", "attribute '" + name + "' does not match its schema kind");
        }
      }
    }
  }
  return r;
}

inline std::string describe(const Violation& v) {
  std::string s = v.kind;
  if (!v.object_id.empty()) s += " at object '" + v.object_id + "'";
  if (v.timestep) s += " t=" + std::to_string(*v.timestep);
  if (!v.message.empty()) s += ": " + v.message;
  return s;
}

/// Throws ValidationError naming the first offending record.
inline void require_valid(const MovingRegionDataset& ds) {
  const auto report = validate(ds);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::string msg = "invalid dataset: " + describe(v);
    if (report.violations.size() > 1)
      msg += " (+" + std::to_string(report.violations.size() - 1) + " more)";
    throw ValidationError(msg, v.object_id);
  }
}

}  // namespace morevis
