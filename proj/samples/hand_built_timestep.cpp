// Three boxes in one timestep: a chain a-b-c where a and c are disjoint.
// Prints the optimized positions and which pairs came out overlapping.

#include <cstdio>

#include "morevis/morevis.hpp"

int main() {
  using namespace morevis;
  MovingRegionDataset ds;
  ds.timesteps = {0, 1};
  const double x[] = {0.0, 0.8, 1.6};
  const char* ids[] = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i) {
    MovingObject o;
    o.id = ids[i];
    for (int t = 0; t < 2; ++t) {
      RegionObservation obs;
      obs.polygon = box_polygon(x[i] + t, 0, x[i] + t + 1, 1);
      o.observations.emplace(t, obs);
    }
    ds.objects.push_back(o);
  }

  LayoutConfig cfg;
  cfg.lambda2 = 10;  // overlap between a and c costs more than ratio distortion
  const auto layout = compute_layout(ds, cfg);
  for (const auto& r : layout.rects)
    if (r.timestep == 0) std::printf("%s  y=[%.3f, %.3f]\n", r.object_id.c_str(), r.bottom(), r.top());
  for (const auto& p : layout.slice(0)->pairs)
    std::printf("%s-%s  w=%.3f  drawn=%.3f%s\n", p.i.c_str(), p.j.c_str(), p.w, p.overlap,
                p.intersecting() ? "" : (p.overlap > kOverlapEps ? "  (spurious)" : ""));
}
