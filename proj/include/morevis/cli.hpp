#pragma once

// Command-line front end: layout, metrics, render, synth, serve.
// Exit codes: 0 success, 1 bad input or usage, 2 solver failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "morevis/export.hpp"
#include "morevis/io.hpp"
#include "morevis/layout.hpp"
#include "morevis/metrics.hpp"
#include "morevis/render.hpp"
#include "morevis/synthetic.hpp"
// Last: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include "morevis/service.hpp"

namespace morevis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;

/// Picks a dataset format from the extension, sniffing the header of .csv
/// files.
inline DatasetFormat guess_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".json") return DatasetFormat::regions_json;
  if (ext == ".csv") {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    if (header.rfind("id,timestamp", 0) == 0) return DatasetFormat::hurdat_csv;
    return DatasetFormat::tracking_csv;
  }
  throw ParseError("cannot infer the format of '" + path.string() + "'; pass --format");
}

struct DatasetArgs {
  std::string path;
  std::string format;  // empty: infer
  bool hull = false;
  double window_hours = 48.0;
  bool absolute_time = false;

  void add(CLI::App& app, const std::string& flag) {
    app.add_option(flag, path, "Dataset file")->required();
    app.add_option("--format", format, "regions-json, tracking-csv or hurdat-csv (default: from extension)")
        ->check(CLI::IsMember({"regions-json", "tracking-csv", "hurdat-csv"}));
    app.add_flag("--hull", hull, "Replace non-convex polygons by their convex hull");
    app.add_option("--window-hours", window_hours, "hurdat-csv timestep window")->check(CLI::PositiveNumber);
    app.add_flag("--absolute-time", absolute_time, "hurdat-csv: keep the year instead of binning by season");
  }

  MovingRegionDataset load() const {
    LoadOptions opt;
    opt.hull = hull;
    opt.window_hours = window_hours;
    opt.seasonal = !absolute_time;
    if (!std::filesystem::exists(path)) throw ParseError("input file '" + path + "' does not exist");
    return load_dataset(path, format.empty() ? guess_format(path) : parse_dataset_format(format), opt);
  }
};

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Error("cannot write '" + path + "'");
}

/// Runs one invocation. Diagnostics go to `err`; stdout-bound results to
/// `out`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Moving-region timeline layouts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "morevis 1.0");

  // layout
  auto* layout_cmd = app.add_subcommand("layout", "Compute a layout from a dataset");
  DatasetArgs layout_in;
  layout_in.add(*layout_cmd, "--input,-i");
  LayoutConfig cfg;
  std::string projection = "pca", distance_mode = "region", layout_out;
  unsigned jobs = 0;
  bool timings = false, with_metrics = false;
  auto* proj_opt = layout_cmd->add_option("--projection", projection, "pca, force, hilbert or morton")
                       ->check(CLI::IsMember({"pca", "pca-centroids", "force", "force-directed", "hilbert", "morton"}));
  std::vector<CLI::Option*> shortcuts;
  for (const char* m : {"pca", "force", "hilbert", "morton"})
    shortcuts.push_back(layout_cmd->add_flag_callback(std::string("--") + m, [&projection, m] { projection = m; },
                                                      std::string("Same as --projection ") + m));
  for (auto* a : shortcuts) {
    a->excludes(proj_opt);
    for (auto* b : shortcuts)
      if (a != b) a->excludes(b);
  }
  layout_cmd->add_option("--distance-mode", distance_mode, "force projection: centroid or region")
      ->check(CLI::IsMember({"centroid", "region"}));
  layout_cmd->add_option("--curve-order", cfg.projection.curve_order, "Space-filling curve order")->check(CLI::Range(4, 16));
  layout_cmd->add_option("--iterations", cfg.projection.iterations, "Force projection iterations")->check(CLI::PositiveNumber);
  layout_cmd->add_option("--learning-rate", cfg.projection.learning_rate)->check(CLI::PositiveNumber);
  layout_cmd->add_option("--seed", cfg.projection.seed, "Projection seed");
  layout_cmd->add_option("--lambda1", cfg.lambda1, "Weight of the ratio term")->check(CLI::NonNegativeNumber);
  layout_cmd->add_option("--lambda2", cfg.lambda2, "Weight of the spurious term")->check(CLI::NonNegativeNumber);
  layout_cmd->add_option("--column-fill", cfg.column_fill, "Rectangle width as a fraction of a column");
  layout_cmd->add_option("--max-group-binaries", cfg.max_group_binaries, "Exact-solve limit per group");
  layout_cmd->add_option("--node-limit", cfg.node_limit, "Branch-and-bound node limit per group");
  layout_cmd->add_option("--jobs,-j", jobs, "Worker threads (0: all cores)")->envname("MOREVIS_JOBS");
  layout_cmd->add_flag("--timings", timings, "Include solve times (output is then not reproducible)");
  layout_cmd->add_flag("--metrics", with_metrics, "Embed the quality metrics");
  layout_cmd->add_option("--output,-o", layout_out, "Layout JSON (default: stdout)");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Quality metrics of a layout");
  std::string metrics_layout;
  DatasetArgs metrics_in;
  StressOptions stress_opt;
  bool metrics_timings = false;
  metrics_cmd->add_option("--layout,-l", metrics_layout, "Layout JSON")->required();
  metrics_in.add(*metrics_cmd, "--dataset,-d");
  metrics_cmd->add_option("--sample-budget", stress_opt.sample_budget, "Stress pairs evaluated exactly");
  metrics_cmd->add_flag("--timings", metrics_timings, "Include per-timestep solve times");

  // render
  auto* render_cmd = app.add_subcommand("render", "Draw a layout as SVG");
  std::string render_layout, svg_out, color_mode = "spatial";
  DatasetArgs render_in;
  RenderSpec spec;
  std::string attribute;
  render_cmd->add_option("--layout,-l", render_layout, "Layout JSON")->required();
  render_in.add(*render_cmd, "--dataset,-d");
  render_cmd->add_option("--svg,-o", svg_out, "Output SVG")->required();
  render_cmd->add_option("--width", spec.width);
  render_cmd->add_option("--height", spec.height);
  render_cmd->add_option("--color", color_mode, "identity, attribute or spatial");
  render_cmd->add_option("--attribute", attribute, "Attribute for --color attribute");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string scenario = "orbits", synth_out, synth_format = "regions-json";
  int objects = 4, timesteps = 50;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--scenario", scenario)->check(CLI::IsMember({"orbits", "pedestrians", "storms"}));
  auto* objects_opt = synth_cmd->add_option("--objects", objects, "orbits: object count")->check(CLI::PositiveNumber);
  auto* timesteps_opt = synth_cmd->add_option("--timesteps", timesteps, "orbits: timestep count")->check(CLI::Range(2, 1000000));
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--format", synth_format, "regions-json, tracking-csv or hurdat-csv (storms only)")
      ->check(CLI::IsMember({"regions-json", "tracking-csv", "hurdat-csv"}));
  synth_cmd->add_option("--output,-o", synth_out, "Output file (default: stdout)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve a layout over HTTP");
  std::string serve_layout, host = "127.0.0.1", static_dir, origin = "*";
  DatasetArgs serve_in;
  int port = 8080;
  serve_cmd->add_option("--layout,-l", serve_layout, "Layout JSON")->required();
  serve_in.add(*serve_cmd, "--dataset,-d");
  serve_cmd->add_option("--port,-p", port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--static", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--allow-origin", origin, "CORS origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "morevis 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "morevis: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*layout_cmd) {
      cfg.projection.method = parse_projection_method(projection);
      cfg.projection.distance_mode = parse_distance_mode(distance_mode);
      cfg.jobs = jobs;
      const auto ds = layout_in.load();
      const auto layout = compute_layout(ds, cfg);
      std::optional<MetricsReport> m;
      if (with_metrics) m = compute_metrics(ds, layout);
      write_text(layout_out, dump_layout(layout, m, ExportOptions{timings}), out);
      std::size_t fallback = 0;
      for (const auto& s : layout.slices) fallback += !s.optimal;
      if (fallback)
        err << "morevis: " << fallback << " of " << layout.slices.size()
            << " timesteps were solved heuristically (group too large or node limit reached)\n";
    } else if (*metrics_cmd) {
      const auto doc = load_layout(metrics_layout);
      const auto ds = metrics_in.load();
      const auto m = compute_metrics(ds, doc.layout, stress_opt);
      out << metrics_to_json(m, ExportOptions{metrics_timings}).dump(2) << "\n";
    } else if (*render_cmd) {
      spec.color_mode = parse_color_mode(color_mode);
      if (!attribute.empty()) spec.attribute_name = attribute;
      const auto doc = load_layout(render_layout);
      const auto ds = render_in.load();
      write_text(svg_out, render_svg(doc.layout, ds, spec), out);
    } else if (*synth_cmd) {
      if (scenario != "orbits" && (objects_opt->count() || timesteps_opt->count()))
        throw ValidationError("--objects and --timesteps apply to the orbits scenario only");
      if (synth_format == "hurdat-csv" && scenario != "storms")
        throw ValidationError("hurdat-csv output needs --scenario storms");
      std::string text;
      if (scenario == "storms" && synth_format == "hurdat-csv") {
        text = to_hurdat_csv(generate_storm_fixes(synth_seed));
      } else {
        MovingRegionDataset ds;
        if (scenario == "orbits") ds = generate_synthetic_orbits(objects, timesteps, synth_seed);
        else if (scenario == "pedestrians") ds = generate_pedestrian_scene(synth_seed);
        else ds = parse_hurdat_csv(to_hurdat_csv(generate_storm_fixes(synth_seed)));
        text = synth_format == "tracking-csv" ? to_tracking_csv(ds) : to_regions_json(ds).dump() + "\n";
      }
      write_text(synth_out, text, out);
    } else if (*serve_cmd) {
      std::ifstream f(serve_layout, std::ios::binary);
      if (!f) throw ParseError("cannot open layout file '" + serve_layout + "'");
      std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      Service service;
      service.initialize(std::move(text), serve_in.load());
      httplib::Server server;
      service.mount(server, origin);
      if (!static_dir.empty()) server.set_mount_point("/", static_dir);
      err << "morevis: serving on http://" << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const SolverError& e) {
    err << "morevis: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ValidationError& e) {
    err << "morevis: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "morevis: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace morevis::cli
