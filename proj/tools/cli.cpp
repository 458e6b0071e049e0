#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>

#include "dynmap/errors.hpp"
#include "dynmap/layers_io.hpp"
#include "dynmap/nav_goal.hpp"
#include "dynmap/placement.hpp"
#include "dynmap/sim.hpp"
#include "dynmap/text.hpp"

namespace dynmap::cli {

namespace {

std::string fmt(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s = buf;
  if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

struct BackendFlags {
  std::string config_path;
  std::string backend;
  std::string endpoint;
  std::string model;
  std::string registry_path;
};

struct Resolved {
  BackendConfig backend;
  std::optional<std::uint64_t> seed;
};

// Config file: {"backend": {"mode", "endpoint", "model", "temperature",
// "timeout_seconds", "max_retries", "api_key_env"}, "seed": n}. Flags win.
Resolved resolve_config(const BackendFlags& flags) {
  Resolved r;
  if (!flags.config_path.empty()) {
    try {
      const auto doc = nlohmann::json::parse(text::read_file(flags.config_path));
      if (doc.contains("backend")) {
        const auto& b = doc["backend"];
        r.backend.mode = parse_backend_mode(b.value("mode", std::string("rules")));
        r.backend.endpoint = b.value("endpoint", r.backend.endpoint);
        r.backend.model = b.value("model", r.backend.model);
        r.backend.temperature = b.value("temperature", r.backend.temperature);
        r.backend.timeout_seconds = b.value("timeout_seconds", r.backend.timeout_seconds);
        r.backend.max_retries = b.value("max_retries", r.backend.max_retries);
        r.backend.api_key_env = b.value("api_key_env", r.backend.api_key_env);
      }
      if (doc.contains("seed")) r.seed = doc["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
  }
  if (!flags.backend.empty()) r.backend.mode = parse_backend_mode(flags.backend);
  if (!flags.endpoint.empty()) r.backend.endpoint = flags.endpoint;
  if (!flags.model.empty()) r.backend.model = flags.model;
  if (r.backend.mode == BackendMode::Stub) throw ParameterError("the stub backend is not available here");
  r.backend.validate();
  return r;
}

struct Backends {
  std::shared_ptr<Backend> pipeline;
  std::shared_ptr<ChatClient> bypass;
};

Backends make_backends(const BackendConfig& config) {
  if (config.mode == BackendMode::Rules) return {std::make_shared<RuleBackend>(), nullptr};
  auto client = std::make_shared<ChatClient>(config, std::make_shared<HttpTransport>());
  return {std::make_shared<ChatBackend>(client), client};
}

Pose2D parse_pose(const std::string& s) {
  const auto parts = text::split(s, ',');
  if (parts.size() != 3) throw ParseError("pose must be x,y,theta");
  return {text::parse_double(parts[0]), text::parse_double(parts[1]), text::parse_double(parts[2])};
}

void print_layers(const MapLayers& layers, std::ostream& out) {
  const auto furniture = layers.furniture.list();
  out << "furniture: " << furniture.size() << "\n";
  for (const auto& f : furniture) {
    out << "  " << f.id << " " << f.class_name << " at (" << fmt(f.pose.x) << ", " << fmt(f.pose.y)
        << ") yaw " << fmt(f.pose.theta) << " size " << fmt(f.dims.x()) << "x" << fmt(f.dims.y()) << "x"
        << fmt(f.dims.z());
    if (!f.role.empty()) out << " [" << f.role << "]";
    out << "\n";
  }
  out << "zones: " << layers.zones.zones().size() << "\n";
  for (const auto& z : layers.zones.zones()) {
    out << "  " << z.name() << " (" << fmt(z.min().x()) << ", " << fmt(z.min().y()) << ") to ("
        << fmt(z.max().x()) << ", " << fmt(z.max().y()) << ")\n";
  }
  out << "humans: " << layers.humans.people().size() << "\n";
  for (const auto& h : layers.humans.people()) {
    out << "  " << describe(h, layers.zones, layers.furniture) << "\n";
  }
}

std::optional<TaskRegistry> load_registry(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return parse_registry(text::read_file(path));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const LoadError*>(&e) ||
      dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const BoundsError*>(&e)) {
    return kExitUsage;
  }
  return kExitDomain;
}

// ---------------------------------------------------------------- commands

struct MapBuildArgs {
  std::string grid, detections, out, kitchen;
};

int map_build(const MapBuildArgs& a, std::ostream& out) {
  const GridMap grid = load_grid(text::read_file(a.grid));
  MapLayers layers;
  apply_detection_log(layers.furniture, parse_detection_log(text::read_file(a.detections)));
  if (!a.kitchen.empty()) layers.furniture.set_role(a.kitchen, "kitchen");
  // Every instance must fall on the map.
  for (const auto& f : layers.furniture.list()) world_to_cell(grid.geometry(), f.pose.position());
  text::write_file(a.out, dump_layers(layers));
  print_layers(layers, out);
  return kExitOk;
}

int map_dump(const std::string& path, std::ostream& out) {
  print_layers(load_layers(text::read_file(path)), out);
  return kExitOk;
}

struct NavArgs {
  std::string map, layers, furniture, robot;
  NavGoalParams params;
  int neighborhood = -1;
};

int nav_goal(NavArgs a, std::ostream& out) {
  const GridMap grid = load_grid(text::read_file(a.map));
  const MapLayers layers = load_layers(text::read_file(a.layers));
  if (a.neighborhood >= 0) a.params.neighborhood_radius = a.neighborhood;
  a.params.validate();
  const Pose2D robot = parse_pose(a.robot);
  const GridMap nav = virtual_obstacles(layers.furniture, grid);
  const RiskField risk = inflate(nav, a.params.robot_radius);
  const NavGoal g = select_goal(nav, risk, layers.furniture, a.furniture, robot, a.params);
  out << "target: " << a.furniture << "\n"
      << "candidate: (" << fmt(g.candidate.x(), 3) << ", " << fmt(g.candidate.y(), 3) << ")\n"
      << "cell: (" << g.cell.col << ", " << g.cell.row << ")\n"
      << "pose: (" << fmt(g.pose.x, 3) << ", " << fmt(g.pose.y, 3) << ", " << fmt(g.pose.theta, 3) << ")\n"
      << "cost: " << g.cost << "\n";
  return kExitOk;
}

struct PlaceArgs {
  std::string cloud;
  double radius = 0.04;
  std::uint64_t seed = 0;
  RansacParams ransac;
};

int place(PlaceArgs a, std::ostream& out) {
  const PointCloud cloud = parse_cloud(text::read_file(a.cloud));
  a.ransac.seed = a.seed;
  const PlaneFit fit = ransac_plane(cloud, a.ransac);
  const Placement spot = find_placement(cloud, fit.plane, fit.inliers, a.radius);
  const auto& n = fit.plane.normal;
  out << "plane: normal (" << fmt(n.x(), 4) << ", " << fmt(n.y(), 4) << ", " << fmt(n.z(), 4)
      << ") offset " << fmt(fit.plane.offset, 4) << "\n"
      << "inliers: " << fit.inliers.size() << " of " << cloud.size() << "\n"
      << "point: (" << fmt(spot.point.x(), 3) << ", " << fmt(spot.point.y(), 3) << ", "
      << fmt(spot.point.z(), 3) << ")\n"
      << "clearance: " << fmt(spot.clearance, 3) << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string scenario, mode = "parallel", log, metrics_out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  BackendFlags backend;
};

int run_cmd(const RunArgs& a, std::ostream& out) {
  const Scenario sc = load_scenario(a.scenario);
  const Resolved cfg = resolve_config(a.backend);
  const Backends backends = make_backends(cfg.backend);
  SimConfig sim;
  sim.mode = parse_pipeline_mode(a.mode);
  sim.backend = backends.pipeline;
  sim.bypass_client = backends.bypass;
  sim.registry = load_registry(a.backend.registry_path);
  sim.seed = a.seed_set ? a.seed : cfg.seed.value_or(0);
  sim.ransac.seed = sim.seed;
  const RunResult result = run(sc, sim);
  if (a.log == "-") {
    out << join_log(result.log);
  } else if (!a.log.empty()) {
    text::write_file(a.log, join_log(result.log));
  }
  if (!a.metrics_out.empty()) text::write_file(a.metrics_out, metrics_to_json(result.metrics));
  out << format_metrics(result.metrics);
  return kExitOk;
}

struct ReplArgs {
  std::string scenario, table = "table_1", mode = "parallel";
  BackendFlags backend;
};

int repl(const ReplArgs& a, std::istream& in, std::ostream& out) {
  const Scenario sc = load_scenario(a.scenario);
  const Resolved cfg = resolve_config(a.backend);
  const Backends backends = make_backends(cfg.backend);
  const std::optional<TaskRegistry> custom = load_registry(a.backend.registry_path);
  const TaskRegistry registry = custom ? *custom : default_registry();
  SimConfig sim;
  sim.seed = cfg.seed.value_or(0);
  sim.ransac.seed = sim.seed;
  const PipelineMode mode = parse_pipeline_mode(a.mode);

  SimWorld world(sc.world, sim);
  std::vector<std::string> scratch;
  for (const auto& ev : sc.events) {
    if (ev.type == EventType::Detections) world.apply_detections(ev.frame, scratch);
  }
  if (!world.layers().furniture.find(a.table)) throw ParameterError("unknown table '" + a.table + "'");
  const PipelineContext ctx{registry, sc.world.menu,
                            build_prompts(sc.world.environment, registry, sc.world.menu)};
  const BypassServer bypass(backends.bypass);

  out << "serving " << a.table << "; type :quit to leave\n";
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    const std::string utterance = text::trim(line);
    if (utterance.empty()) continue;
    if (utterance == ":quit") break;
    const Interaction step = interact(world, a.table, utterance, *backends.pipeline, ctx, bypass, mode);
    for (const auto& l : step.lines) out << l << "\n";
  }
  out << "\n";
  return kExitOk;
}

int metrics_diff(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const Metrics a = metrics_from_json(text::read_file(a_path));
  const Metrics b = metrics_from_json(text::read_file(b_path));
  const std::pair<const char*, int Metrics::*> fields[] = {
      {"orders_total", &Metrics::orders_total}, {"served_correct", &Metrics::served_correct},
      {"served_incorrect", &Metrics::served_incorrect}, {"assisted", &Metrics::assisted},
      {"collisions", &Metrics::collisions}};
  for (const auto& [name, member] : fields) {
    const int va = a.*member;
    const int vb = b.*member;
    out << (va == vb ? "  " : "! ") << name << ": " << va;
    if (va != vb) out << " -> " << vb << " (" << (vb > va ? "+" : "") << vb - va << ")";
    out << "\n";
  }
  const bool same_accuracy = a.served_correct * b.orders_total == b.served_correct * a.orders_total;
  out << (same_accuracy ? "  " : "! ") << "accuracy: " << fmt(a.accuracy(), 4);
  if (!same_accuracy) out << " -> " << fmt(b.accuracy(), 4);
  out << "\n" << (a == b ? "metrics identical\n" : "metrics differ\n");
  return a == b ? kExitOk : kExitDomain;
}

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (backend, seed)");
  cmd->add_option("--backend", f.backend, "rules or remote")->check(CLI::IsMember({"rules", "remote"}));
  cmd->add_option("--endpoint", f.endpoint, "chat endpoint base URL for the remote backend");
  cmd->add_option("--model", f.model, "model name for the remote backend");
  cmd->add_option("--registry", f.registry_path, "task registry JSON");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Layered restaurant map, task pipeline and simulator", "dynmap"};
  app.require_subcommand(1);

  auto* map = app.add_subcommand("map", "Build or inspect layer dumps");
  map->require_subcommand(1);
  MapBuildArgs build_args;
  auto* build = map->add_subcommand("build", "Track a detection log into a layer dump");
  build->add_option("--grid", build_args.grid, "static grid file")->required();
  build->add_option("--detections", build_args.detections, "detection log JSON")->required();
  build->add_option("--out", build_args.out, "layer dump to write")->required();
  build->add_option("--kitchen", build_args.kitchen, "furniture id to designate as kitchen");
  std::string dump_path;
  auto* dump = map->add_subcommand("dump", "Print a layer dump");
  dump->add_option("--layers", dump_path, "layer dump JSON")->required();

  NavArgs nav_args;
  auto* nav = app.add_subcommand("nav-goal", "Select a navigation goal next to furniture");
  nav->add_option("--map", nav_args.map, "static grid file")->required();
  nav->add_option("--layers", nav_args.layers, "layer dump JSON")->required();
  nav->add_option("--furniture", nav_args.furniture, "target furniture id")->required();
  nav->add_option("--robot", nav_args.robot, "robot pose x,y,theta")->required();
  nav->add_option("--robot-radius", nav_args.params.robot_radius, "inflation radius in metres");
  nav->add_option("--clearance", nav_args.params.clearance, "standoff from the furniture edge");
  nav->add_option("--alpha", nav_args.params.alpha, "distance weight");
  nav->add_option("--window", nav_args.params.window_half_width, "search window half width");
  nav->add_option("--neighborhood", nav_args.neighborhood, "window sum radius in cells");

  PlaceArgs place_args;
  auto* placement = app.add_subcommand("place", "Find a free spot on a tabletop point cloud");
  placement->add_option("--cloud", place_args.cloud, "point cloud, one 'x y z' per line")->required();
  placement->add_option("--radius", place_args.radius, "object footprint radius")->required();
  placement->add_option("--seed", place_args.seed, "RANSAC seed");
  placement->add_option("--iterations", place_args.ransac.iterations, "RANSAC iterations");
  placement->add_option("--threshold", place_args.ransac.inlier_eps, "inlier distance");

  RunArgs run_args;
  auto* run_sc = app.add_subcommand("run", "Replay a scenario and print metrics");
  run_sc->add_option("--scenario", run_args.scenario, "scenario JSON")->required();
  run_sc->add_option("--mode", run_args.mode, "parallel or sequential")
      ->check(CLI::IsMember({"parallel", "sequential"}));
  auto* seed_opt = run_sc->add_option("--seed", run_args.seed, "simulation seed");
  run_sc->add_option("--log", run_args.log, "event log file, '-' for stdout");
  run_sc->add_option("--metrics-out", run_args.metrics_out, "metrics JSON file");
  add_backend_flags(run_sc, run_args.backend);

  ReplArgs repl_args;
  auto* repl_sc = app.add_subcommand("repl", "Type customer utterances at a table");
  repl_sc->add_option("--scenario", repl_args.scenario, "scenario JSON for the world")->required();
  repl_sc->add_option("--table", repl_args.table, "table the customer sits at");
  repl_sc->add_option("--mode", repl_args.mode, "parallel or sequential")
      ->check(CLI::IsMember({"parallel", "sequential"}));
  add_backend_flags(repl_sc, repl_args.backend);

  auto* metrics = app.add_subcommand("metrics", "Compare metrics files");
  metrics->require_subcommand(1);
  std::vector<std::string> diff_files;
  auto* diff = metrics->add_subcommand("diff", "Field-by-field comparison");
  diff->add_option("files", diff_files, "two metrics JSON files")->required()->expected(2);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }
  run_args.seed_set = seed_opt->count() > 0;

  try {
    if (build->parsed()) return map_build(build_args, out);
    if (dump->parsed()) return map_dump(dump_path, out);
    if (nav->parsed()) return nav_goal(nav_args, out);
    if (placement->parsed()) return place(place_args, out);
    if (run_sc->parsed()) return run_cmd(run_args, out);
    if (repl_sc->parsed()) return repl(repl_args, in, out);
    if (diff->parsed()) return metrics_diff(diff_files[0], diff_files[1], out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace dynmap::cli
