#include "dynmap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "dynmap/errors.hpp"
#include "dynmap/text.hpp"
#include "json_util.hpp"

namespace dynmap {

// ---------------------------------------------------------------- planning

namespace {

struct Step {
  int dc;
  int dr;
  double cost;
};

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr Step kSteps[] = {{1, 0, 1.0},      {-1, 0, 1.0},     {0, 1, 1.0},
                           {0, -1, 1.0},     {1, 1, kSqrt2},   {-1, 1, kSqrt2},
                           {1, -1, kSqrt2},  {-1, -1, kSqrt2}};

double octile(CellIndex a, CellIndex b) {
  const int dx = std::abs(a.col - b.col);
  const int dy = std::abs(a.row - b.row);
  return (std::max(dx, dy) - std::min(dx, dy)) + kSqrt2 * std::min(dx, dy);
}

}  // namespace

std::vector<CellIndex> plan_path(const GridMap& map, const RiskField& risk, CellIndex start,
                                 CellIndex goal) {
  const GridGeometry& g = map.geometry();
  if (!(g == risk.geometry())) throw ParameterError("risk field geometry differs from the map");
  if (!g.contains(start) || !g.contains(goal)) throw BoundsError("path endpoint outside the map");
  if (risk.at(start) >= kLethalRisk) throw ParameterError("path start lies in a lethal cell");
  if (risk.at(goal) >= kLethalRisk) throw ParameterError("path goal lies in a lethal cell");
  if (start == goal) return {start};

  const auto passable = [&](CellIndex c) { return g.contains(c) && risk.at(c) < kLethalRisk; };
  const std::size_t n = g.size();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> closed(n, false);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t s = g.index(start);
  const std::size_t t = g.index(goal);
  cost[s] = 0.0;
  open.emplace(octile(start, goal), s);
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = true;
    if (idx == t) break;
    const CellIndex c{static_cast<int>(idx % g.width), static_cast<int>(idx / g.width)};
    for (const Step& step : kSteps) {
      const CellIndex nb{c.col + step.dc, c.row + step.dr};
      if (!passable(nb)) continue;
      if (step.dc != 0 && step.dr != 0 &&
          (!passable({c.col + step.dc, c.row}) || !passable({c.col, c.row + step.dr}))) {
        continue;
      }
      const std::size_t ni = g.index(nb);
      const double candidate = cost[idx] + step.cost;
      if (candidate < cost[ni]) {
        cost[ni] = candidate;
        parent[ni] = idx;
        open.emplace(candidate + octile(nb, goal), ni);
      }
    }
  }
  if (!closed[t]) throw UnreachableError("goal cell is not reachable");

  std::vector<CellIndex> path;
  for (std::size_t idx = t; idx != n; idx = parent[idx]) {
    path.push_back({static_cast<int>(idx % g.width), static_cast<int>(idx / g.width)});
    if (idx == s) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(const std::vector<CellIndex>& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const bool diagonal = path[i].col != path[i - 1].col && path[i].row != path[i - 1].row;
    total += diagonal ? kSqrt2 : 1.0;
  }
  return total;
}

// ---------------------------------------------------------------- metrics

std::string format_metrics(const Metrics& m) {
  char ratio[32];
  std::snprintf(ratio, sizeof(ratio), "%.4f", m.accuracy());
  std::ostringstream out;
  out << "orders_total: " << m.orders_total << "\n"
      << "served_correct: " << m.served_correct << "\n"
      << "served_incorrect: " << m.served_incorrect << "\n"
      << "assisted: " << m.assisted << "\n"
      << "collisions: " << m.collisions << "\n"
      << "accuracy: " << m.served_correct << "/" << m.orders_total << " (" << ratio << ")\n";
  return out.str();
}

std::string metrics_to_json(const Metrics& m) {
  return detail::json{{"orders_total", m.orders_total},
                      {"served_correct", m.served_correct},
                      {"served_incorrect", m.served_incorrect},
                      {"assisted", m.assisted},
                      {"collisions", m.collisions},
                      {"accuracy", m.accuracy()}}
             .dump(2) +
         "\n";
}

Metrics metrics_from_json(std::string_view document) {
  try {
    const auto j = detail::json::parse(document);
    Metrics m;
    m.orders_total = j.at("orders_total").get<int>();
    m.served_correct = j.at("served_correct").get<int>();
    m.served_incorrect = j.at("served_incorrect").get<int>();
    m.assisted = j.at("assisted").get<int>();
    m.collisions = j.at("collisions").get<int>();
    return m;
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("metrics: ") + e.what());
  }
}

// ---------------------------------------------------------------- scenario

namespace {

using detail::json;

NavGoalParams nav_from_json(const json& j) {
  NavGoalParams p;
  p.robot_radius = j.value("robot_radius", p.robot_radius);
  p.clearance = j.value("clearance", p.clearance);
  p.alpha = j.value("alpha", p.alpha);
  p.window_half_width = j.value("window_half_width", p.window_half_width);
  if (j.contains("neighborhood_radius")) p.neighborhood_radius = j["neighborhood_radius"].get<int>();
  p.validate();
  return p;
}

FaultEffect parse_effect(const std::string& s) {
  if (s == "fail") return FaultEffect::Fail;
  if (s == "wrong_item") return FaultEffect::WrongItem;
  throw ParameterError("unknown fault effect '" + s + "'");
}

ScenarioEvent event_from_json(const json& j) {
  ScenarioEvent ev;
  ev.t = j.at("t").get<double>();
  if (!std::isfinite(ev.t)) throw ParameterError("timestamp must be finite");
  const std::string type = j.at("type").get<std::string>();
  if (type == "detections") {
    ev.type = EventType::Detections;
    ev.frame.frame_id = j.at("frame_id").get<std::int64_t>();
    for (const auto& d : j.at("detections")) {
      ev.frame.detections.push_back(detail::detection_from_json(d, ev.frame.frame_id));
    }
  } else if (type == "call") {
    ev.type = EventType::Call;
    ev.table = j.at("table").get<std::string>();
  } else if (type == "utterance") {
    ev.type = EventType::Utterance;
    ev.table = j.at("table").get<std::string>();
    ev.text = j.at("text").get<std::string>();
  } else if (type == "human_obs") {
    ev.type = EventType::HumanObs;
    ev.human = detail::human_obs_from_json(j);
  } else if (type == "fault") {
    ev.type = EventType::Fault;
    ev.fault.skill = parse_skill_kind(j.at("skill").get<std::string>());
    ev.fault.trigger = j.at("trigger").get<int>();
    if (ev.fault.trigger < 0) throw ParameterError("fault trigger must be non-negative");
    ev.fault.effect = parse_effect(j.value("effect", std::string("fail")));
  } else {
    throw ParameterError("unknown event type '" + type + "'");
  }
  return ev;
}

}  // namespace

Scenario parse_scenario(std::string_view document, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario sc;
  try {
    sc.name = doc.value("name", std::string("scenario"));
    sc.note = doc.value("note", std::string());
    const json& w = doc.at("world");
    if (w.contains("grid_inline")) {
      sc.world.grid = load_grid(w["grid_inline"].get<std::string>());
    } else {
      std::filesystem::path p = w.at("grid").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      sc.world.grid = load_grid(text::read_file(p.string()));
    }
    for (const auto& z : w.value("zones", json::array())) {
      sc.world.zones.emplace_back(z.at("name").get<std::string>(),
                                  detail::vec_from_json<2>(z.at("p1"), "p1"),
                                  detail::vec_from_json<2>(z.at("p2"), "p2"));
    }
    for (const auto& item : w.at("menu")) {
      sc.world.menu.add({item.at("name").get<std::string>(), item.value("description", std::string())});
    }
    sc.world.kitchen_table = w.value("kitchen_table", std::string());
    if (w.contains("robot_start")) {
      const auto v = detail::vec_from_json<3>(w["robot_start"], "robot_start");
      sc.world.robot_start = Pose2D(v.x(), v.y(), v.z());
    }
    sc.world.stock_per_item = w.value("stock_per_item", sc.world.stock_per_item);
    if (sc.world.stock_per_item < 0) throw ParameterError("stock_per_item must be non-negative");
    sc.world.environment = w.value("environment", sc.world.environment);
    if (w.contains("nav")) sc.world.nav = nav_from_json(w["nav"]);
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(std::string("world: ") + e.what());
  }

  const json events = doc.value("events", json::array());
  double last_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const int index = static_cast<int>(i);
    try {
      ScenarioEvent ev = event_from_json(events[i]);
      if (ev.t < last_t) throw LoadError("timestamp goes backwards", index);
      last_t = ev.t;
      sc.events.push_back(std::move(ev));
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError(e.what(), index);
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  const std::string doc = text::read_file(path);
  return parse_scenario(doc, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------- world

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0.000") s.erase(0, 1);
  return s;
}

bool same_item(const std::string& a, const std::string& b) {
  return text::normalize(a) == text::normalize(b);
}

}  // namespace

SimWorld::SimWorld(const WorldConfig& world, const SimConfig& config)
    : world_(world),
      config_(config),
      nav_map_(world.grid),
      risk_(inflate(world.grid, world.nav.robot_radius)),
      robot_(world.robot_start),
      rng_(config.seed) {
  world_.nav.validate();
  for (const auto& z : world_.zones) layers_.zones.add(z);
  const CellIndex start = world_to_cell(nav_map_.geometry(), robot_.position());
  if (risk_.at(start) >= kLethalRisk) throw LoadError("robot start pose lies in a lethal cell");
  for (const auto& item : world_.menu.items()) {
    for (int k = 0; k < world_.stock_per_item; ++k) {
      items_.push_back({item.name + "#" + std::to_string(k), item.name, LocationKind::Kitchen, {}, {}});
    }
  }
}

void SimWorld::rebuild_risk() {
  nav_map_ = virtual_obstacles(layers_.furniture, world_.grid);
  risk_ = inflate(nav_map_, world_.nav.robot_radius);
}

void SimWorld::apply_detections(const DetectionFrame& frame, std::vector<std::string>& log) {
  const auto results = layers_.furniture.track_frame(frame.detections);
  std::string line = "  tracked:";
  for (const auto& r : results) line += " " + r.id + (r.status == TrackStatus::New ? "(new)" : "(matched)");
  log.push_back(line);
  if (!world_.kitchen_table.empty() && layers_.furniture.find(world_.kitchen_table) &&
      layers_.furniture.get(world_.kitchen_table).role != "kitchen") {
    layers_.furniture.set_role(world_.kitchen_table, "kitchen");
    log.push_back("  kitchen table: " + world_.kitchen_table);
  }
  rebuild_risk();
  const CellIndex here = world_to_cell(nav_map_.geometry(), robot_.position());
  if (risk_.at(here) >= kLethalRisk) ++collisions_;
}

std::optional<FaultEffect> SimWorld::consume_fault(SkillKind kind) {
  const int index = invocations_[kind]++;
  for (const auto& f : faults_) {
    if (f.skill == kind && f.trigger == index) return f.effect;
  }
  return std::nullopt;
}

std::string SimWorld::resolve(const std::string& target) const {
  if (target == "kitchen_table") {
    if (!world_.kitchen_table.empty()) return world_.kitchen_table;
    if (const auto* k = layers_.furniture.find_role("kitchen")) return k->id;
    return {};
  }
  if (target == "caller_table") return caller_;
  return target;
}

ItemInstance* SimWorld::gripper_item() {
  for (auto& item : items_) {
    if (item.where == LocationKind::Gripper) return &item;
  }
  return nullptr;
}

bool SimWorld::items_conserved() const {
  int in_gripper = 0;
  for (const auto& item : items_) {
    if (item.where == LocationKind::Gripper) ++in_gripper;
    if (item.where == LocationKind::Table && !layers_.furniture.find(item.table)) return false;
  }
  return in_gripper <= 1;
}

std::vector<std::pair<std::string, std::string>> SimWorld::take_placements() {
  return std::exchange(placements_, {});
}

SkillResult SimWorld::go_to(const std::string& furniture_id) { return navigate(furniture_id); }

SkillResult SimWorld::run(const SkillInvocation& inv) {
  switch (inv.kind) {
    case SkillKind::Navigate:
      if (consume_fault(inv.kind)) return SkillResult::failure("fault injected");
      return navigate(inv.argument);
    case SkillKind::Detect:
      return detect(inv.argument);
    case SkillKind::Grasp:
      if (consume_fault(inv.kind)) return SkillResult::failure("fault injected");
      return grasp(inv.argument);
    case SkillKind::Place:
      if (consume_fault(inv.kind)) return SkillResult::failure("fault injected");
      return place(inv.argument);
    case SkillKind::FindPlacement:
      if (consume_fault(inv.kind)) return SkillResult::failure("fault injected");
      return find_placement_on(inv.argument);
    case SkillKind::HandOver:
      if (consume_fault(inv.kind)) return SkillResult::failure("fault injected");
      return hand_over(inv.argument);
    case SkillKind::Speak:
      consume_fault(inv.kind);
      transcript_.push_back(inv.argument);
      return SkillResult::success();
  }
  return SkillResult::failure("unsupported skill");
}

SkillResult SimWorld::navigate(const std::string& target) {
  const std::string id = resolve(target);
  if (id.empty() || !layers_.furniture.find(id)) {
    return SkillResult::failure("unknown destination '" + target + "'");
  }
  if (location_ == id) return SkillResult::success();
  NavGoal goal;
  try {
    goal = select_goal(nav_map_, risk_, layers_.furniture, id, robot_, world_.nav);
  } catch (const NoGoalError& e) {
    return SkillResult::failure(std::string("no navigation goal: ") + e.what());
  }
  std::vector<CellIndex> path;
  try {
    path = plan_path(nav_map_, risk_, world_to_cell(nav_map_.geometry(), robot_.position()), goal.cell);
  } catch (const Error& e) {
    return SkillResult::failure(std::string("no path: ") + e.what());
  }
  for (const auto& c : path) {
    if (risk_.at(c) >= kLethalRisk) ++collisions_;
  }
  trajectory_cells_ += path.size();
  robot_ = goal.pose;
  location_ = id;
  log_.push_back("    nav " + id + ": goal cell (" + std::to_string(goal.cell.col) + "," +
                 std::to_string(goal.cell.row) + ") pose (" + fixed(goal.pose.x) + ", " +
                 fixed(goal.pose.y) + ", " + fixed(goal.pose.theta) + ") cost " +
                 std::to_string(goal.cost) + ", path " + std::to_string(path.size()) + " cells");
  return SkillResult::success();
}

SkillResult SimWorld::detect(const std::string& what) {
  const auto fault = consume_fault(SkillKind::Detect);
  detected_.reset();
  if (location_.empty()) return SkillResult::failure("nothing in view");
  const bool at_kitchen = location_ == resolve("kitchen_table");
  const auto visible = [&](const ItemInstance& item) {
    return at_kitchen ? item.where == LocationKind::Kitchen
                      : item.where == LocationKind::Table && item.table == location_;
  };
  if (fault == FaultEffect::Fail) return SkillResult::failure("not found");

  if (what == "dish") {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (!at_kitchen && visible(items_[i])) {
        detected_ = i;
        return SkillResult::success();
      }
    }
    return SkillResult::failure("no dish on the table");
  }

  if (fault == FaultEffect::WrongItem) {
    // Misrecognition: lock onto the next menu item that is in view.
    const auto& menu = world_.menu.items();
    std::size_t start = 0;
    for (std::size_t k = 0; k < menu.size(); ++k) {
      if (same_item(menu[k].name, what)) start = k;
    }
    for (std::size_t step = 1; step < menu.size(); ++step) {
      const std::string& other = menu[(start + step) % menu.size()].name;
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (visible(items_[i]) && items_[i].name == other) {
          detected_ = i;
          log_.push_back("    detect: took " + other + " for " + what);
          return SkillResult::success();
        }
      }
    }
    return SkillResult::failure("not found");
  }

  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (visible(items_[i]) && same_item(items_[i].name, what)) {
      detected_ = i;
      return SkillResult::success();
    }
  }
  return SkillResult::failure("not found");
}

SkillResult SimWorld::grasp(const std::string& what) {
  if (ItemInstance* held = gripper_item()) {
    // Already handed over by a person.
    if (what == "dish" || same_item(held->name, what)) return SkillResult::success();
    return SkillResult::failure("gripper occupied");
  }
  if (!detected_) return SkillResult::failure("nothing detected");
  ItemInstance& item = items_[*detected_];
  detected_.reset();
  item.where = LocationKind::Gripper;
  item.table.clear();
  return SkillResult::success();
}

SkillResult SimWorld::hand_over(const std::string& what) {
  if (gripper_item()) return SkillResult::failure("gripper occupied");
  for (auto& item : items_) {
    if (item.where == LocationKind::Kitchen && same_item(item.name, what)) {
      item.where = LocationKind::Gripper;
      log_.push_back("    hand_over: received " + item.name);
      return SkillResult::success();
    }
  }
  return SkillResult::failure("out of stock");
}

PointCloud SimWorld::table_cloud(const FurnitureInstance& table) {
  PointCloud cloud;
  std::normal_distribution<double> noise(0.0, 0.002);
  const Eigen::Matrix2d rot = rotation2d(table.pose.theta);
  const double top = table.base_z + table.dims.z();
  const double pitch = 0.02;
  const int nx = static_cast<int>(std::floor(table.dims.x() / pitch));
  const int ny = static_cast<int>(std::floor(table.dims.y() / pitch));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const Eigen::Vector2d local(-0.5 * table.dims.x() + i * pitch, -0.5 * table.dims.y() + j * pitch);
      if (std::abs(local.x()) > 0.5 * table.dims.x() || std::abs(local.y()) > 0.5 * table.dims.y()) continue;
      const Eigen::Vector2d p = table.pose.position() + rot * local;
      cloud.emplace_back(p.x(), p.y(), top + noise(rng_));
    }
  }
  // Items already on the table: 4 cm radius, 12 cm tall cylinders.
  for (const auto& item : items_) {
    if (item.where != LocationKind::Table || item.table != table.id) continue;
    for (int ring = 1; ring <= 6; ++ring) {
      for (int k = 0; k < 16; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 16.0;
        cloud.emplace_back(item.position.x() + 0.04 * std::cos(a), item.position.y() + 0.04 * std::sin(a),
                           top + 0.02 * ring);
      }
    }
  }
  return cloud;
}

SkillResult SimWorld::find_placement_on(const std::string& target) {
  const std::string id = resolve(target);
  pending_spot_.reset();
  if (id.empty() || location_ != id) return SkillResult::failure("not at the table");
  const FurnitureInstance& table = layers_.furniture.get(id);
  const PointCloud cloud = table_cloud(table);
  try {
    RansacParams params = config_.ransac;
    params.seed = config_.ransac.seed ^ rng_();
    const PlaneFit fit = ransac_plane(cloud, params);
    const Placement spot = find_placement(cloud, fit.plane, fit.inliers, config_.object_radius,
                                          config_.placement);
    pending_spot_ = spot.point;
    log_.push_back("    placement on " + id + ": (" + fixed(spot.point.x(), 3) + ", " +
                   fixed(spot.point.y(), 3) + ", " + fixed(spot.point.z(), 3) + ") clearance " +
                   fixed(spot.clearance, 3));
  } catch (const Error& e) {
    return SkillResult::failure(std::string("no space: ") + e.what());
  }
  return SkillResult::success();
}

SkillResult SimWorld::place(const std::string&) {
  ItemInstance* held = gripper_item();
  if (!held) return SkillResult::failure("empty gripper");
  if (location_.empty()) return SkillResult::failure("nowhere to place");
  if (location_ == resolve("kitchen_table")) {
    held->where = LocationKind::Kitchen;
    held->table.clear();
    pending_spot_.reset();
    return SkillResult::success();
  }
  const FurnitureInstance& table = layers_.furniture.get(location_);
  held->where = LocationKind::Table;
  held->table = location_;
  held->position = pending_spot_.value_or(
      Eigen::Vector3d(table.pose.x, table.pose.y, table.base_z + table.dims.z()));
  pending_spot_.reset();
  placements_.emplace_back(location_, held->name);
  return SkillResult::success();
}

// ---------------------------------------------------------------- run

std::string join_log(const std::vector<std::string>& log) {
  std::string out;
  for (const auto& line : log) out += line + "\n";
  return out;
}

Interaction interact(SimWorld& world, const std::string& table, const std::string& utterance,
                     Backend& backend, const PipelineContext& ctx, const BypassServer& bypass,
                     PipelineMode mode) {
  Interaction step;
  world.set_caller(table);
  auto& log = world.log();
  const std::size_t mark = log.size();
  if (world.location() != table) {
    const SkillResult r = world.go_to(table);
    if (!r.ok) log.push_back("  could not reach " + table + ": " + r.reason);
  }
  step.handled = handle(utterance, backend, ctx, mode);
  log.push_back("  response: " + step.handled.response + (step.handled.respond_fell_back ? " [fallback]" : ""));
  log.push_back("  parsed: " + format_understand_line(step.handled.task) +
                (step.handled.understand_fell_back ? " [fallback]" : ""));
  const std::map<std::string, std::string> vars{{"response", step.handled.response},
                                                {"menu_description", menu_description(ctx.menu)}};
  world.take_placements();
  step.outcome = execute(step.handled.task, ctx.registry, world, bypass, vars);
  std::istringstream trace(format_outcome(step.outcome));
  for (std::string line; std::getline(trace, line);) log.push_back(line);
  for (const auto& [where, name] : world.take_placements()) {
    if (where == table) step.delivered = name;
  }
  step.lines.assign(log.begin() + static_cast<std::ptrdiff_t>(mark), log.end());
  log.resize(mark);
  return step;
}

RunResult run(const Scenario& scenario, const SimConfig& config) {
  const TaskRegistry registry = config.registry ? *config.registry : default_registry();
  if (!registry.find("casual_chat")) throw ParameterError("registry must define casual_chat");
  std::shared_ptr<Backend> backend = config.backend;
  if (!backend) backend = std::make_shared<RuleBackend>();
  const Menu& menu = scenario.world.menu;
  const PipelineContext ctx{registry, menu, build_prompts(scenario.world.environment, registry, menu)};
  const BypassServer bypass(config.bypass_client);

  SimWorld world(scenario.world, config);
  auto& log = world.log();
  log.push_back("scenario " + scenario.name + " mode=" + to_string(config.mode) +
                " seed=" + std::to_string(config.seed));
  Metrics m;

  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const ScenarioEvent& ev = scenario.events[i];
    const int index = static_cast<int>(i);
    char head[48];
    std::snprintf(head, sizeof(head), "[%03d] t=%.1f ", index, ev.t);
    const std::string prefix = head;

    const auto require_table = [&](const std::string& id) {
      if (!world.layers().furniture.find(id)) throw LoadError("unknown table '" + id + "'", index);
    };

    switch (ev.type) {
      case EventType::Detections:
        log.push_back(prefix + "detections frame " + std::to_string(ev.frame.frame_id) + " (" +
                      std::to_string(ev.frame.detections.size()) + " boxes)");
        try {
          world.apply_detections(ev.frame, log);
        } catch (const OrderingError& e) {
          throw LoadError(e.what(), index);
        }
        break;
      case EventType::Fault:
        world.arm(ev.fault);
        log.push_back(prefix + "fault armed: " + to_string(ev.fault.skill) + " #" +
                      std::to_string(ev.fault.trigger) +
                      (ev.fault.effect == FaultEffect::Fail ? " fail" : " wrong_item"));
        break;
      case EventType::HumanObs: {
        const std::string id = world.layers().humans.upsert(ev.human);
        const auto& layers = world.layers();
        log.push_back(prefix + "human " + id + ": " +
                      describe(layers.humans.get(id), layers.zones, layers.furniture));
        break;
      }
      case EventType::Call: {
        require_table(ev.table);
        world.set_caller(ev.table);
        log.push_back(prefix + "call from " + ev.table);
        const SkillResult r = world.go_to(ev.table);
        if (!r.ok) log.push_back("  could not reach " + ev.table + ": " + r.reason);
        break;
      }
      case EventType::Utterance: {
        require_table(ev.table);
        world.set_caller(ev.table);
        log.push_back(prefix + "utterance at " + ev.table + ": \"" + ev.text + "\"");
        Interaction step = interact(world, ev.table, ev.text, *backend, ctx, bypass, config.mode);
        log.insert(log.end(), step.lines.begin(), step.lines.end());
        if (step.outcome.state == OutcomeState::CompletedWithAssist) ++m.assisted;
        if (step.handled.task.name == "serve_order") {
          ++m.orders_total;
          const std::string& ordered = step.handled.task.slots.at("item");
          if (!step.delivered) {
            log.push_back("  served: nothing (ordered " + ordered + ")");
          } else if (same_item(*step.delivered, ordered)) {
            ++m.served_correct;
            log.push_back("  served: " + *step.delivered + " (correct)");
          } else {
            ++m.served_incorrect;
            log.push_back("  served: " + *step.delivered + " (ordered " + ordered + ", incorrect)");
          }
        }
        break;
      }
    }
    if (!world.items_conserved()) throw Error("item conservation violated at event " + std::to_string(index));
  }
  m.collisions = world.collisions();
  log.push_back("trajectory cells: " + std::to_string(world.trajectory_cells()));
  std::istringstream summary(format_metrics(m));
  for (std::string line; std::getline(summary, line);) log.push_back(line);
  return {m, world.log(), world.layers()};
}

}  // namespace dynmap
