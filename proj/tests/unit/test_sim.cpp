#include <doctest.h>

#include <json.hpp>
#include <random>

#include "dynmap/errors.hpp"
#include "dynmap/sim.hpp"
#include "oracles.hpp"
#include "suites.hpp"

using namespace dynmap;
using nlohmann::json;

namespace {

// 3 m x 2 m room with walls, a kitchen table on the left and a guest table on
// the right.
json small_world() {
  GridMap grid(0.05, Eigen::Vector2d::Zero(), 60, 40);
  for (int c = 0; c < 60; ++c) {
    grid.set({c, 0}, Cell::Occupied);
    grid.set({c, 39}, Cell::Occupied);
  }
  for (int r = 0; r < 40; ++r) {
    grid.set({0, r}, Cell::Occupied);
    grid.set({59, r}, Cell::Occupied);
  }
  json w;
  w["grid_inline"] = save_grid(grid);
  w["menu"] = json::array({{{"name", "cola"}, {"description", "chilled"}}, {{"name", "water"}}});
  w["kitchen_table"] = "table_0";
  w["robot_start"] = {1.5, 1.0, 0.0};
  w["stock_per_item"] = 3;
  w["zones"] = json::array({{{"name", "cafe"}, {"p1", {0, 0}}, {"p2", {3, 2}}}});
  w["nav"] = {{"robot_radius", 0.15}, {"clearance", 0.1}, {"alpha", 10.0}, {"window_half_width", 0.5}};
  return w;
}

json detections_event() {
  return {{"t", 0.0},
          {"type", "detections"},
          {"frame_id", 1},
          {"detections",
           json::array({{{"class", "table"}, {"center", {0.7, 1.0, 0.36}}, {"dims", {0.6, 0.4, 0.72}}},
                        {{"class", "table"}, {"center", {2.3, 1.0, 0.36}}, {"dims", {0.6, 0.4, 0.72}}}})}};
}

json order(double t, const std::string& text) {
  return {{"t", t}, {"type", "utterance"}, {"table", "table_1"}, {"text", text}};
}

json fault(double t, const std::string& effect, int trigger = 0) {
  return {{"t", t}, {"type", "fault"}, {"skill", "detect"}, {"trigger", trigger}, {"effect", effect}};
}

Scenario small_scenario(json events) {
  json doc{{"name", "small"}, {"world", small_world()}, {"events", std::move(events)}};
  return parse_scenario(doc.dump());
}

}  // namespace

TEST_CASE("plan_path matches uniform-cost search on random grids") {
  std::mt19937_64 rng(61);
  int reachable = 0, unreachable = 0;
  for (int trial = 0; trial < 150; ++trial) {
    std::uniform_int_distribution<int> dim(2, 32);
    const int w = dim(rng), h = dim(rng);
    const GridMap map = oracle::random_grid(rng, w, h, 0.05, 0.25, 0.05);
    const RiskField risk = inflate(map, 0.0);
    std::vector<CellIndex> free;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (risk.at({c, r}) < kLethalRisk) free.push_back({c, r});
      }
    }
    if (free.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const CellIndex s = free[pick(rng)], g = free[pick(rng)];
    const auto expected = oracle::uniform_cost(risk, s, g);
    if (!expected) {
      ++unreachable;
      REQUIRE_THROWS_AS(plan_path(map, risk, s, g), UnreachableError);
      continue;
    }
    ++reachable;
    const auto path = plan_path(map, risk, s, g);
    REQUIRE(path.front() == s);
    REQUIRE(path.back() == g);
    REQUIRE(path_cost(path) == doctest::Approx(*expected).epsilon(1e-12));
    for (std::size_t i = 0; i < path.size(); ++i) {
      REQUIRE(risk.at(path[i]) < kLethalRisk);
      if (i == 0) continue;
      const int dc = path[i].col - path[i - 1].col, dr = path[i].row - path[i - 1].row;
      REQUIRE(std::max(std::abs(dc), std::abs(dr)) == 1);
      if (dc != 0 && dr != 0) {
        REQUIRE(risk.at({path[i - 1].col + dc, path[i - 1].row}) < kLethalRisk);
        REQUIRE(risk.at({path[i - 1].col, path[i - 1].row + dr}) < kLethalRisk);
      }
    }
  }
  CHECK(reachable > 50);
  CHECK(unreachable > 0);
}

TEST_CASE("plan_path edge cases") {
  GridMap map(0.05, Eigen::Vector2d::Zero(), 3, 3);
  map.set({1, 0}, Cell::Occupied);
  map.set({0, 1}, Cell::Occupied);
  const RiskField risk = inflate(map, 0.0);
  CHECK(plan_path(map, risk, {2, 2}, {2, 2}) == std::vector<CellIndex>{{2, 2}});
  CHECK_THROWS_AS(plan_path(map, risk, {0, 0}, {2, 2}), UnreachableError);  // only a cut corner leads out
  CHECK_THROWS_AS(plan_path(map, risk, {1, 0}, {2, 2}), ParameterError);
  CHECK_THROWS_AS(plan_path(map, risk, {3, 0}, {2, 2}), BoundsError);
  CHECK(path_cost({{0, 0}, {1, 1}, {2, 1}}) == doctest::Approx(1.0 + std::sqrt(2.0)));
}

TEST_CASE("scenario errors name the offending event") {
  json doc{{"name", "bad"}, {"world", small_world()}, {"events", {detections_event(), order(-1.0, "cola")}}};
  try {
    parse_scenario(doc.dump());
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(e.event_index() == 1);
  }
  doc["events"] = {detections_event(), {{"t", 1.0}, {"type", "teleport"}}};
  CHECK_THROWS_AS(parse_scenario(doc.dump()), LoadError);
  doc["events"] = {fault(0.0, "explode")};
  CHECK_THROWS_AS(parse_scenario(doc.dump()), LoadError);
  CHECK_THROWS_AS(parse_scenario("{"), LoadError);
  CHECK_THROWS_AS(parse_scenario(R"({"world": {}})"), LoadError);

  const Scenario unknown = small_scenario({detections_event(), order(1.0, "cola")});
  Scenario edited = unknown;
  edited.events[1].table = "table_9";
  try {
    run(edited);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(e.event_index() == 1);
  }
}

TEST_CASE("a scenario without events yields zero metrics") {
  const RunResult r = run(small_scenario(json::array()));
  CHECK(r.metrics == Metrics{});
  CHECK(r.metrics.accuracy() == 0.0);
  CHECK(r.log.front() == "scenario small mode=parallel seed=0");
}

TEST_CASE("an order is served to the calling table") {
  const RunResult r = run(small_scenario({detections_event(), order(1.0, "Could I have a cola?")}));
  CHECK(r.metrics.orders_total == 1);
  CHECK(r.metrics.served_correct == 1);
  CHECK(r.metrics.assisted == 0);
  CHECK(r.metrics.collisions == 0);
  const std::string log = join_log(r.log);
  CHECK(log.find("served: cola (correct)") != std::string::npos);
  CHECK(log.find("outcome: COMPLETED\n") != std::string::npos);
}

TEST_CASE("detect faults lead to assisted or wrong deliveries") {
  const RunResult assisted = run(small_scenario({detections_event(), fault(0.5, "fail"), order(1.0, "bring me cola")}));
  CHECK(assisted.metrics.assisted == 1);
  CHECK(assisted.metrics.served_correct == 1);
  CHECK(join_log(assisted.log).find("help: I could not find the cola. Could you place it in my hand?") !=
        std::string::npos);

  const RunResult wrong =
      run(small_scenario({detections_event(), fault(0.5, "wrong_item"), order(1.0, "bring me cola")}));
  CHECK(wrong.metrics.served_incorrect == 1);
  CHECK(join_log(wrong.log).find("served: water (ordered cola, incorrect)") != std::string::npos);
}

TEST_CASE("other tasks are not counted as orders") {
  const RunResult r = run(small_scenario({detections_event(), order(1.0, "What is on the menu?"),
                                          order(2.0, "Nice weather today"), order(3.0, "bring me a pizza")}));
  CHECK(r.metrics.orders_total == 0);
  const std::string log = join_log(r.log);
  CHECK(log.find("speak(Today we have cola (chilled) and water.) -> OK") != std::string::npos);
}

TEST_CASE("skills follow their contracts") {
  const Scenario sc = small_scenario({detections_event()});
  SimWorld world(sc.world, SimConfig{});
  std::vector<std::string> log;
  world.apply_detections(sc.events[0].frame, log);
  CHECK(world.layers().furniture.get("table_0").role == "kitchen");
  CHECK(world.run({SkillKind::Detect, "cola"}).reason == "nothing in view");
  CHECK(world.run({SkillKind::Place, "cola"}).reason == "empty gripper");
  CHECK(world.run({SkillKind::Navigate, "kitchen_table"}).ok);
  CHECK(world.location() == "table_0");
  CHECK(world.run({SkillKind::Grasp, "cola"}).reason == "nothing detected");
  CHECK(world.run({SkillKind::Detect, "cola"}).ok);
  CHECK(world.run({SkillKind::Grasp, "cola"}).ok);
  CHECK(world.run({SkillKind::HandOver, "water"}).reason == "gripper occupied");
  CHECK(world.run({SkillKind::FindPlacement, "table_1"}).reason == "not at the table");
  world.set_caller("table_1");
  CHECK(world.run({SkillKind::Navigate, "caller_table"}).ok);
  CHECK(world.run({SkillKind::FindPlacement, "caller_table"}).ok);
  CHECK(world.run({SkillKind::Place, "cola"}).ok);
  CHECK(world.take_placements() == std::vector<std::pair<std::string, std::string>>{{"table_1", "cola"}});
  CHECK(world.run({SkillKind::Detect, "dish"}).ok);
  CHECK(world.run({SkillKind::Navigate, "nowhere"}).reason == "unknown destination 'nowhere'");
  CHECK(world.items_conserved());
  CHECK(world.collisions() == 0);
}

TEST_CASE("stock runs out") {
  const Scenario sc = small_scenario({detections_event()});
  SimWorld world(sc.world, SimConfig{});
  std::vector<std::string> log;
  world.apply_detections(sc.events[0].frame, log);
  world.go_to("table_0");
  for (int k = 0; k < 3; ++k) {
    REQUIRE(world.run({SkillKind::HandOver, "water"}).ok);
    world.go_to("table_1");
    REQUIRE(world.run({SkillKind::Place, "water"}).ok);
    world.go_to("table_0");
  }
  CHECK(world.run({SkillKind::HandOver, "water"}).reason == "out of stock");
  CHECK(world.run({SkillKind::Detect, "water"}).reason == "not found");
}

TEST_CASE("metrics text and JSON forms") {
  Metrics m{41, 37, 4, 7, 0};
  CHECK(format_metrics(m) ==
        "orders_total: 41\nserved_correct: 37\nserved_incorrect: 4\nassisted: 7\ncollisions: 0\n"
        "accuracy: 37/41 (0.9024)\n");
  CHECK(metrics_from_json(metrics_to_json(m)) == m);
  CHECK_THROWS_AS(metrics_from_json("[]"), ParseError);
}

TEST_CASE("the restaurant scenario reproduces its counts deterministically") {
  const Scenario sc = load_scenario(suites::source_path("data/restaurant_41.json"));
  const RunResult a = run(sc);
  CHECK(a.metrics == Metrics{41, 37, 4, 7, 0});
  const RunResult b = run(sc);
  CHECK(join_log(a.log) == join_log(b.log));
  SimConfig seq;
  seq.mode = PipelineMode::Sequential;
  CHECK(run(sc, seq).metrics == a.metrics);
}

TEST_CASE("the bypass trace matches its golden file") {
  std::string detail;
  CHECK_MESSAGE(suites::matches_golden("bypass_trace.log", suites::bypass_trace(), &detail), detail);
}
