// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "dynmap/errors.hpp"
#include "dynmap/layers_io.hpp"
#include "dynmap/sim.hpp"
#include "dynmap/text.hpp"
#include "suites.hpp"

using namespace dynmap;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Empty, or the first disagreement prefixed for the detail text.
std::string first_failure(const std::string& s) { return s.empty() ? "" : "; first failure: " + s; }

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict experiment_reproduction() {
  const auto t0 = Clock::now();
  const Scenario sc = load_scenario(suites::source_path("data/restaurant_41.json"));
  SimConfig cfg;
  cfg.mode = PipelineMode::Parallel;
  const RunResult r = run(sc, cfg);
  const double elapsed = seconds_since(t0);
  const Metrics& m = r.metrics;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "orders %d, correct %d, incorrect %d, accuracy %d/%d, collisions %d, %.2f s",
                m.orders_total, m.served_correct, m.served_incorrect, m.served_correct, m.orders_total,
                m.collisions, elapsed);
  const bool ok = m.orders_total == 41 && m.served_correct == 37 && m.served_incorrect == 4 &&
                  m.served_correct * 41 == 37 * m.orders_total && m.collisions == 0 && elapsed < 5.0;
  return {ok, buf};
}

Verdict six_table_map() {
  const DetectionLog log = parse_detection_log(text::read_file(suites::source_path("data/six_tables_detections.json")));
  FurnitureLayer layer;
  apply_detection_log(layer, log);
  std::string ids;
  int kitchens = 0;
  bool names_ok = layer.size() == 6;
  int k = 0;
  for (const auto& f : layer.list()) {
    ids += (ids.empty() ? "" : " ") + f.id;
    names_ok = names_ok && f.id == "table_" + std::to_string(k++);
    if (f.role == "kitchen") ++kitchens;
  }
  return {names_ok && kitchens == 1, ids + "; kitchen designations " + std::to_string(kitchens)};
}

Verdict nav_goal_equivalence() {
  const auto t0 = Clock::now();
  const suites::Tally random = suites::nav_goal_random(3, 200, 40);
  const suites::Tally sweep = suites::nav_goal_sweep();
  const double elapsed = seconds_since(t0);
  char buf[240];
  std::snprintf(buf, sizeof(buf), "random %d/%d (%d with a goal), 12x12 sweep %d/%d (%d with a goal), %.2f s%s",
                random.agreed, random.total, random.with_goal, sweep.agreed, sweep.total, sweep.with_goal, elapsed,
                first_failure(random.first_failure + sweep.first_failure).c_str());
  return {random.all() && sweep.all() && random.total == 200 && elapsed < 30.0, buf};
}

Verdict risk_field() {
  const suites::Tally t = suites::inflation_exhaustive(4);
  // Goals from the nav suites and the trajectories of the two scripted runs.
  suites::nav_goal_random(5, 50, 40);
  const int goal_violations = suites::nav_goal_risk_violations();
  const Scenario sc = load_scenario(suites::source_path("data/restaurant_41.json"));
  const int trajectory_violations = run(sc).metrics.collisions;
  char buf[240];
  std::snprintf(buf, sizeof(buf), "inflation %d/%d, goal risk violations %d, trajectory violations %d%s",
                t.agreed, t.total, goal_violations, trajectory_violations, first_failure(t.first_failure).c_str());
  return {t.all() && goal_violations == 0 && trajectory_violations == 0, buf};
}

Verdict tracking() {
  const suites::Tally drift = suites::tracking_drift(6, 100);
  const suites::Tally teleport = suites::tracking_teleport(7, 100);
  const suites::Tally iou = suites::iou_pairs(8, 1000);
  char buf[240];
  std::snprintf(buf, sizeof(buf), "drift retention %d/%d, teleport new ids %d/%d, IoU vs clipping %d/%d%s",
                drift.agreed, drift.total, teleport.agreed, teleport.total, iou.agreed, iou.total,
                first_failure(drift.first_failure + teleport.first_failure + iou.first_failure).c_str());
  return {drift.all() && teleport.all() && iou.all() && drift.total == 100 && teleport.total == 100 &&
              iou.total == 1000,
          buf};
}

Verdict ransac() {
  const auto t0 = Clock::now();
  const suites::RansacStats s = suites::ransac_trials(9, 100);
  const double elapsed = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof(buf), "normal within 2 deg %d/%d, recall >= 95%% %d/%d (min %.4f), repeatable %s, %.2f s",
                s.within_two_degrees, s.trials, s.recall_ok, s.trials, s.min_recall, s.repeatable ? "yes" : "no",
                elapsed);
  return {s.trials == 100 && s.within_two_degrees >= 99 && s.recall_ok == s.trials && s.repeatable &&
              elapsed < 10.0,
          buf};
}

Verdict pipeline_contract() {
  const suites::LatchStats s = suites::latch_runs(100);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "parallel respond-before-release %d/%d, sequential respond-after-understand %d/%d",
                s.parallel_ok, s.runs, s.sequential_ok, s.runs);
  return {s.runs == 100 && s.parallel_ok == 100 && s.sequential_ok == 100, buf};
}

Verdict bypass_recovery() {
  const std::string trace = suites::bypass_trace();
  std::string detail;
  const bool golden = suites::matches_golden("bypass_trace.log", trace, &detail);
  const bool help = trace.find("help: I could not find the orange juice. Could you place it in my hand?") !=
                    std::string::npos;
  const bool assisted = trace.find("outcome: COMPLETED_WITH_ASSIST") != std::string::npos;
  return {golden && help && assisted,
          std::string("golden ") + (golden ? "identical" : "differs " + detail) + ", help line " +
              (help ? "present" : "missing") + ", assisted outcome " + (assisted ? "present" : "missing")};
}

Verdict determinism_and_formats() {
  std::string failures;
  const auto expect = [&](bool ok, const char* what) {
    if (!ok) failures += std::string(failures.empty() ? "" : ", ") + what;
  };
  const std::string grid_text = text::read_file(suites::source_path("data/restaurant.grid"));
  expect(save_grid(load_grid(grid_text)) == grid_text, "grid");

  const Scenario sc = load_scenario(suites::source_path("data/restaurant_41.json"));
  SimConfig cfg;
  cfg.seed = 11;
  const RunResult a = run(sc, cfg);
  const RunResult b = run(sc, cfg);
  expect(join_log(a.log) == join_log(b.log) && a.metrics == b.metrics, "parallel replay");
  cfg.mode = PipelineMode::Sequential;
  expect(join_log(run(sc, cfg).log) == join_log(run(sc, cfg).log), "sequential replay");

  const std::string layers = dump_layers(a.layers);
  expect(dump_layers(load_layers(layers)) == layers, "layers");
  const std::string registry = dump_registry(default_registry());
  expect(dump_registry(parse_registry(registry)) == registry, "registry");
  const std::string metrics = metrics_to_json(a.metrics);
  expect(metrics_to_json(metrics_from_json(metrics)) == metrics, "metrics");
  return {failures.empty(), failures.empty() ? "grid, layers, registry, metrics round trips; replays log-identical"
                                             : "failed: " + failures};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"experiment reproduction", experiment_reproduction},
      {"six-table map", six_table_map},
      {"nav-goal oracle equivalence", nav_goal_equivalence},
      {"risk-field correctness", risk_field},
      {"tracking stability", tracking},
      {"RANSAC quality", ransac},
      {"parallel-pipeline contract", pipeline_contract},
      {"bypass recovery path", bypass_recovery},
      {"determinism and formats", determinism_and_formats},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d %s: %s (%s)\n", n, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
