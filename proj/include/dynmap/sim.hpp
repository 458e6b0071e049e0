#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dynmap/grid.hpp"
#include "dynmap/layers_io.hpp"
#include "dynmap/llm_client.hpp"
#include "dynmap/nav_goal.hpp"
#include "dynmap/placement.hpp"
#include "dynmap/task_engine.hpp"

namespace dynmap {

// Shortest 8-connected path over cells with risk < 100; diagonal steps cost
// sqrt(2) and may not cut a blocked corner. Throws UnreachableError.
std::vector<CellIndex> plan_path(const GridMap& map, const RiskField& risk, CellIndex start,
                                 CellIndex goal);
double path_cost(const std::vector<CellIndex>& path);

enum class FaultEffect { Fail, WrongItem };

struct Fault {
  SkillKind skill = SkillKind::Detect;
  int trigger = 0;  // zero-based invocation index of that skill kind in the run
  FaultEffect effect = FaultEffect::Fail;
};

enum class EventType { Detections, Call, Utterance, HumanObs, Fault };

struct ScenarioEvent {
  double t = 0.0;
  EventType type = EventType::Call;
  std::string table;
  std::string text;
  DetectionFrame frame;
  HumanObservation human;
  Fault fault;
};

struct WorldConfig {
  GridMap grid{0.05, Eigen::Vector2d::Zero(), 1, 1};
  std::vector<Zone> zones;
  Menu menu;
  std::string kitchen_table;
  Pose2D robot_start;
  int stock_per_item = 20;
  std::string environment = "A small restaurant.";
  NavGoalParams nav;
};

struct Scenario {
  std::string name;
  std::string note;
  WorldConfig world;
  std::vector<ScenarioEvent> events;
};

// `base_dir` resolves a relative world.grid path. Throws LoadError naming the
// offending event index.
Scenario parse_scenario(std::string_view document, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct Metrics {
  int orders_total = 0;
  int served_correct = 0;
  int served_incorrect = 0;
  int assisted = 0;
  int collisions = 0;

  double accuracy() const {
    return orders_total == 0 ? 0.0 : static_cast<double>(served_correct) / orders_total;
  }
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

std::string format_metrics(const Metrics& m);
std::string metrics_to_json(const Metrics& m);
Metrics metrics_from_json(std::string_view document);

struct SimConfig {
  PipelineMode mode = PipelineMode::Parallel;
  std::shared_ptr<Backend> backend;  // rule backend when null
  std::shared_ptr<ChatClient> bypass_client;
  std::optional<TaskRegistry> registry;
  std::uint64_t seed = 0;
  double object_radius = 0.04;
  RansacParams ransac;
  PlacementParams placement;
};

enum class LocationKind { Kitchen, Gripper, Table };

struct ItemInstance {
  std::string id;  // e.g. "cola#3"
  std::string name;
  LocationKind where = LocationKind::Kitchen;
  std::string table;  // when where == Table
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

// Simulated robot and restaurant state; executes skills deterministically.
class SimWorld : public SkillRunner {
 public:
  SimWorld(const WorldConfig& world, const SimConfig& config);

  SkillResult run(const SkillInvocation& invocation) override;

  void apply_detections(const DetectionFrame& frame, std::vector<std::string>& log);
  void arm(const Fault& fault) { faults_.push_back(fault); }
  void set_caller(const std::string& table) { caller_ = table; }
  const std::string& caller() const { return caller_; }
  // Navigates to a furniture id outside of any task.
  SkillResult go_to(const std::string& furniture_id);

  MapLayers& layers() { return layers_; }
  const MapLayers& layers() const { return layers_; }
  const GridMap& nav_map() const { return nav_map_; }
  const RiskField& risk() const { return risk_; }
  const Pose2D& robot() const { return robot_; }
  const std::string& location() const { return location_; }
  const std::vector<ItemInstance>& items() const { return items_; }
  const std::vector<std::string>& transcript() const { return transcript_; }
  int collisions() const { return collisions_; }
  std::size_t trajectory_cells() const { return trajectory_cells_; }
  // Names of items placed on a table since the last call to this function.
  std::vector<std::pair<std::string, std::string>> take_placements();
  // Every item instance has exactly one location; at most one in the gripper.
  bool items_conserved() const;

  std::vector<std::string>& log() { return log_; }

 private:
  std::optional<FaultEffect> consume_fault(SkillKind kind);
  std::string resolve(const std::string& target) const;
  ItemInstance* gripper_item();
  SkillResult navigate(const std::string& target);
  SkillResult detect(const std::string& what);
  SkillResult grasp(const std::string& what);
  SkillResult place(const std::string& what);
  SkillResult find_placement_on(const std::string& target);
  SkillResult hand_over(const std::string& what);
  PointCloud table_cloud(const FurnitureInstance& table);
  void rebuild_risk();

  WorldConfig world_;
  SimConfig config_;
  MapLayers layers_;
  GridMap nav_map_;
  RiskField risk_;
  Pose2D robot_;
  std::string location_;
  std::string caller_;
  std::vector<ItemInstance> items_;
  std::optional<std::size_t> detected_;
  std::optional<Eigen::Vector3d> pending_spot_;
  std::vector<Fault> faults_;
  std::map<SkillKind, int> invocations_;
  std::vector<std::string> transcript_;
  std::vector<std::pair<std::string, std::string>> placements_;
  std::vector<std::string> log_;
  std::mt19937_64 rng_;
  int collisions_ = 0;
  std::size_t trajectory_cells_ = 0;
};

// One customer utterance at `table`: travel there if needed, understand and
// respond, execute the task. `lines` holds the log lines of the exchange.
struct Interaction {
  HandleResult handled;
  TaskOutcome outcome;
  std::optional<std::string> delivered;  // item left on `table`, if any
  std::vector<std::string> lines;
};

Interaction interact(SimWorld& world, const std::string& table, const std::string& utterance,
                     Backend& backend, const PipelineContext& ctx, const BypassServer& bypass,
                     PipelineMode mode);

struct RunResult {
  Metrics metrics;
  std::vector<std::string> log;
  MapLayers layers;
};

// Replays the scenario through mapping, the understand/respond pipeline and
// task execution. Deterministic for a given scenario and config.
RunResult run(const Scenario& scenario, const SimConfig& config = {});

std::string join_log(const std::vector<std::string>& log);

}  // namespace dynmap
