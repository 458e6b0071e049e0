#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynmap/furniture.hpp"

namespace dynmap {

// Named rectangular area given by any two diagonal corners.
class Zone {
 public:
  Zone(std::string name, const Eigen::Vector2d& p1, const Eigen::Vector2d& p2);

  const std::string& name() const { return name_; }
  const Eigen::Vector2d& min() const { return min_; }
  const Eigen::Vector2d& max() const { return max_; }
  // Closed rectangle: boundary points belong to the zone.
  bool contains(const Eigen::Vector2d& p) const;

  friend bool operator==(const Zone&, const Zone&) = default;

 private:
  std::string name_;
  Eigen::Vector2d min_;
  Eigen::Vector2d max_;
};

class ZoneLayer {
 public:
  void add(Zone zone);
  // First zone in insertion order containing p.
  std::optional<std::string> zone_at(const Eigen::Vector2d& p) const;
  const Zone& get(const std::string& name) const;
  const std::vector<Zone>& zones() const { return zones_; }

 private:
  std::vector<Zone> zones_;
};

enum class Action { Sitting, Standing, Walking, Waving, Unknown };

std::string to_string(Action a);
Action parse_action(const std::string& label);  // throws ParameterError off the label set

struct HumanObservation {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::optional<std::string> name;
  Action action = Action::Unknown;
  std::map<std::string, std::string> attributes;
  std::int64_t frame_id = 0;
};

struct HumanEntity {
  std::string id;
  std::optional<std::string> name;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Action action = Action::Unknown;
  std::map<std::string, std::string> attributes;
  std::int64_t last_seen = 0;
};

class HumanLayer {
 public:
  static constexpr double kAssociationGate = 0.5;

  struct State {
    std::vector<HumanEntity> people;  // creation order
    int next_index = 0;
    std::optional<std::int64_t> last_frame;
  };

  HumanLayer() = default;
  explicit HumanLayer(State state) : state_(std::move(state)) {}

  // Updates the nearest person within the gate, else creates person_<k>.
  std::string upsert(const HumanObservation& obs);
  const HumanEntity& get(const std::string& id) const;
  const std::vector<HumanEntity>& people() const { return state_.people; }
  const State& state() const { return state_; }

 private:
  State state_;
};

inline constexpr double kFurnitureMentionRange = 1.0;

// Cross-layer sentence such as
// "Mr. Smith is sitting on the chair in the living room, wearing a T-shirt and waving his hand."
// Clauses without data are dropped.
std::string describe(const HumanEntity& human, const ZoneLayer& zones,
                     const FurnitureLayer& furniture);

}  // namespace dynmap
