#pragma once

#include <Eigen/Geometry>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dynmap/geometry.hpp"
#include "dynmap/grid.hpp"

namespace dynmap {

struct Detection3D {
  std::string class_name;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  double yaw = 0.0;
  std::int64_t frame_id = 0;

  OrientedBox3 box() const { return {center, dims, yaw}; }
};

struct Primitive {
  std::string part;
  Eigen::AlignedBox3d box;
};

// Furniture shape in the unit cube [0,1]^3; instances stretch it to their dims.
struct FurnitureTemplate {
  std::string class_name;
  std::vector<Primitive> primitives;
};

FurnitureTemplate table_template();
FurnitureTemplate chair_template();
// Single solid unit box, used for classes without a dedicated template.
FurnitureTemplate block_template(const std::string& class_name);

class TemplateLibrary {
 public:
  TemplateLibrary();  // table and chair
  void add(FurnitureTemplate t);
  FurnitureTemplate lookup(const std::string& class_name) const;

 private:
  std::map<std::string, FurnitureTemplate> templates_;
};

// Componentwise scaling of every unit-space primitive by (w, d, h).
std::vector<Primitive> scale_template(const FurnitureTemplate& t, const Eigen::Vector3d& dims);

struct FurnitureInstance {
  std::string id;
  std::string class_name;
  Pose2D pose;
  double base_z = 0.0;
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  // Scaled primitives in the instance frame: x in [0,w], y in [0,d], z in [0,h].
  std::vector<Primitive> primitives;
  std::int64_t last_seen = 0;
  std::string role;  // e.g. "kitchen"; empty when undesignated

  OrientedBox3 box() const;
};

enum class TrackStatus { Matched, New };

struct TrackResult {
  std::string id;
  TrackStatus status;

  friend bool operator==(const TrackResult&, const TrackResult&) = default;
};

struct CollisionBox {
  std::string owner;
  std::string part;
  OrientedBox3 box;
};

// Semi-dynamic map layer: ID'd furniture instances tracked across frames by
// 3D box overlap. Instances persist until removed explicitly.
class FurnitureLayer {
 public:
  struct State {
    std::map<std::string, FurnitureInstance> instances;
    std::map<std::string, int> class_counters;
    std::set<std::string> issued_ids;
    std::optional<std::int64_t> last_frame;
  };

  static constexpr double kDefaultIouThreshold = 0.1;

  explicit FurnitureLayer(TemplateLibrary templates = {},
                          double iou_threshold = kDefaultIouThreshold);
  FurnitureLayer(State state, TemplateLibrary templates = {},
                 double iou_threshold = kDefaultIouThreshold);

  // Associates one frame of detections with existing instances (greedy by
  // descending IoU, same class, IoU >= threshold); the rest become new
  // instances named <class>_<k>. Results follow detection order.
  std::vector<TrackResult> track_frame(std::span<const Detection3D> detections);

  const FurnitureInstance& register_instance(const std::string& id, const Detection3D& detection);
  void remove(const std::string& id);
  void set_role(const std::string& id, const std::string& role);

  const FurnitureInstance& get(const std::string& id) const;
  const FurnitureInstance* find(const std::string& id) const;
  std::vector<FurnitureInstance> list() const;
  std::size_t size() const { return state_.instances.size(); }
  // First instance carrying `role`, by id order.
  const FurnitureInstance* find_role(const std::string& role) const;

  const State& state() const { return state_; }
  double iou_threshold() const { return iou_threshold_; }

 private:
  FurnitureInstance make_instance(const std::string& id, const Detection3D& d) const;
  std::string next_auto_id(const std::string& class_name);

  TemplateLibrary templates_;
  double iou_threshold_;
  State state_;
};

// Copy of `map` with every cell whose centre lies in a furniture footprint OCCUPIED.
GridMap virtual_obstacles(const FurnitureLayer& layer, const GridMap& map);

// One world-placed box per scaled primitive, instances in id order.
std::vector<CollisionBox> export_collision_world(const FurnitureLayer& layer);

void validate_detection(const Detection3D& d);

}  // namespace dynmap
