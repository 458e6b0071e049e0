#include "dynmap/furniture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynmap/errors.hpp"

namespace dynmap {

namespace {

Eigen::AlignedBox3d unit_box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return Eigen::AlignedBox3d(Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x1, y1, z1));
}

void add_legs(std::vector<Primitive>& prims, double top) {
  constexpr double leg = 0.1;
  prims.push_back({"leg_0", unit_box(0.0, 0.0, 0.0, leg, leg, top)});
  prims.push_back({"leg_1", unit_box(1.0 - leg, 0.0, 0.0, 1.0, leg, top)});
  prims.push_back({"leg_2", unit_box(1.0 - leg, 1.0 - leg, 0.0, 1.0, 1.0, top)});
  prims.push_back({"leg_3", unit_box(0.0, 1.0 - leg, 0.0, leg, 1.0, top)});
}

void validate_template(const FurnitureTemplate& t) {
  if (t.primitives.empty()) throw ParameterError("template '" + t.class_name + "' has no primitives");
  const Eigen::AlignedBox3d unit(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  for (const auto& p : t.primitives) {
    if (p.box.isEmpty() || !unit.contains(p.box)) {
      throw ParameterError("template '" + t.class_name + "' primitive '" + p.part +
                           "' leaves the unit cube");
    }
  }
}

}  // namespace

FurnitureTemplate table_template() {
  FurnitureTemplate t{"table", {}};
  t.primitives.push_back({"top", unit_box(0.0, 0.0, 0.9, 1.0, 1.0, 1.0)});
  add_legs(t.primitives, 0.9);
  return t;
}

FurnitureTemplate chair_template() {
  FurnitureTemplate t{"chair", {}};
  t.primitives.push_back({"seat", unit_box(0.0, 0.0, 0.45, 1.0, 1.0, 0.55)});
  add_legs(t.primitives, 0.45);
  t.primitives.push_back({"back", unit_box(0.0, 0.9, 0.55, 1.0, 1.0, 1.0)});
  return t;
}

FurnitureTemplate block_template(const std::string& class_name) {
  return {class_name, {{"body", unit_box(0.0, 0.0, 0.0, 1.0, 1.0, 1.0)}}};
}

TemplateLibrary::TemplateLibrary() {
  add(table_template());
  add(chair_template());
}

void TemplateLibrary::add(FurnitureTemplate t) {
  validate_template(t);
  std::string key = t.class_name;
  templates_[key] = std::move(t);
}

FurnitureTemplate TemplateLibrary::lookup(const std::string& class_name) const {
  if (auto it = templates_.find(class_name); it != templates_.end()) return it->second;
  return block_template(class_name);
}

std::vector<Primitive> scale_template(const FurnitureTemplate& t, const Eigen::Vector3d& dims) {
  if (!(dims.array() > 0.0).all() || !dims.allFinite()) {
    throw ParameterError("furniture dims must be strictly positive");
  }
  std::vector<Primitive> out;
  out.reserve(t.primitives.size());
  for (const auto& p : t.primitives) {
    out.push_back({p.part, Eigen::AlignedBox3d(p.box.min().cwiseProduct(dims),
                                               p.box.max().cwiseProduct(dims))});
  }
  return out;
}

OrientedBox3 FurnitureInstance::box() const {
  return {Eigen::Vector3d(pose.x, pose.y, base_z + 0.5 * dims.z()), dims, pose.theta};
}

void validate_detection(const Detection3D& d) {
  if (d.class_name.empty()) throw ParameterError("detection has no class name");
  if (!(d.dims.array() > 0.0).all() || !d.dims.allFinite()) {
    throw ParameterError("detection dims must be strictly positive");
  }
  if (!d.center.allFinite() || !std::isfinite(d.yaw)) {
    throw ParameterError("detection pose must be finite");
  }
  if (d.frame_id < 0) throw ParameterError("frame id must be non-negative");
}

FurnitureLayer::FurnitureLayer(TemplateLibrary templates, double iou_threshold)
    : templates_(std::move(templates)), iou_threshold_(iou_threshold) {}

FurnitureLayer::FurnitureLayer(State state, TemplateLibrary templates, double iou_threshold)
    : templates_(std::move(templates)), iou_threshold_(iou_threshold), state_(std::move(state)) {
  for (const auto& [id, inst] : state_.instances) state_.issued_ids.insert(id);
}

FurnitureInstance FurnitureLayer::make_instance(const std::string& id,
                                                const Detection3D& d) const {
  FurnitureInstance inst;
  inst.id = id;
  inst.class_name = d.class_name;
  inst.pose = Pose2D(d.center.x(), d.center.y(), d.yaw);
  inst.base_z = d.center.z() - 0.5 * d.dims.z();
  inst.dims = d.dims;
  inst.primitives = scale_template(templates_.lookup(d.class_name), d.dims);
  inst.last_seen = d.frame_id;
  return inst;
}

std::string FurnitureLayer::next_auto_id(const std::string& class_name) {
  int& k = state_.class_counters[class_name];
  std::string id;
  do {
    id = class_name + "_" + std::to_string(k++);
  } while (state_.issued_ids.contains(id));
  return id;
}

std::vector<TrackResult> FurnitureLayer::track_frame(std::span<const Detection3D> detections) {
  if (detections.empty()) return {};
  const std::int64_t frame = detections.front().frame_id;
  for (const auto& d : detections) {
    validate_detection(d);
    if (d.frame_id != frame) throw ParameterError("detections in one frame must share frame_id");
  }
  if (state_.last_frame && frame <= *state_.last_frame) {
    throw OrderingError("frame " + std::to_string(frame) + " is not after frame " +
                        std::to_string(*state_.last_frame));
  }

  struct Candidate {
    double iou;
    std::size_t detection;
    const std::string* instance;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const OrientedBox3 det_box = detections[i].box();
    for (const auto& [id, inst] : state_.instances) {
      if (inst.class_name != detections[i].class_name) continue;
      const double iou = iou_3d(det_box, inst.box());
      if (iou >= iou_threshold_) candidates.push_back({iou, i, &id});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });

  std::vector<std::optional<std::string>> assigned(detections.size());
  std::set<std::string> taken;
  for (const auto& c : candidates) {
    if (assigned[c.detection] || taken.contains(*c.instance)) continue;
    assigned[c.detection] = *c.instance;
    taken.insert(*c.instance);
  }

  std::vector<TrackResult> results;
  results.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection3D& d = detections[i];
    if (assigned[i]) {
      FurnitureInstance& inst = state_.instances.at(*assigned[i]);
      FurnitureInstance updated = make_instance(inst.id, d);
      updated.role = inst.role;
      inst = std::move(updated);
      results.push_back({inst.id, TrackStatus::Matched});
    } else {
      const std::string id = next_auto_id(d.class_name);
      state_.issued_ids.insert(id);
      state_.instances.emplace(id, make_instance(id, d));
      results.push_back({id, TrackStatus::New});
    }
  }
  state_.last_frame = frame;
  return results;
}

const FurnitureInstance& FurnitureLayer::register_instance(const std::string& id,
                                                           const Detection3D& detection) {
  validate_detection(detection);
  if (id.empty()) throw ParameterError("furniture id must not be empty");
  if (state_.issued_ids.contains(id)) throw ParameterError("furniture id '" + id + "' already issued");
  state_.issued_ids.insert(id);
  return state_.instances.emplace(id, make_instance(id, detection)).first->second;
}

void FurnitureLayer::remove(const std::string& id) {
  if (state_.instances.erase(id) == 0) throw NotFoundError("no furniture '" + id + "'");
}

void FurnitureLayer::set_role(const std::string& id, const std::string& role) {
  auto it = state_.instances.find(id);
  if (it == state_.instances.end()) throw NotFoundError("no furniture '" + id + "'");
  it->second.role = role;
}

const FurnitureInstance& FurnitureLayer::get(const std::string& id) const {
  const auto* inst = find(id);
  if (!inst) throw NotFoundError("no furniture '" + id + "'");
  return *inst;
}

const FurnitureInstance* FurnitureLayer::find(const std::string& id) const {
  auto it = state_.instances.find(id);
  return it == state_.instances.end() ? nullptr : &it->second;
}

std::vector<FurnitureInstance> FurnitureLayer::list() const {
  std::vector<FurnitureInstance> out;
  out.reserve(state_.instances.size());
  for (const auto& [id, inst] : state_.instances) out.push_back(inst);
  return out;
}

const FurnitureInstance* FurnitureLayer::find_role(const std::string& role) const {
  for (const auto& [id, inst] : state_.instances) {
    if (inst.role == role) return &inst;
  }
  return nullptr;
}

GridMap virtual_obstacles(const FurnitureLayer& layer, const GridMap& map) {
  GridMap out = map;
  const GridGeometry& g = map.geometry();
  for (const auto& [id, inst] : layer.state().instances) {
    const OrientedBox3 box = inst.box();
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (const auto& corner : footprint_corners(box)) {
      lo = lo.cwiseMin(corner);
      hi = hi.cwiseMax(corner);
    }
    const Eigen::Vector2d cmin = ((lo - g.origin) / g.resolution).array().floor();
    const Eigen::Vector2d cmax = ((hi - g.origin) / g.resolution).array().floor();
    const int col0 = std::max(0, static_cast<int>(cmin.x()));
    const int row0 = std::max(0, static_cast<int>(cmin.y()));
    const int col1 = std::min(g.width - 1, static_cast<int>(cmax.x()));
    const int row1 = std::min(g.height - 1, static_cast<int>(cmax.y()));
    for (int row = row0; row <= row1; ++row) {
      for (int col = col0; col <= col1; ++col) {
        if (footprint_contains(box, cell_to_world(g, {col, row}))) out.set({col, row}, Cell::Occupied);
      }
    }
  }
  return out;
}

std::vector<CollisionBox> export_collision_world(const FurnitureLayer& layer) {
  std::vector<CollisionBox> out;
  for (const auto& [id, inst] : layer.state().instances) {
    const Eigen::Matrix2d rot = rotation2d(inst.pose.theta);
    const Eigen::Vector2d half_plan(0.5 * inst.dims.x(), 0.5 * inst.dims.y());
    for (const auto& p : inst.primitives) {
      const Eigen::Vector3d local_center = p.box.center();
      const Eigen::Vector2d plan = inst.pose.position() + rot * (local_center.head<2>() - half_plan);
      OrientedBox3 box{Eigen::Vector3d(plan.x(), plan.y(), inst.base_z + local_center.z()),
                       p.box.sizes(), inst.pose.theta};
      out.push_back({id, p.part, box});
    }
  }
  return out;
}

}  // namespace dynmap
