#include "dynmap/semantic.hpp"

#include <cctype>
#include <limits>

#include "dynmap/errors.hpp"
#include "dynmap/text.hpp"

namespace dynmap {

Zone::Zone(std::string name, const Eigen::Vector2d& p1, const Eigen::Vector2d& p2)
    : name_(std::move(name)), min_(p1.cwiseMin(p2)), max_(p1.cwiseMax(p2)) {
  if (name_.empty()) throw ParameterError("zone name must not be empty");
  if (!p1.allFinite() || !p2.allFinite()) throw ParameterError("zone corners must be finite");
  if (!(max_.x() > min_.x() && max_.y() > min_.y())) {
    throw ParameterError("zone '" + name_ + "' has zero area");
  }
}

bool Zone::contains(const Eigen::Vector2d& p) const {
  return p.x() >= min_.x() && p.x() <= max_.x() && p.y() >= min_.y() && p.y() <= max_.y();
}

void ZoneLayer::add(Zone zone) {
  for (const auto& z : zones_) {
    if (z.name() == zone.name()) throw ParameterError("duplicate zone '" + zone.name() + "'");
  }
  zones_.push_back(std::move(zone));
}

std::optional<std::string> ZoneLayer::zone_at(const Eigen::Vector2d& p) const {
  for (const auto& z : zones_) {
    if (z.contains(p)) return z.name();
  }
  return std::nullopt;
}

const Zone& ZoneLayer::get(const std::string& name) const {
  for (const auto& z : zones_) {
    if (z.name() == name) return z;
  }
  throw NotFoundError("no zone '" + name + "'");
}

std::string to_string(Action a) {
  switch (a) {
    case Action::Sitting:
      return "sitting";
    case Action::Standing:
      return "standing";
    case Action::Walking:
      return "walking";
    case Action::Waving:
      return "waving";
    case Action::Unknown:
      return "unknown";
  }
  return "unknown";
}

Action parse_action(const std::string& label) {
  for (Action a : {Action::Sitting, Action::Standing, Action::Walking, Action::Waving,
                   Action::Unknown}) {
    if (to_string(a) == label) return a;
  }
  throw ParameterError("unknown action label '" + label + "'");
}

std::string HumanLayer::upsert(const HumanObservation& obs) {
  if (!obs.position.allFinite()) throw ParameterError("observation position must be finite");
  if (state_.last_frame && obs.frame_id < *state_.last_frame) {
    throw OrderingError("observation frame " + std::to_string(obs.frame_id) +
                        " precedes layer frame " + std::to_string(*state_.last_frame));
  }
  state_.last_frame = obs.frame_id;

  HumanEntity* nearest = nullptr;
  double best = kAssociationGate;
  for (auto& person : state_.people) {
    const double dist = (person.position - obs.position).norm();
    if (dist <= best) {
      if (nearest && dist == best) continue;
      best = dist;
      nearest = &person;
    }
  }
  if (!nearest) {
    state_.people.push_back({});
    nearest = &state_.people.back();
    nearest->id = "person_" + std::to_string(state_.next_index++);
  }
  nearest->position = obs.position;
  nearest->action = obs.action;
  nearest->last_seen = obs.frame_id;
  if (obs.name) nearest->name = obs.name;
  for (const auto& [k, v] : obs.attributes) nearest->attributes[k] = v;
  return nearest->id;
}

const HumanEntity& HumanLayer::get(const std::string& id) const {
  for (const auto& p : state_.people) {
    if (p.id == id) return p;
  }
  throw NotFoundError("no person '" + id + "'");
}

namespace {

std::string attribute(const HumanEntity& h, const std::string& key) {
  auto it = h.attributes.find(key);
  return it == h.attributes.end() ? std::string() : text::trim(it->second);
}

std::string subject(const HumanEntity& h) {
  if (!h.name || text::trim(*h.name).empty()) return h.id;
  const std::string name = text::trim(*h.name);
  const std::string gender = text::to_lower(attribute(h, "gender"));
  const bool titled = name.rfind("Mr.", 0) == 0 || name.rfind("Ms.", 0) == 0;
  if (!titled && gender == "male") return "Mr. " + name;
  if (!titled && gender == "female") return "Ms. " + name;
  return name;
}

std::string possessive(const HumanEntity& h) {
  const std::string gender = text::to_lower(attribute(h, "gender"));
  if (gender == "male") return "his";
  if (gender == "female") return "her";
  return "their";
}

std::string with_article(const std::string& noun) {
  const std::string lower = text::to_lower(noun);
  if (lower.rfind("a ", 0) == 0 || lower.rfind("an ", 0) == 0 || lower.rfind("the ", 0) == 0) {
    return noun;
  }
  if (!lower.empty() && lower.back() == 's') return noun;
  const bool vowel = !lower.empty() && std::string("aeiou").find(lower.front()) != std::string::npos;
  return (vowel ? "an " : "a ") + noun;
}

const FurnitureInstance* nearest_furniture(const Eigen::Vector2d& p, const FurnitureLayer& layer) {
  const FurnitureInstance* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [id, inst] : layer.state().instances) {
    const OrientedBox3 box = inst.box();
    double dist = 0.0;
    if (!footprint_contains(box, p, 0.0)) {
      const auto corners = footprint_corners(box);
      dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < corners.size(); ++i) {
        dist = std::min(dist, point_segment_distance(p, corners[i], corners[(i + 1) % 4]));
      }
    }
    if (dist <= kFurnitureMentionRange && dist < best_dist) {
      best_dist = dist;
      best = &inst;
    }
  }
  return best;
}

}  // namespace

std::string describe(const HumanEntity& human, const ZoneLayer& zones,
                     const FurnitureLayer& furniture) {
  const Eigen::Vector2d plan = human.position.head<2>();
  const FurnitureInstance* near = nearest_furniture(plan, furniture);
  const auto zone = zones.zone_at(plan);

  std::string s = subject(human) + " is";
  const bool acting = human.action != Action::Unknown;
  if (acting) s += " " + to_string(human.action);
  if (near) {
    const std::string& cls = near->class_name;
    const bool seat = cls == "chair" || cls == "sofa" || cls == "bench" || cls == "stool";
    const char* prep = human.action != Action::Sitting ? " by the " : seat ? " on the " : " at the ";
    s += prep + cls;
  }
  if (zone) s += " in the " + *zone;
  if (!acting && !near && !zone) s += " present";

  const std::string clothing = attribute(human, "clothing");
  std::string gesture = text::to_lower(attribute(human, "gesture"));
  if (gesture == "waving") {
    gesture = human.action == Action::Waving ? std::string() : "waving " + possessive(human) + " hand";
  }
  if (!clothing.empty()) s += ", wearing " + with_article(clothing);
  if (!gesture.empty()) s += (clothing.empty() ? ", " : " and ") + gesture;
  s += ".";
  return s;
}

}  // namespace dynmap
