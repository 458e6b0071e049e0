#include "dynmap/layers_io.hpp"

#include "json_util.hpp"

namespace dynmap {

namespace detail {

Detection3D detection_from_json(const json& j, std::int64_t frame_id) {
  Detection3D d;
  d.class_name = j.at("class").get<std::string>();
  d.center = vec_from_json<3>(j.at("center"), "center");
  d.dims = vec_from_json<3>(j.at("dims"), "dims");
  d.yaw = normalize_angle(j.value("yaw", 0.0));
  d.frame_id = frame_id;
  validate_detection(d);
  return d;
}

HumanObservation human_obs_from_json(const json& j) {
  HumanObservation obs;
  obs.position = vec_from_json<3>(j.at("position"), "position");
  if (j.contains("name") && !j["name"].is_null()) obs.name = j["name"].get<std::string>();
  obs.action = parse_action(j.value("action", std::string("unknown")));
  if (j.contains("attributes")) {
    obs.attributes = j["attributes"].get<std::map<std::string, std::string>>();
  }
  obs.frame_id = j.value("frame_id", std::int64_t{0});
  return obs;
}

}  // namespace detail

using detail::json;

namespace {

json furniture_to_json(const FurnitureLayer& layer) {
  const auto& s = layer.state();
  json instances = json::array();
  for (const auto& [id, inst] : s.instances) {
    instances.push_back({{"id", inst.id},
                         {"class", inst.class_name},
                         {"pose", {{"x", inst.pose.x}, {"y", inst.pose.y}, {"theta", inst.pose.theta}}},
                         {"base_z", inst.base_z},
                         {"dims", detail::vec_to_json(inst.dims)},
                         {"last_seen", inst.last_seen},
                         {"role", inst.role}});
  }
  return {{"instances", instances},
          {"counters", s.class_counters},
          {"issued", s.issued_ids},
          {"last_frame", s.last_frame ? json(*s.last_frame) : json(nullptr)}};
}

FurnitureLayer furniture_from_json(const json& j) {
  FurnitureLayer::State s;
  const TemplateLibrary templates;
  for (const auto& ji : j.at("instances")) {
    FurnitureInstance inst;
    inst.id = ji.at("id").get<std::string>();
    inst.class_name = ji.at("class").get<std::string>();
    const auto& pose = ji.at("pose");
    inst.pose = Pose2D(pose.at("x").get<double>(), pose.at("y").get<double>(),
                       pose.at("theta").get<double>());
    inst.base_z = ji.at("base_z").get<double>();
    inst.dims = detail::vec_from_json<3>(ji.at("dims"), "dims");
    inst.primitives = scale_template(templates.lookup(inst.class_name), inst.dims);
    inst.last_seen = ji.at("last_seen").get<std::int64_t>();
    inst.role = ji.value("role", std::string());
    if (s.instances.contains(inst.id)) throw ParseError("duplicate furniture id '" + inst.id + "'");
    s.instances.emplace(inst.id, std::move(inst));
  }
  s.class_counters = j.at("counters").get<std::map<std::string, int>>();
  s.issued_ids = j.at("issued").get<std::set<std::string>>();
  if (!j.at("last_frame").is_null()) s.last_frame = j["last_frame"].get<std::int64_t>();
  return FurnitureLayer(std::move(s));
}

json humans_to_json(const HumanLayer& layer) {
  const auto& s = layer.state();
  json people = json::array();
  for (const auto& p : s.people) {
    people.push_back({{"id", p.id},
                      {"name", p.name ? json(*p.name) : json(nullptr)},
                      {"position", detail::vec_to_json(p.position)},
                      {"action", to_string(p.action)},
                      {"attributes", p.attributes},
                      {"last_seen", p.last_seen}});
  }
  return {{"people", people},
          {"next_index", s.next_index},
          {"last_frame", s.last_frame ? json(*s.last_frame) : json(nullptr)}};
}

HumanLayer humans_from_json(const json& j) {
  HumanLayer::State s;
  for (const auto& jp : j.at("people")) {
    HumanEntity p;
    p.id = jp.at("id").get<std::string>();
    if (!jp.at("name").is_null()) p.name = jp["name"].get<std::string>();
    p.position = detail::vec_from_json<3>(jp.at("position"), "position");
    p.action = parse_action(jp.at("action").get<std::string>());
    p.attributes = jp.at("attributes").get<std::map<std::string, std::string>>();
    p.last_seen = jp.at("last_seen").get<std::int64_t>();
    s.people.push_back(std::move(p));
  }
  s.next_index = j.at("next_index").get<int>();
  if (!j.at("last_frame").is_null()) s.last_frame = j["last_frame"].get<std::int64_t>();
  return HumanLayer(std::move(s));
}

}  // namespace

std::string dump_layers(const MapLayers& layers) {
  json zones = json::array();
  for (const auto& z : layers.zones.zones()) {
    zones.push_back({{"name", z.name()},
                     {"min", detail::vec_to_json(z.min())},
                     {"max", detail::vec_to_json(z.max())}});
  }
  json doc = {{"format", "dynmap-layers v1"},
              {"furniture", furniture_to_json(layers.furniture)},
              {"zones", zones},
              {"humans", humans_to_json(layers.humans)}};
  return doc.dump(2) + "\n";
}

MapLayers load_layers(std::string_view document) {
  try {
    const json doc = json::parse(document);
    if (doc.at("format").get<std::string>() != "dynmap-layers v1") {
      throw ParseError("unsupported layer dump format");
    }
    MapLayers layers{furniture_from_json(doc.at("furniture")), {}, humans_from_json(doc.at("humans"))};
    for (const auto& jz : doc.at("zones")) {
      layers.zones.add(Zone(jz.at("name").get<std::string>(), detail::vec_from_json<2>(jz.at("min"), "min"),
                            detail::vec_from_json<2>(jz.at("max"), "max")));
    }
    return layers;
  } catch (const json::exception& e) {
    throw ParseError(std::string("layer dump: ") + e.what());
  }
}

DetectionLog parse_detection_log(std::string_view document) {
  try {
    const json doc = json::parse(document);
    DetectionLog log;
    for (const auto& jf : doc.at("frames")) {
      DetectionFrame frame;
      frame.frame_id = jf.at("frame_id").get<std::int64_t>();
      for (const auto& jd : jf.at("detections")) {
        frame.detections.push_back(detail::detection_from_json(jd, frame.frame_id));
      }
      log.frames.push_back(std::move(frame));
    }
    if (doc.contains("designations")) {
      log.designations = doc["designations"].get<std::map<std::string, std::string>>();
    }
    return log;
  } catch (const json::exception& e) {
    throw ParseError(std::string("detection log: ") + e.what());
  }
}

void apply_detection_log(FurnitureLayer& layer, const DetectionLog& log) {
  for (const auto& frame : log.frames) layer.track_frame(frame.detections);
  for (const auto& [id, role] : log.designations) layer.set_role(id, role);
}

}  // namespace dynmap
