#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dynmap/furniture.hpp"
#include "dynmap/semantic.hpp"

namespace dynmap {

// The three mapped layers above the static grid.
struct MapLayers {
  FurnitureLayer furniture;
  ZoneLayer zones;
  HumanLayer humans;
};

// Layer dump: one JSON document, one section per layer, keys sorted.
std::string dump_layers(const MapLayers& layers);
MapLayers load_layers(std::string_view document);

struct DetectionFrame {
  std::int64_t frame_id = 0;
  std::vector<Detection3D> detections;
};

// {"frames": [{"frame_id", "detections": [{"class", "center", "dims", "yaw"}]}],
//  "designations": {"<id>": "<role>"}}
struct DetectionLog {
  std::vector<DetectionFrame> frames;
  std::map<std::string, std::string> designations;
};

DetectionLog parse_detection_log(std::string_view document);

// Tracks every frame in order, then applies designations.
void apply_detection_log(FurnitureLayer& layer, const DetectionLog& log);

}  // namespace dynmap
