#include <doctest.h>

#include <numbers>
#include <random>

#include "dynmap/errors.hpp"
#include "dynmap/furniture.hpp"
#include "dynmap/geometry.hpp"
#include "dynmap/layers_io.hpp"
#include "dynmap/text.hpp"
#include "oracles.hpp"
#include "suites.hpp"

using namespace dynmap;

namespace {

Detection3D det(const std::string& cls, double x, double y, double w, double d, double h, double yaw = 0.0,
                std::int64_t frame = 1) {
  Detection3D out;
  out.class_name = cls;
  out.center = Eigen::Vector3d(x, y, 0.5 * h);
  out.dims = Eigen::Vector3d(w, d, h);
  out.yaw = yaw;
  out.frame_id = frame;
  return out;
}

}  // namespace

TEST_CASE("footprint corners run counter-clockwise from local (+w/2, -d/2)") {
  const OrientedBox3 box{Eigen::Vector3d(1, 2, 0.5), Eigen::Vector3d(2, 1, 1), std::numbers::pi / 2};
  const auto c = footprint_corners(box);
  CHECK(c[0].x() == doctest::Approx(1.5));
  CHECK(c[0].y() == doctest::Approx(3.0));
  CHECK(polygon_area(c) == doctest::Approx(2.0));
  CHECK(footprint_contains(box, {1.0, 2.9}));
  CHECK_FALSE(footprint_contains(box, {1.6, 2.0}));
}

TEST_CASE("convex hull drops interior and collinear points") {
  const auto hull = convex_hull({{0, 0}, {1, 0}, {2, 0}, {2, 2}, {1, 1}, {0, 2}, {0, 1}});
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(4.0));
}

TEST_CASE("IoU of simple configurations") {
  const OrientedBox3 a{Eigen::Vector3d(0, 0, 0.5), Eigen::Vector3d(1, 1, 1), 0.0};
  CHECK(iou_3d(a, a) == doctest::Approx(1.0));
  OrientedBox3 b = a;
  b.center.x() = 0.5;
  CHECK(iou_3d(a, b) == doctest::Approx(1.0 / 3.0));
  b.center.x() = 1.0;
  CHECK(iou_3d(a, b) == 0.0);
  b = a;
  b.center.z() = 1.0;
  CHECK(iou_3d(a, b) == doctest::Approx(1.0 / 3.0));
  b = a;
  b.yaw = std::numbers::pi / 4;
  CHECK(iou_3d(a, b) == doctest::Approx(oracle::clipped_iou(a, b)).epsilon(1e-12));
}

TEST_CASE("IoU agrees with polygon clipping on random pairs") {
  const suites::Tally t = suites::iou_pairs(31, 1000);
  INFO(t.first_failure);
  CHECK(t.all());
}

TEST_CASE("templates scale componentwise") {
  const auto table = scale_template(table_template(), Eigen::Vector3d(1.2, 0.8, 0.72));
  REQUIRE(table.size() == 5);
  CHECK(table[0].box.max().z() == doctest::Approx(0.72));
  CHECK(table[0].box.min().z() == doctest::Approx(0.648));
  CHECK(table[0].box.max().x() == doctest::Approx(1.2));
  const TemplateLibrary lib;
  CHECK(lib.lookup("chair").primitives.size() == 6);
  CHECK(lib.lookup("sofa").primitives.size() == 1);
}

TEST_CASE("tracking issues ids per class and matches overlaps") {
  FurnitureLayer layer;
  const std::vector<Detection3D> f1{det("table", 0, 0, 1, 1, 0.7), det("chair", 3, 0, 0.5, 0.5, 0.9),
                                    det("table", 6, 0, 1, 1, 0.7)};
  const auto r1 = layer.track_frame(f1);
  CHECK(r1 == std::vector<TrackResult>{{"table_0", TrackStatus::New}, {"chair_0", TrackStatus::New},
                                       {"table_1", TrackStatus::New}});
  std::vector<Detection3D> f2{det("table", 6.1, 0, 1, 1, 0.7, 0.05, 2), det("table", 0.05, 0.05, 1, 1, 0.7, 0, 2)};
  const auto r2 = layer.track_frame(f2);
  CHECK(r2 == std::vector<TrackResult>{{"table_1", TrackStatus::Matched}, {"table_0", TrackStatus::Matched}});
  CHECK(layer.get("table_1").pose.x == doctest::Approx(6.1));
  CHECK(layer.get("table_1").last_seen == 2);
  CHECK(layer.get("chair_0").last_seen == 1);
}

TEST_CASE("a class mismatch never associates") {
  FurnitureLayer layer;
  layer.track_frame(std::vector{det("table", 0, 0, 1, 1, 1)});
  const auto r = layer.track_frame(std::vector{det("chair", 0, 0, 1, 1, 1, 0, 2)});
  CHECK(r[0] == TrackResult{"chair_0", TrackStatus::New});
  CHECK(layer.size() == 2);
}

TEST_CASE("stale frames are rejected") {
  FurnitureLayer layer;
  layer.track_frame(std::vector{det("table", 0, 0, 1, 1, 1, 0, 5)});
  CHECK_THROWS_AS(layer.track_frame(std::vector{det("table", 0, 0, 1, 1, 1, 0, 4)}), OrderingError);
  CHECK_THROWS_AS(layer.track_frame(std::vector{det("table", 0, 0, 1, 1, 1, 0, 5)}), OrderingError);
  CHECK_NOTHROW(layer.track_frame(std::vector{det("table", 0, 0, 1, 1, 1, 0, 6)}));
}

TEST_CASE("auto ids skip explicit registrations and removed ids") {
  FurnitureLayer layer;
  layer.register_instance("table_0", det("table", 0, 0, 1, 1, 1));
  CHECK_THROWS_AS(layer.register_instance("table_0", det("table", 5, 0, 1, 1, 1)), ParameterError);
  const auto r = layer.track_frame(std::vector{det("table", 10, 0, 1, 1, 1, 0, 2)});
  CHECK(r[0].id == "table_1");
  layer.remove("table_1");
  CHECK_THROWS_AS(layer.get("table_1"), NotFoundError);
  const auto r2 = layer.track_frame(std::vector{det("table", 20, 0, 1, 1, 1, 0, 3)});
  CHECK(r2[0].id == "table_2");
}

TEST_CASE("detections are validated") {
  CHECK_THROWS_AS(validate_detection(det("table", 0, 0, 0, 1, 1)), ParameterError);
  CHECK_THROWS_AS(validate_detection(det("", 0, 0, 1, 1, 1)), ParameterError);
  Detection3D bad = det("table", 0, 0, 1, 1, 1);
  bad.center.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_detection(bad), ParameterError);
}

TEST_CASE("drifting boxes keep their ids, teleports get new ones") {
  const suites::Tally drift = suites::tracking_drift(41, 100);
  INFO(drift.first_failure);
  CHECK(drift.all());
  const suites::Tally teleport = suites::tracking_teleport(42, 100);
  INFO(teleport.first_failure);
  CHECK(teleport.all());
}

TEST_CASE("virtual obstacles cover exactly the footprint cells") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const GridMap grid = oracle::random_grid(rng, 30, 24, 0.05, 0.03);
    FurnitureLayer layer;
    const Detection3D d = det("table", 0.2 + 1.1 * u(rng), 0.2 + 0.8 * u(rng), 0.2 + 0.6 * u(rng),
                              0.2 + 0.4 * u(rng), 0.7, (u(rng) - 0.5) * 6.0);
    layer.register_instance("t", d);
    const GridMap out = virtual_obstacles(layer, grid);
    const auto poly = oracle::box_polygon(d.box());
    for (int row = 0; row < 24; ++row) {
      for (int col = 0; col < 30; ++col) {
        const Eigen::Vector2d c((col + 0.5) * 0.05, (row + 0.5) * 0.05);
        const Cell expected = oracle::point_in_polygon(c, poly) ? Cell::Occupied : grid.at({col, row});
        REQUIRE(out.at({col, row}) == expected);
      }
    }
  }
}

TEST_CASE("collision world has one box per primitive") {
  FurnitureLayer layer;
  layer.track_frame(std::vector{det("table", 1, 1, 1.2, 0.8, 0.72), det("chair", 3, 1, 0.5, 0.5, 1.0)});
  const auto world = export_collision_world(layer);
  REQUIRE(world.size() == 11);
  CHECK(world[0].owner == "chair_0");
  const CollisionBox& top = world[6];
  CHECK(top.owner == "table_0");
  CHECK(top.part == "top");
  CHECK(top.box.center.z() == doctest::Approx(0.684));
  CHECK(top.box.dims.x() == doctest::Approx(1.2));
}

TEST_CASE("layer dumps round-trip byte for byte") {
  MapLayers layers;
  layers.furniture.track_frame(std::vector{det("table", 1, 1, 1.2, 0.8, 0.72, 0.3)});
  layers.furniture.set_role("table_0", "kitchen");
  layers.zones.add(Zone("kitchen", {0, 0}, {2, 3}));
  HumanObservation obs;
  obs.position = Eigen::Vector3d(1.5, 1.0, 0.0);
  obs.name = "Smith";
  obs.action = Action::Sitting;
  obs.attributes = {{"gender", "male"}};
  obs.frame_id = 3;
  layers.humans.upsert(obs);
  const std::string a = dump_layers(layers);
  const MapLayers back = load_layers(a);
  CHECK(dump_layers(back) == a);
  CHECK(back.furniture.get("table_0").role == "kitchen");
  CHECK(back.furniture.get("table_0").primitives.size() == 5);
  CHECK_THROWS_AS(load_layers("{}"), ParseError);
  CHECK_THROWS_AS(load_layers("not json"), ParseError);
}

TEST_CASE("the shipped detection log yields six tables and one kitchen") {
  FurnitureLayer layer;
  apply_detection_log(layer, parse_detection_log(text::read_file(suites::source_path("data/six_tables_detections.json"))));
  const auto all = layer.list();
  REQUIRE(all.size() == 6);
  int kitchens = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].id == "table_" + std::to_string(i));
    kitchens += all[i].role == "kitchen";
  }
  CHECK(kitchens == 1);
  CHECK(layer.get("table_0").role == "kitchen");
}
