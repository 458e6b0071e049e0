#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "dynmap/sim.hpp"
#include "dynmap/text.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using dynmap::cli::dispatch;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome call(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  Outcome r;
  r.code = dispatch(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return suites::source_path("data/" + name); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dynmap_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void check_golden(const std::string& name, const std::string& actual) {
  std::string detail;
  CHECK_MESSAGE(suites::matches_golden(name, actual, &detail), detail);
}

std::string build_layers(const TempDir& tmp) {
  const std::string out = tmp.file("layers.json");
  const Outcome r = call({"map", "build", "--grid", data("restaurant.grid"), "--detections",
                          data("six_tables_detections.json"), "--out", out});
  REQUIRE(r.code == 0);
  return out;
}

}  // namespace

TEST_CASE("map build lists the tracked furniture and writes the dump") {
  const TempDir tmp;
  const std::string out = tmp.file("layers.json");
  const Outcome r = call({"map", "build", "--grid", data("restaurant.grid"), "--detections",
                          data("six_tables_detections.json"), "--out", out});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  check_golden("cli_map_build.txt", r.out);
  check_golden("cli_layers.json", dynmap::text::read_file(out));
}

TEST_CASE("map dump prints a saved dump") {
  const TempDir tmp;
  const Outcome r = call({"map", "dump", "--layers", build_layers(tmp)});
  CHECK(r.code == 0);
  check_golden("cli_map_dump.txt", r.out);
}

TEST_CASE("nav-goal reports the chosen cell and pose") {
  const TempDir tmp;
  const Outcome r = call({"nav-goal", "--map", data("restaurant.grid"), "--layers", build_layers(tmp),
                          "--furniture", "table_1", "--robot", "5.0,4.25,0"});
  CHECK(r.code == 0);
  check_golden("cli_nav_goal.txt", r.out);
  const Outcome missing = call({"nav-goal", "--map", data("restaurant.grid"), "--layers", build_layers(tmp),
                                "--furniture", "table_9", "--robot", "5.0,4.25,0"});
  CHECK(missing.code == 1);
  CHECK(missing.err == "error: no furniture 'table_9'\n");
  const Outcome bad_pose = call({"nav-goal", "--map", data("restaurant.grid"), "--layers", build_layers(tmp),
                                 "--furniture", "table_1", "--robot", "5.0,4.25"});
  CHECK(bad_pose.code == 2);
}

TEST_CASE("place fits the tabletop and reports a spot") {
  const Outcome r = call({"place", "--cloud", data("tabletop.xyz"), "--radius", "0.04", "--seed", "3"});
  CHECK(r.code == 0);
  check_golden("cli_place.txt", r.out);
  const Outcome crowded = call({"place", "--cloud", data("tabletop.xyz"), "--radius", "0.5"});
  CHECK(crowded.code == 1);
}

TEST_CASE("run replays the scenario") {
  const TempDir tmp;
  const std::string metrics = tmp.file("metrics.json");
  const Outcome r = call({"run", "--scenario", data("restaurant_41.json"), "--log", "-", "--metrics-out", metrics});
  CHECK(r.code == 0);
  check_golden("cli_run.txt", r.out);
  CHECK(dynmap::metrics_from_json(dynmap::text::read_file(metrics)) == dynmap::Metrics{41, 37, 4, 7, 0});
  const Outcome quiet = call({"run", "--scenario", data("restaurant_41.json"), "--mode", "sequential"});
  CHECK(quiet.out == "orders_total: 41\nserved_correct: 37\nserved_incorrect: 4\nassisted: 7\ncollisions: 0\n"
                     "accuracy: 37/41 (0.9024)\n");
}

TEST_CASE("repl serves typed utterances") {
  const Outcome r = call({"repl", "--scenario", data("restaurant_41.json"), "--table", "table_2"},
                         "what do you have?\n\n   \nI'd like a green tea please\nbring me a cola\n:quit\nignored\n");
  CHECK(r.code == 0);
  check_golden("cli_repl.txt", r.out);
  const Outcome eof = call({"repl", "--scenario", data("restaurant_41.json")}, "");
  CHECK(eof.out == "serving table_1; type :quit to leave\n> \n");
  CHECK(call({"repl", "--scenario", data("restaurant_41.json"), "--table", "bar"}).code == 2);
}

TEST_CASE("metrics diff compares field by field") {
  const TempDir tmp;
  const std::string a = tmp.file("a.json"), b = tmp.file("b.json");
  dynmap::text::write_file(a, dynmap::metrics_to_json({41, 37, 4, 7, 0}));
  dynmap::text::write_file(b, dynmap::metrics_to_json({41, 38, 3, 7, 0}));
  const Outcome same = call({"metrics", "diff", a, a});
  CHECK(same.code == 0);
  CHECK(same.out.substr(same.out.size() - 18) == "metrics identical\n");
  const Outcome differ = call({"metrics", "diff", a, b});
  CHECK(differ.code == 1);
  check_golden("cli_metrics_diff.txt", differ.out);
}

TEST_CASE("usage errors exit with 2") {
  const TempDir tmp;
  const Outcome unknown = call({"run", "--scenario", data("restaurant_41.json"), "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.rfind("error: ", 0) == 0);
  CHECK(call({"run"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"run", "--scenario", tmp.file("missing.json")}).code == 2);
  CHECK(call({"run", "--scenario", data("restaurant_41.json"), "--mode", "batch"}).code == 2);
  CHECK(call({"run", "--scenario", data("restaurant_41.json"), "--backend", "remote"}).code == 2);
  dynmap::text::write_file(tmp.file("bad.xyz"), "1 2\n");
  const Outcome bad_cloud = call({"place", "--cloud", tmp.file("bad.xyz"), "--radius", "0.04"});
  CHECK(bad_cloud.code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("configuration files supply the seed") {
  const TempDir tmp;
  dynmap::text::write_file(tmp.file("cfg.json"), R"({"backend": {"mode": "rules"}, "seed": 11})");
  const Outcome r = call({"run", "--scenario", data("restaurant_41.json"), "--config", tmp.file("cfg.json"),
                          "--log", "-"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("scenario restaurant_41 mode=parallel seed=11\n", 0) == 0);
  dynmap::text::write_file(tmp.file("stub.json"), R"({"backend": {"mode": "stub"}})");
  CHECK(call({"run", "--scenario", data("restaurant_41.json"), "--config", tmp.file("stub.json")}).code == 2);
  dynmap::text::write_file(tmp.file("broken.json"), "{");
  CHECK(call({"run", "--scenario", data("restaurant_41.json"), "--config", tmp.file("broken.json")}).code == 2);
}
