#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gwalk/config.hpp"

using namespace gwalk;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(GWALK_SOURCE_DIR) / "configs";

RunConfig parse(const char* text) { return RunConfig::from_json(Json::parse(text)); }

}  // namespace

TEST_CASE("shipped configs round trip") {
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    CAPTURE(entry.path().string());
    RunConfig c = RunConfig::load(entry.path());
    Json once = c.to_json();
    RunConfig back = RunConfig::from_json(once, c.base_dir);
    CHECK(back.to_json() == once);
    CHECK(back.group.build().name() == c.group.build().name());
  }
  CHECK(seen >= 8);
}

TEST_CASE("validation rejects bad values before computing") {
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "torus"}})"), UsageError);
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "free"}, "build_nonfree": {"S": ["a"], "theta": 0,
                            "upsilon": {"entries": [0, 1]}, "base": {"dirac": "e"}}})"),
                  UsageError);
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "free"}, "check_nf": {"measure": {"ref": "missing"}, "S": ["a"]}})"),
                  UsageError);
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "free"}, "surprise": 1})"), UsageError);
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "integers"}, "decompose": {"upsilon": {"entries": [1]}, "mode": "guess"}})"),
                  UsageError);
  CHECK_THROWS_AS(parse(R"({"group": {"kind": "free"}, "build_hk": {"delta": 1.5}})"), UsageError);
}

TEST_CASE("measure specs") {
  RunConfig c = parse(R"({"group": {"kind": "free", "rank": 2},
                          "measures": {"lazy": {"lazy_uniform_generators": 0.5}}})");
  Group g = c.group.build();
  SparseMeasure lazy = c.measure(g, Json::parse(R"({"ref": "lazy"})"));
  CHECK(lazy.weight(g.identity()) == 0.5);
  CHECK(lazy.weight(g.parse("B")) == 0.125);
  CHECK(c.measure(g, Json::parse(R"({"uniform_ball": 1})")).size() == 5);
  CHECK(c.measure(g, Json::parse(R"({"dirac": "ab"})")).weight(g.parse("ab")) == 1.0);
  SparseMeasure at = c.measure(g, Json::parse(R"({"atoms": [["a", 0.25], ["A", 0.75]]})"));
  CHECK(at.weight(g.parse("A")) == 0.75);
  CHECK_THROWS_AS(c.measure(g, Json::parse(R"({"atoms": [["q", 1.0]]})")), UsageError);
  CHECK_THROWS_AS(c.measure(g, Json::parse(R"({"nonsense": 1})")), UsageError);
  CHECK_THROWS_AS(c.measure(g, Json::parse(R"({"recipe": "build_hk"})")), UsageError);
}

TEST_CASE("measure files resolve against the config directory") {
  fs::path dir = fs::temp_directory_path() / "gwalk_config_test";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "nu.txt") << "e 0.5\nz 0.5\n";
    std::ofstream(dir / "run.json") << R"({"group": {"kind": "cyclic", "modulus": 2},
                                          "simulate": {"measure": {"file": "nu.txt"}}})";
  }
  RunConfig c = RunConfig::load(dir / "run.json");
  Group g = c.group.build();
  CHECK(c.measure(g, c.simulate->measure).weight(g.parse("z")) == 0.5);
  fs::remove_all(dir);
}

TEST_CASE("element specs") {
  RunConfig c = parse(R"({"group": {"kind": "free", "rank": 2}})");
  Group g = c.group.build();
  auto avg = c.element(g, Json::parse(R"({"generator_average": true})"));
  CHECK(avg.size() == 4);
  auto conj = c.element(g, Json::parse(R"({"conjugate_average": {"element": "b", "conjugator": "a", "m": 3}})"));
  CHECK(conj.coefficient(g.parse("A^3ba^3")) == Complex(1.0 / 3));
  auto k = c.element(g, Json::parse(R"({"kernel_basis": "e"})"));
  CHECK(k.empty());
  auto t = c.element(g, Json::parse(R"({"terms": [["a", 1.0], ["b", 0.5, -0.5]]})"));
  CHECK(t.coefficient(g.parse("b")) == Complex(0.5, -0.5));
}

TEST_CASE("probability vectors from specs") {
  RunConfig c = parse(R"({"group": {"kind": "integers"}})");
  auto v = c.vector(Json::parse(R"({"alpha": 1.5, "head": [0], "tail_mass": 1, "tail_len": 3})"));
  CHECK(v.size() == 4);
  CHECK(v[0] == 0.0);
  CHECK(v[1] > v[2]);
  CHECK_THROWS_AS(c.vector(Json::parse(R"({"entries": [0.5, 0.2]})")), UsageError);
}

TEST_CASE("recipe references build the configured measure") {
  RunConfig c = RunConfig::load(kConfigs / "f2xz2_nonfree.json");
  Group g = c.group.build();
  SparseMeasure nu = c.measure(g, c.check_nf->measure);
  NonFreeResult direct = build_nonfree_measure(c.nonfree_recipe(g));
  CHECK(tv_distance(nu, direct.nu).value == 0.0);
  CHECK(nu.weight(g.parse("z")) > 0);
  CHECK(nu.weight(g.identity()) > 0);
}
