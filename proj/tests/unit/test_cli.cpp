#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(GWALK_SOURCE_DIR) / "configs";

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("gwalk_cli_" + std::to_string(::getpid()))) { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
};

int run(const std::string& command, const fs::path& config, const fs::path& out) {
  std::string line = std::string(GWALK_CLI) + " " + command + " " + config.string() + " " + out.string() + " > " +
                     (out.string() + ".stdout") + " 2> " + (out.string() + ".stderr");
  int status = std::system(line.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load(const fs::path& p) { return Json::parse(slurp(p)); }

}  // namespace

TEST_CASE("check-nf on the lazy integer walk passes") {
  Scratch s;
  CHECK(run("check-nf", kConfigs / "z_lazy.json", s.dir / "nf") == 0);
  Json r = load(s.dir / "nf" / "report.json");
  CHECK(r["verdict"] == "pass");
  CHECK(r["threshold"] == 1.0);
  CHECK(fs::exists(s.dir / "nf" / "report.csv"));
}

TEST_CASE("check-hk on an abelian group fails with a note") {
  Scratch s;
  CHECK(run("check-hk", kConfigs / "z2_lattice_hk.json", s.dir / "hk") == 4);
  Json r = load(s.dir / "hk" / "report.json");
  CHECK(r["verdict"] == "fail");
  CHECK(r["notes"][0].get<std::string>().find("conjugation trivial") != std::string::npos);
}

TEST_CASE("norm on the free group random walk") {
  Scratch s;
  CHECK(run("norm", kConfigs / "f2_srw_norm.json", s.dir / "norm") == 0);
  Json r = load(s.dir / "norm" / "report.json");
  double lo = r["elements"][0]["lower"], hi = r["elements"][0]["upper"];
  CHECK(lo >= 0.85);
  CHECK(lo <= 0.8660254);
  CHECK(hi >= 0.8660254);
}

TEST_CASE("build-nonfree is deterministic and keeps e and z") {
  Scratch s;
  REQUIRE(run("build-nonfree", kConfigs / "f2xz2_nonfree.json", s.dir / "one") == 0);
  REQUIRE(run("build-nonfree", kConfigs / "f2xz2_nonfree.json", s.dir / "two") == 0);
  for (const char* f : {"measure.txt", "trace.json"}) CHECK(slurp(s.dir / "one" / f) == slurp(s.dir / "two" / f));
  std::string m = slurp(s.dir / "one" / "measure.txt");
  CHECK(m.find("\ne ") != std::string::npos);
  CHECK(m.find("\nz ") != std::string::npos);
}

TEST_CASE("validation failures exit 1 with a one-line reason") {
  Scratch s;
  Json cfg = load(kConfigs / "f2xz2_nonfree.json");
  cfg["build_nonfree"]["theta"] = 0.0;
  std::ofstream(s.dir / "bad.json") << cfg.dump();
  CHECK(run("build-nonfree", s.dir / "bad.json", s.dir / "bad") == 1);
  std::string err = slurp(s.dir / "bad.stderr");
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);
  Json e = Json::parse(err);
  CHECK(e["error"] == "usage");
  CHECK(e["reason"].get<std::string>().find("theta") != std::string::npos);
  CHECK_FALSE(fs::exists(s.dir / "bad" / "measure.txt"));
}

TEST_CASE("resource and undecided exit codes") {
  Scratch s;
  Json hk = load(kConfigs / "f2_hk.json");
  hk["build_hk"]["max_m"] = 2;
  std::ofstream(s.dir / "tight.json") << hk.dump();
  CHECK(run("build-hk", s.dir / "tight.json", s.dir / "tight") == 2);
  CHECK(Json::parse(slurp(s.dir / "tight.stderr"))["error"] == "resource");

  Json nf = load(kConfigs / "z_lazy.json");
  nf["check_nf"]["cap"] = 3;
  std::ofstream(s.dir / "capped.json") << nf.dump();
  CHECK(run("check-nf", s.dir / "capped.json", s.dir / "capped") == 3);
}

TEST_CASE("decompose-verify shipped configs") {
  Scratch s;
  CHECK(run("decompose-verify", kConfigs / "powerlaw_decompose.json", s.dir / "mc") == 0);
  Json mc = load(s.dir / "mc" / "report.json");
  CHECK(mc["monte_carlo"]["agrees"] == true);
  CHECK(run("decompose-verify", kConfigs / "z2_decompose_exact.json", s.dir / "ex") == 0);
  Json ex = load(s.dir / "ex" / "report.json");
  CHECK(ex["exact"]["mass_identity_error"].get<double>() < 1e-12);
  CHECK(ex["exact"]["mixture_tv"].get<double>() < 1e-12);
}

TEST_CASE("simulate is reproducible from the seed") {
  Scratch s;
  REQUIRE(run("simulate", kConfigs / "z_lazy.json", s.dir / "a") == 0);
  REQUIRE(run("simulate", kConfigs / "z_lazy.json", s.dir / "b") == 0);
  CHECK(slurp(s.dir / "a" / "empirical.txt") == slurp(s.dir / "b" / "empirical.txt"));
}

TEST_CASE("build-hk output feeds check-hk") {
  Scratch s;
  REQUIRE(run("build-hk", kConfigs / "f2_hk.json", s.dir / "built") == 0);
  Json mix = load(s.dir / "built" / "mixture.json");
  CHECK(mix.size() == 7);
  Json cfg = {{"group", {{"kind", "free"}, {"rank", 2}}},
              {"check_hk",
               {{"measure", {{"file", "built/measure.txt"}}},
                {"mixture_file", "built/mixture.json"},
                {"tests", Json::array({{{"basis", "b"}}})},
                {"n_max", 2}}}};
  std::ofstream(s.dir / "from_files.json") << cfg.dump();
  // two steps are not enough to halve, so the verdict is a horizon failure
  CHECK(run("check-hk", s.dir / "from_files.json", s.dir / "checked") == 4);
  Json r = load(s.dir / "checked" / "report.json");
  double tree = r["series"][0]["cells"][2]["tree_upper"];
  CHECK(tree < 0.81);
}

TEST_CASE("unknown command is a usage error") {
  Scratch s;
  CHECK(run("frobnicate", kConfigs / "z_lazy.json", s.dir / "x") != 0);
}
