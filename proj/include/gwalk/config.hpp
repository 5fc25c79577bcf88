#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gwalk/constructions.hpp"
#include "gwalk/criteria.hpp"

namespace gwalk {

using Json = nlohmann::ordered_json;

struct GroupSpec {
  std::string kind = "integers";  // integers, lattice, free, free_times_cyclic, cyclic, lamplighter
  int rank = 2;
  int dim = 2;
  int modulus = 2;

  Group build() const;
};

/// Measure and algebra specs are kept as JSON objects and resolved against the group on demand.
///
/// Measures:  {"atoms": [["a", 0.5], ...]}, {"file": "nu.txt"}, {"dirac": "a"}, {"uniform": ["a", "A"]},
///            {"uniform_ball": 2}, {"lazy_uniform_generators": 0.5}, {"ref": "name"},
///            {"recipe": "build_nonfree"} / {"recipe": "build_hk"} (built from that section of the same config)
/// Elements:  {"terms": [["b", 1.0], ["a", -0.5, 0.25]]}, {"file": "x.txt"}, {"basis": "b"},
///            {"kernel_basis": "b"}, {"generator_average": true},
///            {"conjugate_average": {"element": "b", "conjugator": "a", "m": 17}}, {"ref": "name"}
/// Vectors:   {"entries": [...]} or {"alpha": 1.5, "head": [...], "tail_mass": 0.5, "tail_len": 100}
struct NonFreeSection {
  std::vector<std::string> s;
  std::string witness = "whole";
  double theta = 0.5;
  int depth = 3;
  Json upsilon;
  Json base;
  int radius_offset = 0;
  int visibility_radius = 3;
  std::size_t folner_budget = 2'000'000;
};

struct HKSection {
  Json mu0;
  double delta = 0.5;
  Json upsilon;  // default: alpha 1.5, head [1 - delta], tail_mass delta, tail_len depth
  int depth = 2;
  double stage_eps = 0.25;
  double anchor_weight = 1e-3;
  std::size_t max_targets = 20'000;
  int max_m = 4096;
};

struct CheckNFSection {
  Json measure;
  std::vector<std::string> s;
  Json sigmas;  // array of measure specs or the string "default"
  int n_max = 12;
  double floor = 1e-15;
  std::size_t cap = 5'000'000;
  bool stop_on_pass = true;
};

struct CheckHKSection {
  Json measure;
  std::optional<std::string> mixture_file;  // written by build-hk
  Json tests;                               // array of element specs; default: kernel basis elements of the generators
  int n_max = 50;
  int max_moment = 40;
  std::size_t support_cap = 200'000;
};

struct NormSection {
  Json elements;  // array of element specs
  std::optional<double> threshold;
  int max_moment = 40;
  std::size_t support_cap = 400'000;
  bool schur = true;
};

struct DecomposeSection {
  Json upsilon;
  Json beta;         // number or array
  Json zeta_prime;   // array of measure specs (one per realized index) or a single spec used for all
  Json zeta_second;
  int m = 3;
  double eps = 0.1;
  int n = 10;
  std::string mode = "analytic";
  std::size_t trials = 100'000;
  int prefix_radius_offset = -1;
};

struct SimulateSection {
  Json measure;
  int n = 20;
  std::size_t trials = 100'000;
  bool per_step = false;
};

struct RunConfig {
  GroupSpec group;
  std::uint64_t seed = 1;
  Json measures = Json::object();  // named measure specs
  Json elements = Json::object();  // named element specs
  std::optional<NonFreeSection> build_nonfree;
  std::optional<HKSection> build_hk;
  std::optional<CheckNFSection> check_nf;
  std::optional<CheckHKSection> check_hk;
  std::optional<NormSection> norm;
  std::optional<DecomposeSection> decompose;
  std::optional<SimulateSection> simulate;

  std::filesystem::path base_dir;  // relative paths resolve here (not serialized)

  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& file);
  Json to_json() const;
  /// Range checks that do not need the group arithmetic.
  void validate() const;

  NonFreeRecipe nonfree_recipe(const Group& g) const;
  HKRecipe hk_recipe(const Group& g) const;

  SparseMeasure measure(const Group& g, const Json& spec) const;
  AlgebraElement element(const Group& g, const Json& spec) const;
  ProbabilityVector vector(const Json& spec) const;
  std::filesystem::path resolve(const std::string& path) const;
};

// Reports
Json to_json(const Group& g, const NormEstimate& e);
Json to_json(const Group& g, const NonFreeResult& r);
Json to_json(const Group& g, const HKResult& r);
Json to_json(const Group& g, const NFReport& r);
Json to_json(const Group& g, const HKReport& r);
Json to_json(const DecompositionReport& r);
Json to_json(const Group& g, const WalkStats& s);

std::string nf_csv(const NFReport& r);
std::string hk_csv(const HKReport& r);
std::string decomposition_csv(const DecompositionReport& r);

}  // namespace gwalk
