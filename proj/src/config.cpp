#include "gwalk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gwalk {
namespace {

// Reads one JSON object, remembering which keys were consumed so unknown keys can be rejected.
class Section {
 public:
  Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw UsageError(where_ + ": expected an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw UsageError(where_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return get<T>(key, T{});
  }

  Json raw(const std::string& key, Json fallback = nullptr) {
    seen_.insert(key);
    return j_.contains(key) ? j_.at(key) : fallback;
  }

  template <class T>
  T required(const std::string& key) {
    if (!j_.contains(key)) throw UsageError(where_ + ": missing '" + key + "'");
    return get<T>(key, T{});
  }

  Json required_raw(const std::string& key) {
    if (!j_.contains(key)) throw UsageError(where_ + ": missing '" + key + "'");
    return raw(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw UsageError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Complex coefficient_of(const Json& row, const std::string& where) {
  if (!row.is_array() || row.size() < 2 || row.size() > 3 || !row[0].is_string())
    throw UsageError(where + ": expected [element, re] or [element, re, im]");
  double re = row[1].get<double>();
  double im = row.size() == 3 ? row[2].get<double>() : 0.0;
  return {re, im};
}

}  // namespace

Group GroupSpec::build() const {
  if (kind == "integers") return Group::integers();
  if (kind == "lattice") return Group::lattice(dim);
  if (kind == "free") return Group::free(rank);
  if (kind == "free_times_cyclic") return Group::free_times_cyclic(rank, modulus);
  if (kind == "cyclic") return Group::cyclic(modulus);
  if (kind == "lamplighter") return Group::lamplighter();
  throw UsageError("unknown group kind '" + kind +
                   "' (integers, lattice, free, free_times_cyclic, cyclic, lamplighter)");
}

RunConfig RunConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  Section top(j, "config");
  {
    Json gj = top.required_raw("group");
    Section g(gj, "group");
    c.group.kind = g.required<std::string>("kind");
    c.group.rank = g.get("rank", c.group.rank);
    c.group.dim = g.get("dim", c.group.dim);
    c.group.modulus = g.get("modulus", c.group.modulus);
    g.finish();
  }
  c.seed = top.get<std::uint64_t>("seed", 1);
  c.measures = top.raw("measures", Json::object());
  c.elements = top.raw("elements", Json::object());
  if (!c.measures.is_object()) throw UsageError("config.measures: expected an object of named specs");
  if (!c.elements.is_object()) throw UsageError("config.elements: expected an object of named specs");

  if (Json sj = top.raw("build_nonfree"); !sj.is_null()) {
    Section s(sj, "build_nonfree");
    NonFreeSection x;
    x.s = s.required<std::vector<std::string>>("S");
    x.witness = s.get("witness", x.witness);
    x.theta = s.get("theta", x.theta);
    x.depth = s.get("depth", x.depth);
    x.upsilon = s.required_raw("upsilon");
    x.base = s.required_raw("base");
    x.radius_offset = s.get("radius_offset", x.radius_offset);
    x.visibility_radius = s.get("visibility_radius", x.visibility_radius);
    x.folner_budget = s.get("folner_budget", x.folner_budget);
    s.finish();
    c.build_nonfree = x;
  }
  if (Json sj = top.raw("build_hk"); !sj.is_null()) {
    Section s(sj, "build_hk");
    HKSection x;
    x.mu0 = s.raw("mu0", Json{{"dirac", "e"}});
    x.delta = s.get("delta", x.delta);
    x.upsilon = s.raw("upsilon");
    x.depth = s.get("depth", x.depth);
    x.stage_eps = s.get("stage_eps", x.stage_eps);
    x.anchor_weight = s.get("anchor_weight", x.anchor_weight);
    x.max_targets = s.get("max_targets", x.max_targets);
    x.max_m = s.get("max_m", x.max_m);
    s.finish();
    c.build_hk = x;
  }
  if (Json sj = top.raw("check_nf"); !sj.is_null()) {
    Section s(sj, "check_nf");
    CheckNFSection x;
    x.measure = s.required_raw("measure");
    x.s = s.required<std::vector<std::string>>("S");
    x.sigmas = s.raw("sigmas", "default");
    x.n_max = s.get("n_max", x.n_max);
    x.floor = s.get("floor", x.floor);
    x.cap = s.get("cap", x.cap);
    x.stop_on_pass = s.get("stop_on_pass", x.stop_on_pass);
    s.finish();
    c.check_nf = x;
  }
  if (Json sj = top.raw("check_hk"); !sj.is_null()) {
    Section s(sj, "check_hk");
    CheckHKSection x;
    x.measure = s.required_raw("measure");
    x.mixture_file = s.maybe<std::string>("mixture_file");
    x.tests = s.raw("tests", "default");
    x.n_max = s.get("n_max", x.n_max);
    x.max_moment = s.get("max_moment", x.max_moment);
    x.support_cap = s.get("support_cap", x.support_cap);
    s.finish();
    c.check_hk = x;
  }
  if (Json sj = top.raw("norm"); !sj.is_null()) {
    Section s(sj, "norm");
    NormSection x;
    x.elements = s.required_raw("elements");
    x.threshold = s.maybe<double>("threshold");
    x.max_moment = s.get("max_moment", x.max_moment);
    x.support_cap = s.get("support_cap", x.support_cap);
    x.schur = s.get("schur", x.schur);
    s.finish();
    c.norm = x;
  }
  if (Json sj = top.raw("decompose"); !sj.is_null()) {
    Section s(sj, "decompose");
    DecomposeSection x;
    x.upsilon = s.required_raw("upsilon");
    x.beta = s.raw("beta", 1.0);
    x.zeta_prime = s.raw("zeta_prime");
    x.zeta_second = s.raw("zeta_second");
    x.m = s.get("M", x.m);
    x.eps = s.get("eps", x.eps);
    x.n = s.get("n", x.n);
    x.mode = s.get("mode", x.mode);
    x.trials = s.get("trials", x.trials);
    x.prefix_radius_offset = s.get("prefix_radius_offset", x.prefix_radius_offset);
    s.finish();
    c.decompose = x;
  }
  if (Json sj = top.raw("simulate"); !sj.is_null()) {
    Section s(sj, "simulate");
    SimulateSection x;
    x.measure = s.required_raw("measure");
    x.n = s.get("n", x.n);
    x.trials = s.get("trials", x.trials);
    x.per_step = s.get("per_step", x.per_step);
    s.finish();
    c.simulate = x;
  }
  top.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(file.string() + ": " + e.what());
  }
  auto dir = file.parent_path();
  return from_json(j, dir.empty() ? std::filesystem::path(".") : dir);
}

Json RunConfig::to_json() const {
  Json j;
  j["group"] = {{"kind", group.kind}, {"rank", group.rank}, {"dim", group.dim}, {"modulus", group.modulus}};
  j["seed"] = seed;
  j["measures"] = measures;
  j["elements"] = elements;
  if (build_nonfree) {
    const auto& x = *build_nonfree;
    j["build_nonfree"] = {{"S", x.s},
                          {"witness", x.witness},
                          {"theta", x.theta},
                          {"depth", x.depth},
                          {"upsilon", x.upsilon},
                          {"base", x.base},
                          {"radius_offset", x.radius_offset},
                          {"visibility_radius", x.visibility_radius},
                          {"folner_budget", x.folner_budget}};
  }
  if (build_hk) {
    const auto& x = *build_hk;
    j["build_hk"] = {{"mu0", x.mu0},
                     {"delta", x.delta},
                     {"upsilon", x.upsilon},
                     {"depth", x.depth},
                     {"stage_eps", x.stage_eps},
                     {"anchor_weight", x.anchor_weight},
                     {"max_targets", x.max_targets},
                     {"max_m", x.max_m}};
    if (x.upsilon.is_null()) j["build_hk"].erase("upsilon");
  }
  if (check_nf) {
    const auto& x = *check_nf;
    j["check_nf"] = {{"measure", x.measure}, {"S", x.s},         {"sigmas", x.sigmas},
                     {"n_max", x.n_max},     {"floor", x.floor}, {"cap", x.cap},
                     {"stop_on_pass", x.stop_on_pass}};
  }
  if (check_hk) {
    const auto& x = *check_hk;
    j["check_hk"] = {{"measure", x.measure},
                     {"tests", x.tests},
                     {"n_max", x.n_max},
                     {"max_moment", x.max_moment},
                     {"support_cap", x.support_cap}};
    if (x.mixture_file) j["check_hk"]["mixture_file"] = *x.mixture_file;
  }
  if (norm) {
    const auto& x = *norm;
    j["norm"] = {{"elements", x.elements},
                 {"max_moment", x.max_moment},
                 {"support_cap", x.support_cap},
                 {"schur", x.schur}};
    if (x.threshold) j["norm"]["threshold"] = *x.threshold;
  }
  if (decompose) {
    const auto& x = *decompose;
    j["decompose"] = {{"upsilon", x.upsilon}, {"beta", x.beta}, {"M", x.m},           {"eps", x.eps},
                      {"n", x.n},             {"mode", x.mode}, {"trials", x.trials},
                      {"prefix_radius_offset", x.prefix_radius_offset}};
    if (!x.zeta_prime.is_null()) j["decompose"]["zeta_prime"] = x.zeta_prime;
    if (!x.zeta_second.is_null()) j["decompose"]["zeta_second"] = x.zeta_second;
  }
  if (simulate) {
    const auto& x = *simulate;
    j["simulate"] = {{"measure", x.measure}, {"n", x.n}, {"trials", x.trials}, {"per_step", x.per_step}};
  }
  return j;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw UsageError(what); };
  static const std::set<std::string> kinds{"integers", "lattice", "free", "free_times_cyclic", "cyclic",
                                           "lamplighter"};
  if (!kinds.count(group.kind)) fail("group.kind: unknown kind '" + group.kind + "'");
  auto check_ref = [&](const Json& spec, const Json& table, const std::string& where) {
    if (spec.is_object() && spec.contains("ref")) {
      if (!spec["ref"].is_string() || !table.contains(spec["ref"].get<std::string>()))
        fail(where + ": unresolved reference " + spec["ref"].dump());
    }
  };
  if (build_nonfree) {
    const auto& x = *build_nonfree;
    if (x.s.empty()) fail("build_nonfree.S: must be nonempty");
    if (!(x.theta > 0 && x.theta < 1)) fail("build_nonfree.theta: must lie in (0,1)");
    if (x.depth < 1) fail("build_nonfree.depth: must be >= 1");
    if (x.visibility_radius < 0) fail("build_nonfree.visibility_radius: must be >= 0");
    check_ref(x.base, measures, "build_nonfree.base");
  }
  if (build_hk) {
    const auto& x = *build_hk;
    if (!(x.delta > 0 && x.delta < 1)) fail("build_hk.delta: must lie in (0,1)");
    if (x.depth < 1) fail("build_hk.depth: must be >= 1");
    if (!(x.stage_eps > 0)) fail("build_hk.stage_eps: must be positive");
    if (!(x.anchor_weight >= 0 && x.anchor_weight < 0.25)) fail("build_hk.anchor_weight: must lie in [0, 0.25)");
    if (x.max_m < 2) fail("build_hk.max_m: must be >= 2");
    check_ref(x.mu0, measures, "build_hk.mu0");
  }
  if (check_nf) {
    const auto& x = *check_nf;
    if (x.s.empty()) fail("check_nf.S: must be nonempty");
    if (x.n_max < 0) fail("check_nf.n_max: must be >= 0");
    if (!(x.floor >= 0)) fail("check_nf.floor: must be >= 0");
    if (x.cap < 1) fail("check_nf.cap: must be >= 1");
    if (!(x.sigmas.is_array() || x.sigmas == "default")) fail("check_nf.sigmas: array of measures or \"default\"");
    check_ref(x.measure, measures, "check_nf.measure");
  }
  if (check_hk) {
    const auto& x = *check_hk;
    if (x.n_max < 0) fail("check_hk.n_max: must be >= 0");
    if (x.max_moment < 1) fail("check_hk.max_moment: must be >= 1");
    if (x.support_cap < 1) fail("check_hk.support_cap: must be >= 1");
    if (!(x.tests.is_array() || x.tests == "default")) fail("check_hk.tests: array of elements or \"default\"");
    check_ref(x.measure, measures, "check_hk.measure");
  }
  if (norm) {
    const auto& x = *norm;
    if (!x.elements.is_array() || x.elements.empty()) fail("norm.elements: nonempty array required");
    if (x.max_moment < 1) fail("norm.max_moment: must be >= 1");
    for (const auto& e : x.elements) check_ref(e, elements, "norm.elements");
  }
  if (decompose) {
    const auto& x = *decompose;
    if (x.m < 1) fail("decompose.M: must be >= 1");
    if (!(x.eps > 0 && x.eps < 1)) fail("decompose.eps: must lie in (0,1)");
    if (x.n < 0) fail("decompose.n: must be >= 0");
    decomposition_mode_from_name(x.mode);
    if (x.trials < 1) fail("decompose.trials: must be >= 1");
  }
  if (simulate) {
    const auto& x = *simulate;
    if (x.n < 0) fail("simulate.n: must be >= 0");
    if (x.trials < 1) fail("simulate.trials: must be >= 1");
    check_ref(x.measure, measures, "simulate.measure");
  }
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

NonFreeRecipe RunConfig::nonfree_recipe(const Group& g) const {
  if (!build_nonfree) throw UsageError("config has no 'build_nonfree' section");
  const auto& sec = *build_nonfree;
  NonFreeRecipe r;
  r.group = g;
  for (const auto& w : sec.s) r.s.push_back(g.parse(w));
  normalize(r.s);
  r.witness = AmenableWitness::from_name(g, sec.witness).kind();
  r.upsilon = vector(sec.upsilon);
  r.base = measure(g, sec.base);
  r.theta = sec.theta;
  r.depth = sec.depth;
  r.radius_offset = sec.radius_offset;
  r.visibility_radius = sec.visibility_radius;
  r.folner_budget = sec.folner_budget;
  return r;
}

HKRecipe RunConfig::hk_recipe(const Group& g) const {
  if (!build_hk) throw UsageError("config has no 'build_hk' section");
  const auto& sec = *build_hk;
  HKRecipe r;
  r.group = g;
  r.mu0 = measure(g, sec.mu0);
  r.delta = sec.delta;
  r.depth = sec.depth;
  r.upsilon = sec.upsilon.is_null()
                  ? power_law_vector(1.5, {1 - sec.delta}, sec.delta, static_cast<std::size_t>(sec.depth))
                  : vector(sec.upsilon);
  r.stage_eps = sec.stage_eps;
  r.anchor_weight = sec.anchor_weight;
  r.max_targets = sec.max_targets;
  r.powers.max_m = sec.max_m;
  return r;
}

SparseMeasure RunConfig::measure(const Group& g, const Json& spec) const {
  if (!spec.is_object() || spec.size() != 1) throw UsageError("measure spec must be an object with one key: " + spec.dump());
  const std::string key = spec.begin().key();
  const Json& v = spec.begin().value();
  try {
    if (key == "ref") {
      std::string name = v.get<std::string>();
      if (!measures.contains(name)) throw UsageError("unknown measure '" + name + "'");
      return measure(g, measures.at(name));
    }
    if (key == "atoms") {
      std::vector<SparseMeasure::Atom> atoms;
      for (const auto& row : v) {
        if (!row.is_array() || row.size() != 2) throw UsageError("atoms rows are [element, weight]");
        atoms.emplace_back(g.parse(row[0].get<std::string>()), row[1].get<double>());
      }
      return SparseMeasure::from_atoms(std::move(atoms));
    }
    if (key == "file") {
      auto p = resolve(v.get<std::string>());
      std::ifstream in(p);
      if (!in) throw UsageError("cannot open measure file " + p.string());
      return read_measure(in, g, p.string());
    }
    if (key == "recipe") {
      std::string which = v.get<std::string>();
      if (which == "build_nonfree") return build_nonfree_measure(nonfree_recipe(g)).nu;
      if (which == "build_hk") return build_hk_measure(hk_recipe(g)).nu;
      throw UsageError("unknown recipe '" + which + "' (build_nonfree, build_hk)");
    }
    if (key == "dirac") return dirac(g.parse(v.get<std::string>()));
    if (key == "uniform") {
      ElementSet f;
      for (const auto& x : v) f.push_back(g.parse(x.get<std::string>()));
      normalize(f);
      return uniform_on(f);
    }
    if (key == "uniform_ball") return uniform_on(ball(g, v.get<int>()));
    if (key == "lazy_uniform_generators") {
      double lazy = v.get<double>();
      if (!(lazy >= 0 && lazy < 1)) throw UsageError("lazy_uniform_generators: laziness must lie in [0,1)");
      std::vector<SparseMeasure::Atom> atoms;
      if (lazy > 0) atoms.emplace_back(g.identity(), lazy);
      double w = (1 - lazy) / static_cast<double>(g.generators().size());
      for (const auto& s : g.generators()) atoms.emplace_back(s, w);
      return SparseMeasure::from_atoms(std::move(atoms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed measure spec " + spec.dump() + ": " + e.what());
  }
  throw UsageError("unknown measure spec '" + key + "'");
}

AlgebraElement RunConfig::element(const Group& g, const Json& spec) const {
  if (!spec.is_object() || spec.size() != 1) throw UsageError("element spec must be an object with one key: " + spec.dump());
  const std::string key = spec.begin().key();
  const Json& v = spec.begin().value();
  try {
    if (key == "ref") {
      std::string name = v.get<std::string>();
      if (!elements.contains(name)) throw UsageError("unknown element '" + name + "'");
      return element(g, elements.at(name));
    }
    if (key == "terms") {
      std::vector<AlgebraElement::Term> terms;
      for (const auto& row : v) terms.emplace_back(g.parse(row[0].get<std::string>()), coefficient_of(row, "terms"));
      return AlgebraElement::from_terms(std::move(terms));
    }
    if (key == "file") {
      auto p = resolve(v.get<std::string>());
      std::ifstream in(p);
      if (!in) throw UsageError("cannot open element file " + p.string());
      return read_algebra(in, g, p.string());
    }
    if (key == "basis") return AlgebraElement::basis(g.parse(v.get<std::string>()));
    if (key == "kernel_basis") return kernel_projection(g, AlgebraElement::basis(g.parse(v.get<std::string>())));
    if (key == "generator_average") {
      std::vector<AlgebraElement::Term> terms;
      double w = 1.0 / static_cast<double>(g.generators().size());
      for (const auto& s : g.generators()) terms.emplace_back(s, w);
      return AlgebraElement::from_terms(std::move(terms));
    }
    if (key == "conjugate_average") {
      Element x = g.parse(v.at("element").get<std::string>());
      Element w = g.parse(v.at("conjugator").get<std::string>());
      int m = v.at("m").get<int>();
      if (m < 1) throw UsageError("conjugate_average: m must be >= 1");
      std::vector<AlgebraElement::Term> terms;
      Element p = g.identity();
      for (int k = 1; k <= m; ++k) {
        p = g.multiply(p, w);
        terms.emplace_back(g.conjugate(x, p), 1.0 / m);
      }
      return AlgebraElement::from_terms(std::move(terms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed element spec " + spec.dump() + ": " + e.what());
  }
  throw UsageError("unknown element spec '" + key + "'");
}

ProbabilityVector RunConfig::vector(const Json& spec) const {
  try {
    if (spec.contains("entries")) return ProbabilityVector::explicit_entries(spec.at("entries").get<std::vector<double>>());
    return power_law_vector(spec.value("alpha", 1.5), spec.value("head", std::vector<double>{}),
                            spec.value("tail_mass", 0.0), spec.value("tail_len", std::size_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed probability vector " + spec.dump() + ": " + e.what());
  }
}

}  // namespace gwalk
