#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "gwalk/config.hpp"

namespace fs = std::filesystem;
using namespace gwalk;

namespace {

enum Exit { kPass = 0, kUsage = 1, kResource = 2, kUndecided = 3, kFail = 4 };

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return kPass;
    case Verdict::Fail:
      return kFail;
    case Verdict::Undecided:
      return kUndecided;
  }
  return kFail;
}

// Collects output files and writes them together at the end, each via rename.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void add_json(const std::string& name, const Json& j) { add(name, j.dump(2) + "\n"); }
  void commit() const {
    fs::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      fs::path target = dir_ / name;
      fs::path tmp = dir_ / ("." + name + ".tmp");
      {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw UsageError("cannot write " + tmp.string());
        os << content;
        if (!os) throw UsageError("write failed for " + tmp.string());
      }
      fs::rename(tmp, target);
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string measure_text(const Group& g, const SparseMeasure& mu) {
  std::ostringstream os;
  write_measure(os, g, mu);
  return os.str();
}

template <class T>
const T& need(const std::optional<T>& section, const std::string& name) {
  if (!section) throw UsageError("config has no '" + name + "' section");
  return *section;
}

ElementSet parse_set(const Group& g, const std::vector<std::string>& words) {
  ElementSet s;
  for (const auto& w : words) s.push_back(g.parse(w));
  normalize(s);
  return s;
}

int build_nonfree(const RunConfig& cfg, Outputs& out) {
  Group g = cfg.group.build();
  NonFreeResult res = build_nonfree_measure(cfg.nonfree_recipe(g));
  out.add("measure.txt", measure_text(g, res.nu));
  out.add_json("trace.json", to_json(g, res));
  std::printf("build-nonfree: %zu atoms, dropped mass %.3g, %zu stages, symmetric %s\n", res.nu.size(),
              res.nu.dropped(), res.stages.size(), is_symmetric(g, res.nu) ? "yes" : "no");
  return kPass;
}

int build_hk(const RunConfig& cfg, Outputs& out) {
  Group g = cfg.group.build();
  HKResult res = build_hk_measure(cfg.hk_recipe(g));
  out.add("measure.txt", measure_text(g, res.nu));
  Json mix = Json::array();
  for (std::size_t k = 0; k < res.mixture.size(); ++k) {
    std::string name = "mixture_" + std::to_string(k) + ".txt";
    out.add(name, measure_text(g, res.mixture[k].second));
    mix.push_back({{"weight", res.mixture[k].first}, {"file", name}});
  }
  out.add_json("mixture.json", mix);
  out.add_json("trace.json", to_json(g, res));
  double worst = 0;
  for (const auto& st : res.stages) worst = std::max(worst, st.worst_upper);
  std::printf("build-hk: %zu atoms, %zu stages, worst stage bound %.6g\n", res.nu.size(), res.stages.size(), worst);
  return kPass;
}

int check_nf(const RunConfig& cfg, Outputs& out) {
  const auto& sec = need(cfg.check_nf, "check_nf");
  Group g = cfg.group.build();
  SparseMeasure nu = cfg.measure(g, sec.measure);
  std::vector<SparseMeasure> sigmas;
  if (sec.sigmas.is_array()) {
    for (const auto& s : sec.sigmas) sigmas.push_back(cfg.measure(g, s));
  } else {
    sigmas = default_sigma_family(g);
  }
  NFOptions opt;
  opt.n_max = sec.n_max;
  opt.policy = {sec.floor, sec.cap};
  opt.stop_on_pass = sec.stop_on_pass;
  NFReport rep = nf_check(g, nu, sigmas, parse_set(g, sec.s), opt);
  Json j = to_json(g, rep);
  out.add_json("report.json", j);
  out.add("report.csv", nf_csv(rep));
  std::printf("check-nf: %s (threshold %.6g; pass %d, fail %d, undecided %d)\n", to_string(rep.verdict).c_str(),
              rep.threshold, j["counts"]["pass"].get<int>(), j["counts"]["fail"].get<int>(),
              j["counts"]["undecided"].get<int>());
  return exit_for(rep.verdict);
}

std::vector<std::pair<double, SparseMeasure>> read_mixture(const RunConfig& cfg, const Group& g,
                                                           const std::string& file) {
  fs::path p = cfg.resolve(file);
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open mixture file " + p.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
  std::vector<std::pair<double, SparseMeasure>> mix;
  for (const auto& row : j) {
    fs::path mp = p.parent_path() / row.at("file").get<std::string>();
    std::ifstream ms(mp);
    if (!ms) throw UsageError("cannot open mixture component " + mp.string());
    mix.emplace_back(row.at("weight").get<double>(), read_measure(ms, g, mp.string()));
  }
  return mix;
}

int check_hk(const RunConfig& cfg, Outputs& out) {
  const auto& sec = need(cfg.check_hk, "check_hk");
  Group g = cfg.group.build();
  HKOptions opt;
  SparseMeasure nu;
  if (sec.measure.is_object() && sec.measure.value("recipe", "") == "build_hk") {
    HKResult built = build_hk_measure(cfg.hk_recipe(g));
    nu = built.nu;
    opt.mixture = built.mixture;
  } else {
    nu = cfg.measure(g, sec.measure);
  }
  std::vector<AlgebraElement> tests;
  if (sec.tests.is_array()) {
    for (const auto& t : sec.tests) tests.push_back(cfg.element(g, t));
  } else {
    for (const auto& s : g.generators())
      if (!g.is_identity(s)) tests.push_back(AlgebraElement::basis(s));
  }
  opt.n_max = sec.n_max;
  opt.budget.max_moment = sec.max_moment;
  opt.support_cap = sec.support_cap;
  if (sec.mixture_file) opt.mixture = read_mixture(cfg, g, *sec.mixture_file);
  HKReport rep = hk_check(g, nu, tests, opt);
  Json j = to_json(g, rep);
  out.add_json("report.json", j);
  out.add("report.csv", hk_csv(rep));
  std::printf("check-hk: %s (pass %d, fail %d, undecided %d)", to_string(rep.verdict).c_str(),
              j["counts"]["pass"].get<int>(), j["counts"]["fail"].get<int>(), j["counts"]["undecided"].get<int>());
  for (const auto& n : rep.notes) std::printf("; %s", n.c_str());
  std::printf("\n");
  return exit_for(rep.verdict);
}

int norm_cmd(const RunConfig& cfg, Outputs& out) {
  const auto& sec = need(cfg.norm, "norm");
  Group g = cfg.group.build();
  NormBudget budget;
  budget.max_moment = sec.max_moment;
  budget.support_cap = sec.support_cap;
  budget.schur = sec.schur;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "element,lower,upper,verdict\n";
  bool undecided = false;
  for (std::size_t i = 0; i < sec.elements.size(); ++i) {
    AlgebraElement a = cfg.element(g, sec.elements[i]);
    NormEstimate e = estimate_norm(g, a, budget);
    LowerBoundSequence seq = norm_lower_bound(g, a, budget.max_moment, budget);
    Json row = to_json(g, e);
    row["element"] = sec.elements[i];
    row["lower_sequence"] = seq.values;
    std::string verdict = "-";
    if (sec.threshold) {
      NormVerdict v = e.classify(*sec.threshold);
      verdict = to_string(v);
      undecided = undecided || v == NormVerdict::Undecided;
      row["verdict"] = verdict;
    }
    rows.push_back(row);
    csv << i << ',' << e.lower << ',' << e.upper << ',' << verdict << '\n';
    std::printf("norm[%zu]: [%.6f, %.6f] %s\n", i, e.lower, e.upper, verdict.c_str());
  }
  Json j = {{"group", g.name()}, {"elements", rows}};
  if (sec.threshold) j["threshold"] = *sec.threshold;
  out.add_json("report.json", j);
  out.add("report.csv", csv.str());
  return undecided ? kUndecided : kPass;
}

std::vector<SparseMeasure> measure_list(const RunConfig& cfg, const Group& g, const Json& spec, std::size_t len,
                                        const std::string& what) {
  std::vector<SparseMeasure> out;
  if (spec.is_array()) {
    for (const auto& s : spec) out.push_back(cfg.measure(g, s));
    if (out.size() != len) throw UsageError(what + ": need " + std::to_string(len) + " measures");
  } else {
    out.assign(len, cfg.measure(g, spec));
  }
  return out;
}

int decompose_verify(const RunConfig& cfg, Outputs& out) {
  const auto& sec = need(cfg.decompose, "decompose");
  Group g = cfg.group.build();
  DecompositionInput in;
  in.group = g;
  in.upsilon = cfg.vector(sec.upsilon);
  std::size_t len = in.upsilon.size();
  if (sec.beta.is_number()) {
    in.beta.assign(len, sec.beta.get<double>());
  } else {
    in.beta = sec.beta.get<std::vector<double>>();
  }
  in.mode = decomposition_mode_from_name(sec.mode);
  if (!sec.zeta_prime.is_null()) {
    in.zeta_prime = measure_list(cfg, g, sec.zeta_prime, len, "decompose.zeta_prime");
    in.zeta_second = sec.zeta_second.is_null() ? in.zeta_prime
                                               : measure_list(cfg, g, sec.zeta_second, len, "decompose.zeta_second");
  } else if (in.mode == DecompositionMode::ExactSmallN) {
    throw UsageError("decompose: exact-small-n mode needs zeta_prime");
  }
  in.m = sec.m;
  in.eps = sec.eps;
  in.n = sec.n;
  in.trials = sec.trials;
  in.seed = cfg.seed;
  in.prefix_radius_offset = sec.prefix_radius_offset;
  DecompositionReport rep = decomposition_verify(in);
  out.add_json("report.json", to_json(rep));
  out.add("report.csv", decomposition_csv(rep));
  bool ok = rep.hypothesis_holds;
  std::printf("decompose-verify: P(T > %d) = %.6g", in.n, rep.survival.back());
  if (rep.n_eps)
    std::printf(", N = %d", *rep.n_eps);
  else
    std::printf(", no N on the realization (hypothesis fails)");
  if (in.mode == DecompositionMode::ExactSmallN) {
    ok = rep.mass_identity_error < 1e-12 && rep.mixture_tv < 1e-12;
    std::printf(", mass identity error %.3g, mixture tv %.3g", rep.mass_identity_error, rep.mixture_tv);
  }
  if (in.mode == DecompositionMode::MonteCarlo) {
    ok = rep.mc_agrees;
    std::printf(", monte carlo %.6g (z = %.2f)", rep.mc_survival, rep.mc_z);
  }
  std::printf("\n");
  return ok ? kPass : kFail;
}

int simulate(const RunConfig& cfg, Outputs& out) {
  const auto& sec = need(cfg.simulate, "simulate");
  Group g = cfg.group.build();
  SparseMeasure nu = cfg.measure(g, sec.measure);
  WalkStats st = walk_simulate(g, nu, sec.n, sec.trials, cfg.seed, sec.per_step);
  out.add("empirical.txt", measure_text(g, st.empirical));
  out.add_json("report.json", to_json(g, st));
  std::printf("simulate: %zu trials, %zu distinct endpoints, return frequency %.6g\n", st.trials, st.empirical.size(),
              st.return_frequency);
  return kPass;
}

void report_error(const std::string& kind, const std::string& reason) {
  Json j = {{"error", kind}, {"reason", reason}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks, boundary criteria and reduced C*-norm estimates on concrete groups"};
  app.require_subcommand(1);
  std::string config_path, outdir;
  using Handler = int (*)(const RunConfig&, Outputs&);
  const std::vector<std::pair<std::string, Handler>> commands{
      {"build-nonfree", build_nonfree}, {"build-hk", build_hk},   {"check-nf", check_nf},
      {"check-hk", check_hk},           {"norm", norm_cmd},       {"decompose-verify", decompose_verify},
      {"simulate", simulate}};
  const std::map<std::string, std::string> help{
      {"build-nonfree", "build a measure with non-free boundary action and write its trace"},
      {"build-hk", "build an HK measure on a free group via Powers averaging"},
      {"check-nf", "run the NF_S total-variation test"},
      {"check-hk", "run the norm-decay test on conjugation averages"},
      {"norm", "certified bounds for reduced C*-norms"},
      {"decompose-verify", "verify the stopping-time decomposition"},
      {"simulate", "sample the random walk"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("outdir", outdir, "output directory")->required();
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kUsage;
  }

  try {
    RunConfig cfg = RunConfig::load(config_path);
    Outputs out(outdir);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) {
        int code = commands[i].second(cfg, out);
        out.commit();
        return code;
      }
    }
  } catch (const UsageError& e) {
    report_error("usage", e.what());
    return kUsage;
  } catch (const ResourceError& e) {
    report_error("resource", e.what());
    return kResource;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kUsage;
  }
  return kUsage;
}
