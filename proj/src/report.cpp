#include <cmath>
#include <iomanip>
#include <sstream>

#include "gwalk/config.hpp"

namespace gwalk {
namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

Json tv_json(const TVDistance& d) {
  return {{"value", d.value}, {"error", d.error}, {"lower", d.lower()}, {"upper", d.upper()}};
}

Json element_list(const Group& g, const ElementSet& s) {
  Json a = Json::array();
  for (const auto& x : s) a.push_back(g.format(x));
  return a;
}

Json measure_json(const Group& g, const SparseMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& [x, w] : mu.atoms()) atoms.push_back({g.format(x), w});
  return {{"atoms", atoms}, {"dropped_mass", mu.dropped()}};
}

Json algebra_json(const Group& g, const AlgebraElement& a) {
  Json terms = Json::array();
  for (const auto& [x, c] : a.terms()) {
    if (c.imag() == 0)
      terms.push_back({g.format(x), c.real()});
    else
      terms.push_back({g.format(x), c.real(), c.imag()});
  }
  return terms;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Json to_json(const Group&, const NormEstimate& e) {
  return {{"lower", e.lower},
          {"upper", number(e.upper)},
          {"lower_method", e.lower_method},
          {"upper_method", e.upper_method}};
}

Json to_json(const Group& g, const NonFreeResult& r) {
  Json stages = Json::array();
  for (const auto& st : r.stages) {
    stages.push_back({{"index", st.index},
                      {"c", g.format(st.c)},
                      {"q_size", st.q_size},
                      {"R", element_list(g, st.r)},
                      {"F", element_list(g, st.f)},
                      {"F_size", st.f.size()},
                      {"eps", st.eps},
                      {"defect", st.defect},
                      {"A", element_list(g, st.a)}});
  }
  Json parts = Json::array();
  for (const auto& p : r.parts) parts.push_back(measure_json(g, p));
  return {{"group", g.name()},
          {"stages", stages},
          {"nu_prime_parts", parts},
          {"nu_second", measure_json(g, r.nu_second)},
          {"residual", r.residual},
          {"support_size", r.nu.size()},
          {"dropped_mass", r.nu.dropped()}};
}

Json to_json(const Group& g, const HKResult& r) {
  Json stages = Json::array();
  for (const auto& st : r.stages) {
    Json recs = Json::array();
    for (const auto& rec : st.records) {
      recs.push_back({{"target", algebra_json(g, rec.target)},
                      {"before", to_json(g, rec.before)},
                      {"after", to_json(g, rec.after)},
                      {"m", rec.m},
                      {"conjugator", rec.conjugator}});
    }
    stages.push_back({{"index", st.index},
                      {"c", g.format(st.c)},
                      {"target_count", st.target_count},
                      {"search_eps", st.search_eps},
                      {"worst_upper", st.worst_upper},
                      {"records", recs},
                      {"support_size", st.mu.size()}});
  }
  Json weights = Json::array();
  for (const auto& [w, mu] : r.mixture) weights.push_back(w);
  return {{"group", g.name()},
          {"stages", stages},
          {"component_weights", r.weights},
          {"mixture_weights", weights},
          {"residual", r.residual},
          {"support_size", r.nu.size()},
          {"dropped_mass", r.nu.dropped()}};
}

Json to_json(const Group& g, const NFReport& r) {
  Json series = Json::array();
  std::size_t pass = 0, fail = 0, und = 0;
  for (const auto& s : r.series) {
    Json cells = Json::array();
    for (const auto& c : s.cells)
      cells.push_back({{"n", c.n}, {"s_index", c.s_index}, {"tv", tv_json(c.tv)}, {"verdict", to_string(c.verdict)}});
    Json js = {{"sigma", s.sigma_index}, {"verdict", to_string(s.verdict)}, {"monotone", s.monotone}, {"cells", cells}};
    js["first_pass"] = s.first_pass ? Json(*s.first_pass) : Json(nullptr);
    series.push_back(js);
    (s.verdict == Verdict::Pass ? pass : s.verdict == Verdict::Fail ? fail : und)++;
  }
  return {{"group", g.name()},
          {"threshold", r.threshold},
          {"verdict", to_string(r.verdict)},
          {"support_generates", r.support_generates},
          {"counts", {{"pass", pass}, {"fail", fail}, {"undecided", und}}},
          {"series", series}};
}

Json to_json(const Group& g, const HKReport& r) {
  Json series = Json::array();
  std::size_t pass = 0, fail = 0, und = 0;
  for (const auto& s : r.series) {
    Json cells = Json::array();
    for (const auto& c : s.cells) {
      cells.push_back({{"n", c.n},
                       {"lower", c.lower},
                       {"upper", number(c.upper)},
                       {"direct", to_json(g, c.direct)},
                       {"tree_upper", number(c.tree_upper)},
                       {"support", c.support}});
    }
    Json js = {{"test", algebra_json(g, s.test)}, {"verdict", to_string(s.verdict)}, {"cells", cells}};
    js["first_half"] = s.first_half ? Json(*s.first_half) : Json(nullptr);
    js["extrapolated_rate"] = s.decay_rate_per_step ? Json(*s.decay_rate_per_step) : Json(nullptr);
    series.push_back(js);
    (s.verdict == Verdict::Pass ? pass : s.verdict == Verdict::Fail ? fail : und)++;
  }
  return {{"group", g.name()},
          {"verdict", to_string(r.verdict)},
          {"notes", r.notes},
          {"counts", {{"pass", pass}, {"fail", fail}, {"undecided", und}}},
          {"series", series}};
}

Json to_json(const DecompositionReport& r) {
  Json j = {{"p", r.p}, {"survival", r.survival}, {"hypothesis_holds", r.hypothesis_holds}, {"checks", r.checks_run}};
  j["N"] = r.n_eps ? Json(*r.n_eps) : Json(nullptr);
  bool exact = std::find(r.checks_run.begin(), r.checks_run.end(), "exact-small-n") != r.checks_run.end();
  bool mc = std::find(r.checks_run.begin(), r.checks_run.end(), "monte-carlo") != r.checks_run.end();
  if (exact) {
    Json comps = Json::array();
    for (const auto& c : r.components)
      comps.push_back({{"t", c.t}, {"i", c.i}, {"weight", c.weight}, {"prefix_escape", c.prefix_escape}});
    j["exact"] = {{"alpha_total", r.alpha_total},
                  {"remainder_mass", r.remainder_mass},
                  {"mass_identity_error", r.mass_identity_error},
                  {"mixture_tv", r.mixture_tv},
                  {"prefix_escape", r.prefix_escape},
                  {"components", comps}};
  }
  if (mc) {
    j["monte_carlo"] = {{"survival", r.mc_survival}, {"stderr", r.mc_stderr}, {"z", r.mc_z}, {"agrees", r.mc_agrees}};
  }
  return j;
}

Json to_json(const Group& g, const WalkStats& s) {
  Json j = {{"group", g.name()},
            {"n", s.n},
            {"trials", s.trials},
            {"distinct_endpoints", s.empirical.size()},
            {"return_frequency", s.return_frequency}};
  if (!s.mean_length.empty()) j["mean_length"] = s.mean_length;
  return j;
}

std::string nf_csv(const NFReport& r) {
  std::ostringstream os;
  os << "sigma,n,s_index,value,lower,upper,verdict\n";
  for (const auto& s : r.series)
    for (const auto& c : s.cells)
      os << s.sigma_index << ',' << c.n << ',' << c.s_index << ',' << fmt(c.tv.value) << ',' << fmt(c.tv.lower())
         << ',' << fmt(c.tv.upper()) << ',' << to_string(c.verdict) << '\n';
  return os.str();
}

std::string hk_csv(const HKReport& r) {
  std::ostringstream os;
  os << "test,n,value,lower,upper,verdict\n";
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    for (const auto& c : r.series[i].cells) {
      NormEstimate e{c.lower, c.upper, "", ""};
      os << i << ',' << c.n << ',' << fmt(c.upper) << ',' << fmt(c.lower) << ',' << fmt(c.upper) << ','
         << to_string(e.classify(0.5)) << '\n';
    }
  }
  return os.str();
}

std::string decomposition_csv(const DecompositionReport& r) {
  std::ostringstream os;
  os << "t,p,survival\n";
  for (std::size_t t = 0; t < r.survival.size(); ++t)
    os << t << ',' << (t == 0 ? std::string("") : fmt(r.p[t - 1])) << ',' << fmt(r.survival[t]) << '\n';
  return os.str();
}

}  // namespace gwalk
