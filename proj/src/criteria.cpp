#include "gwalk/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

namespace gwalk {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Undecided:
      return "undecided";
  }
  return "?";
}

namespace {

void require_probability(const SparseMeasure& mu, const std::string& what) {
  if (mu.empty()) throw UsageError(what + " is empty");
  if (std::abs(mu.mass() + mu.dropped() - 1.0) > 1e-9) throw UsageError(what + " is not a probability measure");
}

bool is_abelian(const Group& g) {
  return g.kind() == GroupKind::Integers || g.kind() == GroupKind::Lattice || g.kind() == GroupKind::Cyclic;
}

Verdict combine(const std::vector<Verdict>& vs) {
  bool undecided = false;
  for (Verdict v : vs) {
    if (v == Verdict::Fail) return Verdict::Fail;
    if (v == Verdict::Undecided) undecided = true;
  }
  return undecided ? Verdict::Undecided : Verdict::Pass;
}

bool support_generates(const Group& g, const SparseMeasure& nu) {
  ElementSet t;
  for (const auto& [x, w] : nu.atoms()) {
    t.push_back(x);
    t.push_back(g.inverse(x));
  }
  normalize(t);
  ElementSet reach;
  try {
    reach = word_ball(g, t, 4, 2'000'000);
  } catch (const ResourceError&) {
    reach = word_ball(g, t, 3, 50'000'000);
  }
  return std::all_of(g.generators().begin(), g.generators().end(),
                     [&](const Element& x) { return set_contains(reach, x); });
}

}  // namespace

// ---------------------------------------------------------------- NF_S

double nf_threshold(std::size_t s_size) {
  if (s_size == 0) throw UsageError("S must be nonempty");
  return 2.0 * (1.0 - 1.0 / (2.0 * static_cast<double>(s_size)));
}

std::vector<SparseMeasure> default_sigma_family(const Group& g, std::size_t diracs, int max_radius) {
  std::vector<SparseMeasure> out;
  for (const auto& x : enumerate_elements(g, diracs)) out.push_back(dirac(x));
  for (int r = 1; r <= max_radius; ++r) out.push_back(uniform_on(ball(g, r)));
  return out;
}

NFReport nf_check(const Group& g, const SparseMeasure& nu, const std::vector<SparseMeasure>& sigmas,
                  const ElementSet& s, const NFOptions& options) {
  require_probability(nu, "nu");
  if (sigmas.empty()) throw UsageError("nf_check needs at least one test measure");
  for (std::size_t i = 0; i < sigmas.size(); ++i) require_probability(sigmas[i], "sigma " + std::to_string(i));
  for (const auto& x : s) g.require_owned(x);
  if (options.n_max < 0) throw UsageError("n_max must be >= 0");
  options.policy.validate();

  NFReport rep;
  rep.threshold = nf_threshold(s.size());
  rep.support_generates = support_generates(g, nu);
  rep.series.resize(sigmas.size());
  std::vector<char> active(sigmas.size(), 1);
  for (std::size_t i = 0; i < sigmas.size(); ++i) rep.series[i].sigma_index = i;

  SparseMeasure power = dirac(g.identity());
  bool truncated_out = false;
  for (int n = 0; n <= options.n_max; ++n) {
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      if (!active[i]) continue;
      NFSeries& ser = rep.series[i];
      NFCell cell;
      cell.n = n;
      try {
        SparseMeasure x = convolve(g, sigmas[i], power, options.policy);
        bool first = true;
        for (std::size_t k = 0; k < s.size(); ++k) {
          TVDistance d = tv_distance(translate_left(g, s[k], x), x);
          if (first || d.upper() < cell.tv.upper() || (d.upper() == cell.tv.upper() && d.value < cell.tv.value)) {
            cell.tv = d;
            cell.s_index = k;
            first = false;
          }
        }
      } catch (const ResourceError&) {
        truncated_out = true;
        active[i] = 0;
        continue;
      }
      if (cell.tv.upper() < rep.threshold) {
        cell.verdict = NormVerdict::CertifiedBelow;
      } else if (cell.tv.lower() >= rep.threshold) {
        cell.verdict = NormVerdict::CertifiedAbove;
      }
      if (!ser.cells.empty()) {
        const TVDistance& prev = ser.cells.back().tv;
        if (cell.tv.value > prev.value + 2 * (prev.error + cell.tv.error) + 1e-12) ser.monotone = false;
      }
      ser.cells.push_back(cell);
      if (cell.verdict == NormVerdict::CertifiedBelow && !ser.first_pass) {
        ser.first_pass = n;
        if (options.stop_on_pass) active[i] = 0;
      }
    }
    if (n == options.n_max || std::none_of(active.begin(), active.end(), [](char c) { return c != 0; })) break;
    try {
      power = convolve(g, power, nu, options.policy);
    } catch (const ResourceError&) {
      truncated_out = true;
      break;
    }
  }

  std::vector<Verdict> vs;
  for (auto& ser : rep.series) {
    if (ser.first_pass) {
      ser.verdict = Verdict::Pass;
    } else if (truncated_out || std::any_of(ser.cells.begin(), ser.cells.end(), [](const NFCell& c) {
                 return c.verdict == NormVerdict::Undecided;
               })) {
      ser.verdict = Verdict::Undecided;
    } else {
      ser.verdict = Verdict::Fail;
    }
    vs.push_back(ser.verdict);
  }
  rep.verdict = combine(vs);
  return rep;
}

TVProfile tv_decay_profile(const Group& g, const SparseMeasure& nu, const SparseMeasure& sigma, const Element& s,
                           int n_max, const TruncationPolicy& policy) {
  require_probability(nu, "nu");
  require_probability(sigma, "sigma");
  if (n_max < 0) throw UsageError("n_max must be >= 0");
  TVProfile p;
  SparseMeasure x = sigma;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) x = convolve(g, x, nu, policy);
    TVDistance d = tv_distance(translate_left(g, s, x), x);
    if (!p.values.empty()) {
      const TVDistance& prev = p.values.back();
      double inc = d.value - prev.value;
      p.worst_increase = std::max(p.worst_increase, inc);
      if (inc > 2 * (prev.error + d.error) + 1e-12) {
        ++p.violations;
        p.monotone = false;
      }
    }
    p.values.push_back(d);
  }
  p.limit = p.values.back();
  return p;
}

double log_log_slope(const TVProfile& p, int n_lo, int n_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int n = std::max(n_lo, 1); n <= n_hi && n < static_cast<int>(p.values.size()); ++n) {
    double v = p.values[static_cast<std::size_t>(n)].value;
    if (v <= 0) continue;
    double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) throw UsageError("log_log_slope: fewer than two positive values in range");
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

// ---------------------------------------------------------------- HK

namespace {

struct TermsHash {
  std::size_t operator()(const AlgebraElement& a) const {
    std::size_t h = a.size();
    ElementHash eh;
    for (const auto& [x, c] : a.terms()) {
      h ^= eh(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(c.real()) + (h << 3);
    }
    return h;
  }
};

struct TermsEq {
  bool operator()(const AlgebraElement& a, const AlgebraElement& b) const {
    return a.dropped() == b.dropped() && a.terms() == b.terms();
  }
};

// Upper bounds for a^{nu^n} from nu = sum_j w_j nu_j: expand into sequences of components and
// bound each branch by the smallest certified bound seen along it. Branches with equal elements are merged.
class MixtureTree {
 public:
  MixtureTree(const Group& g, const AlgebraElement& root, const HKOptions& opt, double root_upper)
      : g_(g), opt_(opt) {
    nodes_.push_back({root, 1.0, root_upper});
  }

  double step() {
    std::unordered_map<AlgebraElement, std::size_t, TermsHash, TermsEq> index;
    std::vector<Node> next;
    for (const auto& node : nodes_) {
      for (const auto& [wj, mu] : opt_.mixture) {
        if (wj == 0) continue;
        double w = node.weight * wj;
        if (mu.size() == 1 && !g_.is_identity(mu.atoms().front().first)) {
          // a unitary conjugate has the same norm and later averaging only contracts it
          frozen_ += w * node.bound;
          continue;
        }
        if (node.x.size() * mu.size() > 8 * opt_.support_cap) {
          frozen_ += w * node.bound;
          continue;
        }
        AlgebraElement y = averaged_conjugation(g_, node.x, mu);
        if (y.size() > opt_.support_cap) {
          frozen_ += w * node.bound;
          continue;
        }
        auto it = index.find(y);
        if (it == index.end()) {
          index.emplace(y, next.size());
          next.push_back({std::move(y), w, node.bound});
        } else {
          Node& m = next[it->second];
          m.weight += w;
          m.bound = std::min(m.bound, node.bound);
        }
      }
    }
    if (next.size() > opt_.tree_node_cap) {
      std::sort(next.begin(), next.end(), [](const Node& a, const Node& b) { return a.weight > b.weight; });
      for (std::size_t k = opt_.tree_node_cap; k < next.size(); ++k) frozen_ += next[k].weight * next[k].bound;
      next.resize(opt_.tree_node_cap);
    }
    double total = frozen_;
    for (auto& node : next) {
      node.bound = std::min(node.bound, estimate_norm(g_, node.x, opt_.budget).upper);
      total += node.weight * node.bound;
    }
    nodes_ = std::move(next);
    return total;
  }

 private:
  struct Node {
    AlgebraElement x;
    double weight;
    double bound;
  };
  const Group& g_;
  const HKOptions& opt_;
  std::vector<Node> nodes_;
  double frozen_ = 0.0;
};

}  // namespace

HKReport hk_check(const Group& g, const SparseMeasure& nu, const std::vector<AlgebraElement>& tests,
                  const HKOptions& options) {
  require_probability(nu, "nu");
  options.budget.validate();
  if (options.n_max < 0) throw UsageError("n_max must be >= 0");
  for (const auto& d : tests) {
    if (std::abs(trace(g, d)) > 1e-12 * std::max(1.0, d.l1_norm()))
      throw UsageError("hk_check: test elements must lie in ker tau (trace 0)");
    for (const auto& [x, c] : d.terms()) g.require_owned(x);
  }
  if (!options.mixture.empty()) {
    std::vector<double> ws;
    std::vector<SparseMeasure> ms;
    for (const auto& [w, mu] : options.mixture) {
      if (!(w >= 0)) throw UsageError("mixture weights must be >= 0");
      ws.push_back(w);
      ms.push_back(mu);
    }
    SparseMeasure sum = convex_combine(ws, ms);
    if (tv_distance(sum, nu).value > 1e-9) throw UsageError("mixture components do not reassemble nu");
  }

  HKReport rep;
  if (is_abelian(g)) rep.notes.push_back("conjugation trivial: the group is abelian, so d^nu = d for every nu");
  std::vector<Verdict> vs;
  for (const auto& d : tests) {
    HKSeries ser;
    ser.test = d;
    AlgebraElement x = d;
    bool direct_alive = true;
    NormEstimate est = estimate_norm(g, x, options.budget);
    std::optional<MixtureTree> tree;
    if (!options.mixture.empty()) tree.emplace(g, d, options, est.upper);
    for (int n = 0; n <= options.n_max; ++n) {
      HKCell cell;
      cell.n = n;
      if (n > 0) {
        if (direct_alive && x.size() * nu.size() > 8 * options.support_cap) direct_alive = false;
        if (direct_alive) {
          x = truncate(averaged_conjugation(g, x, nu), options.floor, options.support_cap);
          est = estimate_norm(g, x, options.budget);
          if (x.dropped() >= d.l1_norm()) direct_alive = false;
        }
        if (tree) cell.tree_upper = tree->step();
      }
      cell.direct = est;
      cell.support = x.size();
      cell.lower = est.lower;
      cell.upper = std::min(est.upper, cell.tree_upper);
      // the direct bound from a frozen iterate still holds later since averaging is a contraction
      if (!ser.cells.empty()) cell.upper = std::min(cell.upper, ser.cells.back().upper);
      if (!direct_alive && !ser.cells.empty()) cell.lower = 0.0;
      ser.cells.push_back(cell);
      if (cell.upper < 0.5 && !ser.first_half) {
        ser.first_half = n;
        if (n > 0) ser.decay_rate_per_step = std::pow(0.5, 1.0 / n);
        if (options.stop_at_half) break;
      }
      if (!tree && !direct_alive) break;
    }
    const HKCell& last = ser.cells.back();
    if (ser.first_half) {
      ser.verdict = Verdict::Pass;
    } else if (last.lower >= 0.5) {
      ser.verdict = Verdict::Fail;
    } else {
      ser.verdict = Verdict::Undecided;
    }
    vs.push_back(ser.verdict);
    rep.series.push_back(std::move(ser));
  }
  rep.verdict = tests.empty() ? Verdict::Pass : combine(vs);
  return rep;
}

// ---------------------------------------------------------------- stopping-time decomposition

DecompositionMode decomposition_mode_from_name(const std::string& name) {
  if (name == "analytic") return DecompositionMode::Analytic;
  if (name == "exact-small-n") return DecompositionMode::ExactSmallN;
  if (name == "monte-carlo") return DecompositionMode::MonteCarlo;
  throw UsageError("unknown decomposition mode '" + name + "' (analytic, exact-small-n, monte-carlo)");
}

std::string to_string(DecompositionMode m) {
  switch (m) {
    case DecompositionMode::Analytic:
      return "analytic";
    case DecompositionMode::ExactSmallN:
      return "exact-small-n";
    case DecompositionMode::MonteCarlo:
      return "monte-carlo";
  }
  return "?";
}

void DecompositionInput::validate() const {
  std::size_t len = upsilon.size();
  if (len == 0) throw UsageError("decomposition: empty probability vector");
  if (beta.size() != len) throw UsageError("decomposition: beta needs one entry per realized index");
  for (double b : beta)
    if (!(b >= 0 && b <= 1)) throw UsageError("decomposition: beta entries must lie in [0,1]");
  double tail_min = 1.0;
  for (std::size_t i = len / 2; i < len; ++i) tail_min = std::min(tail_min, beta[i]);
  if (!(tail_min > 0)) throw UsageError("decomposition: beta has liminf 0 on the realization");
  if (m < 1) throw UsageError("decomposition: M must be >= 1");
  if (!(eps > 0 && eps < 1)) throw UsageError("decomposition: eps must lie in (0,1)");
  if (n < 0) throw UsageError("decomposition: n must be >= 0");
  if (mode == DecompositionMode::MonteCarlo && trials == 0) throw UsageError("decomposition: trials must be >= 1");
  if (mode == DecompositionMode::ExactSmallN) {
    if (zeta_prime.size() != len || zeta_second.size() != len)
      throw UsageError("decomposition: zeta' and zeta'' need one measure per realized index");
    for (std::size_t i = 0; i < len; ++i) {
      require_probability(zeta_prime[i], "zeta'_" + std::to_string(i));
      require_probability(zeta_second[i], "zeta''_" + std::to_string(i));
    }
  }
}

SparseMeasure decomposition_measure(const DecompositionInput& in) {
  std::vector<SparseMeasure::Atom> atoms;
  double dropped = 0;
  for (std::size_t i = 0; i < in.upsilon.size(); ++i) {
    double u = in.upsilon[i], b = in.beta[i];
    for (const auto& [x, w] : in.zeta_prime[i].atoms()) atoms.emplace_back(x, u * b * w);
    for (const auto& [x, w] : in.zeta_second[i].atoms()) atoms.emplace_back(x, u * (1 - b) * w);
    dropped += u * (b * in.zeta_prime[i].dropped() + (1 - b) * in.zeta_second[i].dropped());
  }
  return SparseMeasure::from_atoms(std::move(atoms), dropped);
}

DecompositionReport decomposition_verify(const DecompositionInput& in) {
  in.validate();
  DecompositionReport rep;
  const std::size_t len = in.upsilon.size();
  auto eligible = [&](std::size_t k, int t) {
    return static_cast<int>(k) > t && static_cast<int>(k) >= in.m;
  };

  // P(T > t) = prod_{s <= t} (1 - p_s); p_s vanishes once s >= len - 1, so the horizon len suffices for N.
  int horizon = std::max(in.n, static_cast<int>(len));
  double surv = 1.0;
  rep.survival.push_back(1.0);
  for (int t = 1; t <= horizon; ++t) {
    double p = 0;
    for (std::size_t k = 0; k < len; ++k)
      if (eligible(k, t)) p += in.upsilon[k] * in.beta[k];
    surv *= 1 - p;
    if (!rep.n_eps && surv < in.eps) rep.n_eps = t;
    if (t <= in.n) {
      rep.p.push_back(p);
      rep.survival.push_back(surv);
    }
  }
  rep.hypothesis_holds = rep.n_eps.has_value();
  rep.checks_run.push_back("analytic");

  if (in.mode == DecompositionMode::ExactSmallN) {
    const Group& g = in.group;
    SparseMeasure nu = decomposition_measure(in);
    std::vector<SparseMeasure> suffix{dirac(g.identity())};
    for (int r = 1; r < in.n; ++r) suffix.push_back(convolve(g, suffix.back(), nu, in.policy));
    SparseMeasure target = convolution_power(g, nu, in.n, in.policy);

    std::vector<ElementSet> a_sets;  // A_i
    ElementSet acc;
    for (std::size_t i = 0; i < len; ++i) {
      for (const auto& x : in.zeta_prime[i].support()) acc.push_back(x);
      for (const auto& x : in.zeta_second[i].support()) acc.push_back(x);
      normalize(acc);
      a_sets.push_back(acc);
    }
    std::map<std::size_t, ElementSet> prefix_ball;
    auto ball_for = [&](std::size_t k) -> const ElementSet* {
      auto it = prefix_ball.find(k);
      if (it != prefix_ball.end()) return &it->second;
      int radius = static_cast<int>(k) + in.prefix_radius_offset;
      ElementSet b = k == 0 || radius < 1 ? ElementSet{g.identity()} : word_ball(g, a_sets[k - 1], radius);
      return &prefix_ball.emplace(k, std::move(b)).first->second;
    };

    SparseMeasure u = dirac(g.identity());
    std::vector<SparseMeasure::Atom> mixture;
    double mixture_dropped = 0;
    bool escape_known = true;
    for (int t = 1; t <= in.n; ++t) {
      std::vector<SparseMeasure::Atom> step;
      double step_dropped = 0;
      for (std::size_t k = 0; k < len; ++k) {
        double uk = in.upsilon[k], b = in.beta[k];
        if (uk == 0) continue;
        bool stop = eligible(k, t) && b > 0;
        if (stop) {
          DecompositionComponent comp;
          comp.t = t;
          comp.i = static_cast<int>(k);
          comp.weight = uk * b * u.mass();
          SparseMeasure piece = convolve(g, convolve(g, u, in.zeta_prime[k], in.policy),
                                         suffix[static_cast<std::size_t>(in.n - t)], in.policy);
          for (const auto& [x, w] : piece.atoms()) mixture.emplace_back(x, uk * b * w);
          mixture_dropped += uk * b * piece.dropped();
          try {
            const ElementSet* pb = ball_for(k);
            for (const auto& [x, w] : u.atoms())
              if (!set_contains(*pb, x)) comp.prefix_escape += uk * b * w;
          } catch (const ResourceError&) {
            escape_known = false;
          }
          rep.alpha_total += comp.weight;
          rep.prefix_escape += comp.prefix_escape;
          rep.components.push_back(comp);
        }
        double wp = stop ? 0.0 : b;
        for (const auto& [x, w] : in.zeta_prime[k].atoms())
          if (wp > 0) step.emplace_back(x, uk * wp * w);
        for (const auto& [x, w] : in.zeta_second[k].atoms())
          if (b < 1) step.emplace_back(x, uk * (1 - b) * w);
        step_dropped += uk * (wp * in.zeta_prime[k].dropped() + (1 - b) * in.zeta_second[k].dropped());
      }
      if (step.empty()) {
        u = SparseMeasure::from_atoms({}, u.dropped());
        break;
      }
      u = convolve(g, u, SparseMeasure::from_atoms(std::move(step), step_dropped), in.policy);
    }
    if (!escape_known) rep.prefix_escape = -1.0;
    rep.remainder_mass = u.mass();
    rep.mass_identity_error = std::abs(rep.remainder_mass + rep.alpha_total - 1.0);
    for (const auto& [x, w] : u.atoms()) mixture.emplace_back(x, w);
    SparseMeasure mix = SparseMeasure::from_atoms(std::move(mixture), mixture_dropped + u.dropped());
    rep.mixture_tv = tv_distance(mix, target).value;
    rep.checks_run.push_back("exact-small-n");
  }

  if (in.mode == DecompositionMode::MonteCarlo) {
    std::mt19937_64 rng(in.seed);
    std::discrete_distribution<std::size_t> pick(in.upsilon.entries().begin(), in.upsilon.entries().end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t survivors = 0;
    for (std::size_t trial = 0; trial < in.trials; ++trial) {
      bool stopped = false;
      for (int t = 1; t <= in.n && !stopped; ++t) {
        std::size_t k = pick(rng);
        bool y = unif(rng) < in.beta[k];
        stopped = eligible(k, t) && y;
      }
      if (!stopped) ++survivors;
    }
    double exact = rep.survival[static_cast<std::size_t>(in.n)];
    double trials = static_cast<double>(in.trials);
    rep.mc_survival = static_cast<double>(survivors) / trials;
    rep.mc_stderr = std::sqrt(exact * (1 - exact) / trials);
    double diff = std::abs(rep.mc_survival - exact);
    if (rep.mc_stderr > 0) {
      rep.mc_z = diff / rep.mc_stderr;
      rep.mc_agrees = rep.mc_z <= 4.0;
    } else {
      rep.mc_agrees = diff == 0;
    }
    rep.checks_run.push_back("monte-carlo");
  }
  return rep;
}

// ---------------------------------------------------------------- simulation

WalkStats walk_simulate(const Group& g, const SparseMeasure& nu, int n, std::size_t trials, std::uint64_t seed,
                        bool per_step) {
  if (n < 0) throw UsageError("walk_simulate: n must be >= 0");
  if (trials == 0) throw UsageError("walk_simulate: trials must be >= 1");
  Sampler sampler(nu);
  std::mt19937_64 rng(seed);
  std::unordered_map<Element, std::size_t, ElementHash> counts;
  WalkStats st;
  st.n = n;
  st.trials = trials;
  if (per_step) st.mean_length.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t k = 0; k < trials; ++k) {
    Element z = g.identity();
    for (int t = 1; t <= n; ++t) {
      z = g.multiply(z, sampler(rng));
      if (per_step) st.mean_length[static_cast<std::size_t>(t)] += static_cast<double>(g.length(z));
    }
    ++counts[z];
  }
  double tr = static_cast<double>(trials);
  if (per_step)
    for (double& v : st.mean_length) v /= tr;
  std::vector<SparseMeasure::Atom> atoms;
  atoms.reserve(counts.size());
  for (const auto& [x, c] : counts) atoms.emplace_back(x, static_cast<double>(c) / tr);
  st.empirical = SparseMeasure::from_atoms(std::move(atoms));
  st.return_frequency = st.empirical.weight(g.identity());
  return st;
}

}  // namespace gwalk
