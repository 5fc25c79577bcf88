#include "gwalk/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwalk {

// ---------------------------------------------------------------- probability vectors

ProbabilityVector ProbabilityVector::explicit_entries(std::vector<double> entries) {
  double s = 0;
  for (double v : entries) {
    if (!(v >= 0) || !std::isfinite(v)) throw UsageError("probability vector entries must be finite and >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw UsageError("probability vector sums to " + std::to_string(s));
  ProbabilityVector p;
  p.head_ = entries;
  p.entries_ = std::move(entries);
  return p;
}

double ProbabilityVector::mass_beyond(std::size_t depth) const {
  double s = 0;
  for (std::size_t i = entries_.size(); i-- > depth + 1;) s += entries_[i];
  return s;
}

std::size_t ProbabilityVector::positive_count() const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](double v) { return v > 0; }));
}

ProbabilityVector power_law_vector(double alpha, std::vector<double> head, double tail_mass, std::size_t tail_len) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw UsageError("power-law exponent alpha must lie in (1,2)");
  if (!(tail_mass >= 0) || tail_mass > 1) throw UsageError("tail mass must lie in [0,1]");
  double s = tail_mass;
  for (double v : head) {
    if (!(v >= 0) || !std::isfinite(v)) throw UsageError("head weights must be finite and >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw UsageError("head sum + tail mass must equal 1, got " + std::to_string(s));
  if (tail_mass > 0 && tail_len == 0) throw UsageError("a positive tail mass needs tail_len >= 1");

  ProbabilityVector p;
  p.alpha_ = alpha;
  p.head_ = head;
  p.tail_mass_ = tail_mass;
  p.tail_len_ = tail_mass > 0 ? tail_len : 0;
  p.entries_ = std::move(head);
  if (p.tail_len_ > 0) {
    double h = 0;
    for (std::size_t j = p.tail_len_; j >= 1; --j) h += std::pow(static_cast<double>(j), -alpha);
    for (std::size_t j = 1; j <= p.tail_len_; ++j)
      p.entries_.push_back(tail_mass * std::pow(static_cast<double>(j), -alpha) / h);
  }
  return p;
}

// ---------------------------------------------------------------- finitary decomposition

std::vector<SparseMeasure> finitary_decompose(const SparseMeasure& nu_prime, const ProbabilityVector& upsilon) {
  if (nu_prime.empty()) throw UsageError("finitary_decompose: empty measure");
  double total = nu_prime.mass();
  if (std::abs(total + nu_prime.dropped() - 1.0) > 1e-9)
    throw UsageError("finitary_decompose: nu' must be a probability measure");
  if (upsilon.positive_count() < 2)
    throw UsageError("finitary_decompose: the probability vector needs at least two positive entries");

  const auto& atoms = nu_prime.atoms();
  std::vector<SparseMeasure> out(upsilon.size());
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < upsilon.size(); ++i)
    if (upsilon[i] > 0) last_positive = i;

  std::size_t j = 0;
  double rem = atoms[0].second;
  for (std::size_t i = 0; i < upsilon.size(); ++i) {
    double u = upsilon[i];
    if (u == 0) {
      out[i] = nu_prime;
      continue;
    }
    double need = i == last_positive ? std::numeric_limits<double>::infinity() : u * total;
    std::vector<SparseMeasure::Atom> part;
    while (need > 0 && j < atoms.size()) {
      if (rem <= need) {
        part.emplace_back(atoms[j].first, rem);
        need -= rem;
        if (++j < atoms.size()) rem = atoms[j].second;
      } else {
        part.emplace_back(atoms[j].first, need);
        rem -= need;
        need = 0;
      }
    }
    if (part.empty()) part.emplace_back(atoms[std::min(j, atoms.size() - 1)].first, total);
    double s = 0;
    for (const auto& a : part) s += a.second;
    for (auto& a : part) a.second *= total / s;
    out[i] = SparseMeasure::from_atoms(std::move(part), nu_prime.dropped());
  }
  return out;
}

// ---------------------------------------------------------------- non-free construction

ConjugatedIntersection conjugated_intersection(const Group& g, const ElementSet& s, const ElementSet& q,
                                               const AmenableWitness& w) {
  ConjugatedIntersection out;
  for (const auto& x : q) {
    bool hit = false;
    for (const auto& y : s) {
      Element c = g.conjugate(y, x);
      if (w.contains(c)) {
        out.hits.push_back(std::move(c));
        hit = true;
      }
    }
    if (!hit) out.failures.push_back(x);
  }
  normalize(out.hits);
  return out;
}

void NonFreeRecipe::validate() const {
  if (s.empty()) throw UsageError("non-free recipe: S must be nonempty");
  for (const auto& x : s) group.require_owned(x);
  if (!(theta > 0 && theta < 1)) throw UsageError("non-free recipe: theta must lie in (0,1)");
  if (depth < 1) throw UsageError("non-free recipe: depth must be >= 1");
  if (upsilon.size() == 0) throw UsageError("non-free recipe: empty probability vector");
  if (upsilon[0] != 0) throw UsageError("non-free recipe: upsilon_0 must be 0 (the construction starts at index 1)");
  if (base.empty()) throw UsageError("non-free recipe: base measure nu' is empty");
  if (visibility_radius < 0) throw UsageError("non-free recipe: visibility_radius must be >= 0");
  if (depth + radius_offset < 1) throw UsageError("non-free recipe: radius_offset too small");
}

NonFreeResult build_nonfree_measure(const NonFreeRecipe& recipe) {
  recipe.validate();
  const Group& g = recipe.group;
  AmenableWitness w(g, recipe.witness);

  if (auto bad = visibility_violation(w, recipe.s, ball(g, recipe.visibility_radius, recipe.ball_cap)))
    throw UsageError("S is not visible from H = " + w.name() + ": S^q misses H for q = " + g.format(*bad));

  NonFreeResult res;
  res.parts = finitary_decompose(recipe.base, recipe.upsilon);
  auto enumeration = enumerate_elements(g, static_cast<std::size_t>(recipe.depth));

  ElementSet a;  // A_0 = empty
  std::vector<SparseMeasure::Atom> second;
  for (int i = 1; i <= recipe.depth; ++i) {
    NonFreeStage st;
    st.index = i;
    st.c = enumeration[static_cast<std::size_t>(i - 1) % enumeration.size()];
    ElementSet q = word_ball(g, a, i + recipe.radius_offset, recipe.ball_cap);
    st.q_size = q.size();
    auto ci = conjugated_intersection(g, recipe.s, q, w);
    if (!ci.failures.empty())
      throw UsageError("S^q misses H = " + w.name() + " for q = " + g.format(ci.failures.front()));
    st.r = std::move(ci.hits);
    st.eps = 1.0 / i;
    st.f = st.r.empty() ? ElementSet{g.identity()} : w.folner_set(st.r, st.eps, recipe.folner_budget);
    auto defect = folner_invariance_check(g, st.f, st.r, st.eps);
    if (!defect.passes) throw std::logic_error("Folner oracle returned a set failing the invariance check");
    st.defect = defect.ratio;

    a.push_back(st.c);
    a.push_back(g.inverse(st.c));
    const SparseMeasure& part = static_cast<std::size_t>(i) < res.parts.size() ? res.parts[i] : recipe.base;
    for (const auto& [x, wx] : part.atoms()) {
      a.push_back(x);
      a.push_back(g.inverse(x));
    }
    normalize(a);
    st.a = a;

    double u = recipe.upsilon[static_cast<std::size_t>(i)] / 3.0;
    if (u > 0) {
      second.emplace_back(st.c, u);
      second.emplace_back(g.inverse(st.c), u);
      double fw = u / static_cast<double>(st.f.size());
      for (const auto& x : st.f) second.emplace_back(x, fw);
    }
    res.stages.push_back(std::move(st));
  }

  double residual = recipe.upsilon.mass_beyond(static_cast<std::size_t>(recipe.depth));
  res.nu_second = SparseMeasure::from_atoms(second, residual);
  res.residual = recipe.theta * residual;

  std::vector<SparseMeasure::Atom> atoms;
  for (const auto& [x, wx] : res.nu_second.atoms()) atoms.emplace_back(x, recipe.theta * wx);
  for (const auto& [x, wx] : recipe.base.atoms()) atoms.emplace_back(x, (1 - recipe.theta) * wx);
  res.nu = SparseMeasure::from_atoms(std::move(atoms),
                                     res.residual + (1 - recipe.theta) * recipe.base.dropped());
  return res;
}

// ---------------------------------------------------------------- Powers averaging

namespace {

std::vector<Element> conjugator_candidates(const Group& g, const PowersOptions& opt) {
  if (opt.conjugator) return {*opt.conjugator};
  std::vector<std::int32_t> all;
  for (std::int32_t l = 1; l <= g.rank(); ++l) all.push_back(l);
  std::vector<Element> out{g.word(all)};
  for (std::int32_t l = 1; l <= g.rank(); ++l) {
    std::int32_t one[1] = {l};
    out.push_back(g.word(one));
  }
  return out;
}

SparseMeasure power_family(const Group& g, const Element& w, int m) {
  std::vector<SparseMeasure::Atom> atoms;
  Element p = g.identity();
  for (int k = 1; k <= m; ++k) {
    p = g.multiply(p, w);
    atoms.emplace_back(p, 1.0 / m);
  }
  return SparseMeasure::from_atoms(std::move(atoms));
}

}  // namespace

PowersResult powers_search(const Group& g, const std::vector<AlgebraElement>& targets, double eps,
                           const PowersOptions& options) {
  if (g.kind() != GroupKind::Free) throw UsageError("powers_search requires a free group, got " + g.name());
  if (!(eps > 0)) throw UsageError("powers_search: eps must be positive");
  if (options.max_m < 2) throw UsageError("powers_search: max_m must be >= 2");
  TruncationPolicy exact{0.0, 50'000'000};
  auto candidates = conjugator_candidates(g, options);

  PowersResult res;
  res.nu = dirac(g.identity());
  for (const auto& a : targets) {
    double l1 = a.l1_norm();
    if (std::abs(trace(g, a)) > 1e-12 * std::max(1.0, l1))
      throw UsageError("powers_search: targets must have trace 0");
    PowersRecord rec;
    rec.target = a;
    AlgebraElement x = averaged_conjugation(g, a, res.nu);
    rec.before = estimate_norm(g, x, options.budget);
    if (rec.before.upper < eps) {
      rec.after = rec.before;
      res.records.push_back(std::move(rec));
      continue;
    }
    // a conjugator that moves the support; with more than one generator one always exists
    const Element* w = nullptr;
    for (const auto& c : candidates) {
      bool moves = false;
      for (const auto& [y, cy] : x.terms())
        if (g.conjugate(y, c) != y) {
          moves = true;
          break;
        }
      if (moves) {
        w = &c;
        break;
      }
    }
    if (!w) throw UsageError("powers_search: no candidate conjugator moves the target support");
    rec.conjugator = g.format(*w);
    double best = rec.before.upper;
    int m = 2;
    while (true) {
      SparseMeasure mu = power_family(g, *w, m);
      NormEstimate est = estimate_norm(g, averaged_conjugation(g, x, mu), options.budget);
      best = std::min(best, est.upper);
      if (est.upper < eps) {
        rec.after = est;
        rec.m = m;
        res.nu = convolve(g, res.nu, mu, exact);
        res.stages.push_back(std::move(mu));
        break;
      }
      if (m >= options.max_m)
        throw ResourceError("powers_search: no certified bound below " + std::to_string(eps) + " up to m = " +
                                std::to_string(m) + "; best upper bound " + std::to_string(best),
                            static_cast<std::size_t>(m));
      m = std::min(2 * m, options.max_m);
    }
    res.records.push_back(std::move(rec));
  }
  if (options.symmetrize) res.nu = convolve(g, res.nu, invert(g, res.nu), exact);
  return res;
}

std::vector<AlgebraElement> dense_test_sequence(const Group& g, std::size_t count) {
  std::vector<AlgebraElement> out;
  if (count == 0) return out;
  std::vector<Element> c{g.identity()};
  for (std::size_t n = 2; out.size() < count; ++n) {
    c = enumerate_elements(g, n);
    if (c.size() < n) break;  // finite group exhausted
    out.push_back(AlgebraElement::basis(c[n - 1]));
    for (std::size_t p = 2; p < n && out.size() < count; ++p)
      out.push_back(AlgebraElement::from_terms({{c[p - 1], 0.5}, {c[n - 1], -0.5}}));
  }
  if (out.size() > count) out.resize(count);
  return out;
}

// ---------------------------------------------------------------- HK construction

void HKRecipe::validate() const {
  if (group.kind() != GroupKind::Free) throw UsageError("HK recipe: the group must be free, got " + group.name());
  if (!(delta > 0 && delta < 1)) throw UsageError("HK recipe: delta must lie in (0,1)");
  if (std::abs(upsilon[0] - (1 - delta)) > 1e-12) throw UsageError("HK recipe: upsilon_0 must equal 1 - delta");
  if (depth < 1) throw UsageError("HK recipe: depth must be >= 1");
  if (mu0.empty()) throw UsageError("HK recipe: mu0 is empty");
  if (std::abs(mu0.mass() + mu0.dropped() - 1) > 1e-9) throw UsageError("HK recipe: mu0 must be a probability measure");
  if (!(stage_eps > 0)) throw UsageError("HK recipe: stage_eps must be positive");
  if (!(anchor_weight >= 0 && anchor_weight < 0.25)) throw UsageError("HK recipe: anchor_weight must lie in [0, 0.25)");
  for (const auto& [x, w] : mu0.atoms()) group.require_owned(x);
}

HKResult build_hk_measure(const HKRecipe& recipe) {
  recipe.validate();
  const Group& g = recipe.group;
  auto c = enumerate_elements(g, static_cast<std::size_t>(recipe.depth));
  auto d = dense_test_sequence(g, static_cast<std::size_t>(std::max(recipe.depth - 1, 0)));

  HKResult res;
  res.components.push_back(recipe.mu0);
  res.weights.push_back(recipe.upsilon[0]);
  res.mixture.emplace_back(recipe.upsilon[0], recipe.mu0);
  ElementSet a = recipe.mu0.support();
  double wgt = recipe.anchor_weight;

  for (int i = 1; i <= recipe.depth; ++i) {
    HKStage st;
    st.index = i;
    st.c = c[static_cast<std::size_t>(i - 1)];
    std::vector<AlgebraElement> targets;
    if (i > 1) {
      ElementSet q = word_ball(g, a, i);
      if (q.size() * static_cast<std::size_t>(i - 1) > recipe.max_targets)
        throw ResourceError("HK stage " + std::to_string(i) + " needs " +
                                std::to_string(q.size() * static_cast<std::size_t>(i - 1)) + " targets (cap " +
                                std::to_string(recipe.max_targets) + ")",
                            q.size() * static_cast<std::size_t>(i - 1));
      for (int j = 1; j < i; ++j)
        for (const auto& x : q) targets.push_back(conjugate_action(g, d[static_cast<std::size_t>(j - 1)], x));
    }
    st.target_count = targets.size();
    double l_max = 0;
    for (const auto& t : targets) l_max = std::max(l_max, t.l1_norm());
    st.search_eps = (recipe.stage_eps - 2 * wgt * l_max) / (1 - 2 * wgt);
    if (!(st.search_eps > 0)) throw UsageError("HK recipe: anchor weight leaves no room below stage_eps");

    PowersResult pr = powers_search(g, targets, st.search_eps, recipe.powers);
    std::vector<SparseMeasure::Atom> atoms;
    for (const auto& [x, w] : pr.nu.atoms()) atoms.emplace_back(x, (1 - 2 * wgt) * w);
    atoms.emplace_back(st.c, wgt);
    atoms.emplace_back(g.inverse(st.c), wgt);
    st.mu = SparseMeasure::from_atoms(std::move(atoms));
    for (std::size_t k = 0; k < pr.records.size(); ++k) {
      double bound = (1 - 2 * wgt) * pr.records[k].after.upper + 2 * wgt * targets[k].l1_norm();
      st.worst_upper = std::max(st.worst_upper, bound);
    }
    st.records = std::move(pr.records);
    double ui = recipe.upsilon[static_cast<std::size_t>(i)];
    res.mixture.emplace_back(ui * (1 - 2 * wgt), pr.nu);
    if (wgt > 0) {
      res.mixture.emplace_back(ui * wgt, dirac(st.c));
      res.mixture.emplace_back(ui * wgt, dirac(g.inverse(st.c)));
    }
    for (const auto& x : st.mu.support()) a.push_back(x);
    normalize(a);
    res.components.push_back(st.mu);
    res.weights.push_back(recipe.upsilon[static_cast<std::size_t>(i)]);
    res.stages.push_back(std::move(st));
  }

  res.residual = recipe.upsilon.mass_beyond(static_cast<std::size_t>(recipe.depth));
  std::vector<SparseMeasure::Atom> atoms;
  double dropped = res.residual;
  for (std::size_t i = 0; i < res.components.size(); ++i) {
    dropped += res.weights[i] * res.components[i].dropped();
    for (const auto& [x, w] : res.components[i].atoms()) atoms.emplace_back(x, res.weights[i] * w);
  }
  res.nu = SparseMeasure::from_atoms(std::move(atoms), dropped);
  return res;
}

}  // namespace gwalk
