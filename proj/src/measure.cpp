#include "gwalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace gwalk {

void TruncationPolicy::validate() const {
  if (!(floor >= 0)) throw UsageError("truncation floor must be >= 0");
  if (cap < 1) throw UsageError("support cap must be >= 1");
}

SparseMeasure SparseMeasure::from_atoms(std::vector<Atom> atoms, double dropped) {
  if (!(dropped >= 0)) throw UsageError("dropped mass must be nonnegative");
  for (const auto& a : atoms)
    if (!(a.second >= 0) || !std::isfinite(a.second)) throw UsageError("measure weights must be finite and >= 0");
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.first < y.first; });
  SparseMeasure m;
  m.dropped_ = dropped;
  for (auto& a : atoms) {
    if (!m.atoms_.empty() && m.atoms_.back().first == a.first) {
      m.atoms_.back().second += a.second;
    } else {
      m.atoms_.push_back(std::move(a));
    }
  }
  std::erase_if(m.atoms_, [](const Atom& a) { return a.second == 0.0; });
  return m;
}

double SparseMeasure::mass() const {
  double s = 0;
  for (const auto& a : atoms_) s += a.second;
  return s;
}

double SparseMeasure::weight(const Element& g) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), g,
                             [](const Atom& a, const Element& x) { return a.first < x; });
  return it != atoms_.end() && it->first == g ? it->second : 0.0;
}

ElementSet SparseMeasure::support() const {
  ElementSet s;
  s.reserve(atoms_.size());
  for (const auto& a : atoms_) s.push_back(a.first);
  return s;
}

SparseMeasure dirac(const Element& g) { return SparseMeasure::from_atoms({{g, 1.0}}); }

SparseMeasure uniform_on(const ElementSet& f) {
  if (f.empty()) throw UsageError("uniform_on requires a nonempty set");
  std::vector<SparseMeasure::Atom> atoms;
  double w = 1.0 / static_cast<double>(f.size());
  for (const auto& x : f) atoms.emplace_back(x, w);
  return SparseMeasure::from_atoms(std::move(atoms));
}

namespace {

using Accumulator = std::unordered_map<Element, double, ElementHash>;

SparseMeasure finish(Accumulator&& acc, double dropped, const TruncationPolicy& policy) {
  std::vector<SparseMeasure::Atom> atoms;
  atoms.reserve(acc.size());
  double lost = 0;
  for (auto& [x, w] : acc) {
    if (w < policy.floor || w <= 0) {
      lost += w > 0 ? w : 0;
    } else {
      atoms.emplace_back(x, w);
    }
  }
  if (atoms.size() > policy.cap)
    throw ResourceError("convolution support " + std::to_string(atoms.size()) + " exceeds cap " +
                            std::to_string(policy.cap),
                        atoms.size());
  // sort first so the ledger sum does not depend on hash order
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return SparseMeasure::from_atoms(std::move(atoms), dropped + lost);
}

}  // namespace

SparseMeasure convolve(const Group& g, const SparseMeasure& mu, const SparseMeasure& nu,
                       const TruncationPolicy& policy) {
  Accumulator acc;
  acc.reserve(std::min<std::size_t>(mu.size() * nu.size(), policy.cap * 2 + 16));
  for (const auto& [h, wh] : mu.atoms())
    for (const auto& [k, wk] : nu.atoms()) acc[g.multiply(h, k)] += wh * wk;
  // ledger: the dropped parts of each factor, each weighted by at most the other's total mass (<= 1)
  return finish(std::move(acc), mu.dropped() + nu.dropped(), policy);
}

SparseMeasure convolution_power(const Group& g, const SparseMeasure& nu, int n, const TruncationPolicy& policy) {
  if (n < 0) throw UsageError("convolution power must be >= 0");
  SparseMeasure acc = dirac(g.identity());
  for (int i = 0; i < n; ++i) acc = convolve(g, acc, nu, policy);
  return acc;
}

namespace {

template <class F>
SparseMeasure pushforward(const SparseMeasure& mu, F&& f) {
  std::vector<SparseMeasure::Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& [x, w] : mu.atoms()) atoms.emplace_back(f(x), w);
  return SparseMeasure::from_atoms(std::move(atoms), mu.dropped());
}

}  // namespace

SparseMeasure translate_left(const Group& g, const Element& s, const SparseMeasure& mu) {
  return pushforward(mu, [&](const Element& x) { return g.multiply(s, x); });
}

SparseMeasure invert(const Group& g, const SparseMeasure& mu) {
  return pushforward(mu, [&](const Element& x) { return g.inverse(x); });
}

SparseMeasure conjugate_measure(const Group& g, const SparseMeasure& mu, const Element& q) {
  Element qi = g.inverse(q);
  return pushforward(mu, [&](const Element& x) { return g.multiply(g.multiply(qi, x), q); });
}

TVDistance tv_distance(const SparseMeasure& mu, const SparseMeasure& nu) {
  if (!mu.empty() && !nu.empty() && mu.atoms().front().first.tag() != nu.atoms().front().first.tag())
    throw UsageError("tv_distance operands belong to different groups");
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  double s = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      s += a[i++].second;
    } else if (i == a.size() || b[j].first < a[i].first) {
      s += b[j++].second;
    } else {
      s += std::abs(a[i++].second - b[j++].second);
    }
  }
  return {s, mu.dropped() + nu.dropped()};
}

SparseMeasure convex_combine(const std::vector<double>& weights, const std::vector<SparseMeasure>& measures) {
  if (weights.size() != measures.size()) throw UsageError("convex_combine: weights and measures differ in length");
  double total = 0, dropped = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw UsageError("convex_combine: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw UsageError("convex_combine: weights sum to " + std::to_string(total));
  std::vector<SparseMeasure::Atom> atoms;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0) continue;
    dropped += weights[i] * measures[i].dropped();
    for (const auto& [x, w] : measures[i].atoms()) atoms.emplace_back(x, weights[i] * w);
  }
  return SparseMeasure::from_atoms(std::move(atoms), dropped);
}

bool is_symmetric(const Group& g, const SparseMeasure& mu, double tol) {
  for (const auto& [x, w] : mu.atoms())
    if (std::abs(mu.weight(g.inverse(x)) - w) > tol) return false;
  return true;
}

Sampler::Sampler(const SparseMeasure& mu) {
  if (mu.empty()) throw UsageError("cannot sample from an empty measure");
  if (mu.dropped() >= 1e-9)
    throw UsageError("cannot sample from a truncated measure (dropped mass " + std::to_string(mu.dropped()) + ")");
  double s = 0;
  for (const auto& [x, w] : mu.atoms()) {
    s += w;
    elements_.push_back(x);
    cumulative_.push_back(s);
  }
}

const Element& Sampler::operator()(std::mt19937_64& rng) const {
  double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), elements_.size() - 1);
  return elements_[k];
}

Element sample(const SparseMeasure& mu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Sampler(mu)(rng);
}

void write_measure(std::ostream& os, const Group& g, const SparseMeasure& mu) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", mu.dropped());
  os << "# group " << g.name() << "\n# dropped_mass " << buf << "\n";
  for (const auto& [x, w] : mu.atoms()) {
    std::snprintf(buf, sizeof buf, "%.17g", w);
    os << g.format(x) << ' ' << buf << '\n';
  }
}

SparseMeasure read_measure(std::istream& is, const Group& g, const std::string& source) {
  std::vector<SparseMeasure::Atom> atoms;
  double dropped = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string key = "# dropped_mass ";
      if (line.compare(first, key.size(), key) == 0) {
        try {
          dropped = std::stod(line.substr(first + key.size()));
        } catch (const std::exception&) {
          throw UsageError(where() + "bad dropped_mass");
        }
      }
      continue;
    }
    auto last = line.find_last_not_of(" \t\r");
    auto split = line.find_last_of(" \t", last);
    if (split == std::string::npos || split < first) throw UsageError(where() + "expected 'element weight'");
    std::string wtext = line.substr(split + 1, last - split);
    double w = 0;
    try {
      std::size_t used = 0;
      w = std::stod(wtext, &used);
      if (used != wtext.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError(where() + "bad weight '" + wtext + "'");
    }
    if (!(w >= 0) || !std::isfinite(w)) throw UsageError(where() + "weight must be finite and >= 0");
    try {
      atoms.emplace_back(g.parse(std::string_view(line).substr(first, split - first)), w);
    } catch (const UsageError& e) {
      throw UsageError(where() + e.what());
    }
  }
  return SparseMeasure::from_atoms(std::move(atoms), dropped);
}

}  // namespace gwalk
