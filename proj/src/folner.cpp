#include "gwalk/folner.hpp"

#include <algorithm>
#include <cmath>

namespace gwalk {

AmenableWitness::AmenableWitness(const Group& g, WitnessKind kind) : group_(g), kind_(kind) {
  switch (kind) {
    case WitnessKind::WholeGroup:
      if (!g.is_amenable()) throw UsageError("whole-group witness requires an amenable group, got " + g.name());
      break;
    case WitnessKind::CentralFactor:
      if (g.kind() != GroupKind::FreeTimesCyclic)
        throw UsageError("central witness requires F_k x Z/m, got " + g.name());
      break;
    case WitnessKind::Lamps:
      if (g.kind() != GroupKind::Lamplighter) throw UsageError("lamps witness requires the lamplighter");
      break;
    case WitnessKind::Trivial: break;
  }
}

AmenableWitness AmenableWitness::from_name(const Group& g, const std::string& name) {
  if (name == "whole") return {g, WitnessKind::WholeGroup};
  if (name == "central") return {g, WitnessKind::CentralFactor};
  if (name == "trivial") return {g, WitnessKind::Trivial};
  if (name == "lamps") return {g, WitnessKind::Lamps};
  throw UsageError("unknown witness '" + name + "' (expected whole, central, trivial, lamps)");
}

std::string AmenableWitness::name() const {
  switch (kind_) {
    case WitnessKind::WholeGroup: return "whole";
    case WitnessKind::CentralFactor: return "central";
    case WitnessKind::Trivial: return "trivial";
    case WitnessKind::Lamps: return "lamps";
  }
  return "?";
}

bool AmenableWitness::contains(const Element& x) const {
  if (!group_.owns(x)) return false;
  switch (kind_) {
    case WitnessKind::WholeGroup: return true;
    case WitnessKind::CentralFactor: return group_.free_letters(x).empty();
    case WitnessKind::Trivial: return group_.is_identity(x);
    case WitnessKind::Lamps: return x.code()[0] == 0;
  }
  return false;
}

bool AmenableWitness::is_finite() const {
  return kind_ == WitnessKind::CentralFactor || kind_ == WitnessKind::Trivial ||
         (kind_ == WitnessKind::WholeGroup && group_.kind() == GroupKind::Cyclic);
}

std::optional<ElementSet> AmenableWitness::finite_listing() const {
  if (!is_finite()) return std::nullopt;
  ElementSet out;
  if (kind_ == WitnessKind::Trivial) {
    out.push_back(group_.identity());
  } else {
    for (int c = 0; c < group_.modulus(); ++c) out.push_back(group_.residue(c));
  }
  normalize(out);
  return out;
}

namespace {

// Number of lamp configurations inside [-3r, 3r] whose support spans at most 4r sites.
double lamp_window_count(int r) {
  double count = 1;  // empty configuration
  int lo = -3 * r, hi = 3 * r;
  for (int a = lo; a <= hi; ++a)
    for (int b = a; b <= hi && b - a <= 4 * r; ++b) count += b == a ? 1.0 : std::ldexp(1.0, b - a - 1);
  return count;
}

}  // namespace

std::size_t AmenableWitness::candidate_size(int radius) const {
  double n = 0;
  switch (kind_) {
    case WitnessKind::WholeGroup:
      switch (group_.kind()) {
        case GroupKind::Integers: n = 2.0 * radius + 1; break;
        case GroupKind::Lattice: n = std::pow(2.0 * radius + 1, group_.dim()); break;
        case GroupKind::Lamplighter: n = 2 * (2.0 * radius + 1) * lamp_window_count(radius); break;
        default: n = 0; break;
      }
      break;
    case WitnessKind::Lamps: n = std::ldexp(1.0, 2 * radius + 1); break;
    default: n = 0; break;
  }
  return n > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(n);
}

ElementSet AmenableWitness::candidate(int r) const {
  ElementSet out;
  const Group& g = group_;
  switch (kind_) {
    case WitnessKind::Lamps:
      for (std::uint64_t mask = 0; mask < (1ULL << (2 * r + 1)); ++mask) {
        std::vector<std::int32_t> lamps;
        for (int b = 0; b <= 2 * r; ++b)
          if (mask >> b & 1) lamps.push_back(b - r);
        out.push_back(g.lamplighter_element(std::move(lamps), 0));
      }
      break;
    case WitnessKind::WholeGroup:
      if (g.kind() == GroupKind::Integers) {
        for (int x = -r; x <= r; ++x) out.push_back(g.integer(x));
      } else if (g.kind() == GroupKind::Lattice) {
        std::vector<std::int32_t> p(g.dim(), -r);
        while (true) {
          out.push_back(g.lattice_point(p));
          int i = 0;
          while (i < g.dim() && p[i] == r) p[i++] = -r;
          if (i == g.dim()) break;
          ++p[i];
        }
      } else if (g.kind() == GroupKind::Lamplighter) {
        // U = {(f,p): |p| <= r, supp f inside a window [c-2r, c+2r] with |c| <= r}; F = U ∪ U^-1
        int width = 6 * r + 1;
        std::vector<std::vector<std::int32_t>> configs;
        for (std::uint64_t mask = 0; mask < (1ULL << width); ++mask) {
          if (mask) {
            int lo = __builtin_ctzll(mask), hi = 63 - __builtin_clzll(mask);
            if (hi - lo > 4 * r) continue;
          }
          std::vector<std::int32_t> lamps;
          for (int b = 0; b < width; ++b)
            if (mask >> b & 1) lamps.push_back(b - 3 * r);
          configs.push_back(std::move(lamps));
        }
        for (const auto& f : configs)
          for (int p = -r; p <= r; ++p) {
            Element x = g.lamplighter_element(f, p);
            out.push_back(g.inverse(x));
            out.push_back(std::move(x));
          }
      }
      break;
    default: break;
  }
  normalize(out);
  return out;
}

ElementSet AmenableWitness::folner_set(const ElementSet& r, double eps, std::size_t budget) const {
  if (!(eps > 0)) throw UsageError("Folner eps must be positive");
  for (const auto& x : r)
    if (!contains(x)) throw UsageError("Folner request contains " + group_.format(x) + " outside H");
  if (auto listing = finite_listing()) return *listing;

  // Lamplighter windows grow exponentially in r, so step linearly there; elsewhere double.
  bool linear = kind_ == WitnessKind::WholeGroup && group_.kind() == GroupKind::Lamplighter;
  int radius = 1;
  if (kind_ == WitnessKind::Lamps) {
    // the lamps subgroup is locally finite: cover R and the defect is zero
    for (const auto& x : r)
      for (std::size_t i = 1; i < x.code().size(); ++i) radius = std::max(radius, std::abs(x.code()[i]));
  }
  while (true) {
    std::size_t size = candidate_size(radius);
    if (size > budget)
      throw ResourceError("Folner oracle for " + name() + " in " + group_.name() + " exceeded budget " +
                              std::to_string(budget) + " at radius " + std::to_string(radius),
                          size);
    ElementSet f = candidate(radius);
    if (folner_invariance_check(group_, f, r, eps).passes) return f;
    radius = linear ? radius + 1 : radius * 2;
  }
}

std::optional<Element> visibility_violation(const AmenableWitness& w, const ElementSet& s, const ElementSet& qs) {
  const Group& g = w.group();
  for (const auto& q : qs) {
    bool hit = false;
    for (const auto& x : s)
      if (w.contains(g.conjugate(x, q))) {
        hit = true;
        break;
      }
    if (!hit) return q;
  }
  return std::nullopt;
}

}  // namespace gwalk
