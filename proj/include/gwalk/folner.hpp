#pragma once

#include <optional>
#include <string>

#include "gwalk/group.hpp"

namespace gwalk {

enum class WitnessKind {
  WholeGroup,     // H = G, G amenable
  CentralFactor,  // H = {e} x Z/m inside F_k x Z/m
  Trivial,        // H = {e}
  Lamps,          // H = finitely supported lamp configurations at position 0
};

/// An amenable subgroup H of a catalog group: membership test plus a Følner oracle.
class AmenableWitness {
 public:
  AmenableWitness(const Group& g, WitnessKind kind);

  /// Parses "whole", "central", "trivial", "lamps".
  static AmenableWitness from_name(const Group& g, const std::string& name);

  const Group& group() const { return group_; }
  WitnessKind kind() const { return kind_; }
  std::string name() const;

  bool contains(const Element& x) const;
  bool is_finite() const;
  /// Full listing of H when it is finite.
  std::optional<ElementSet> finite_listing() const;

  /// Finite symmetric F ⊆ H containing e with |RF \ F| < eps |F|.
  /// Candidates grow until the defect check passes; throws ResourceError once a
  /// candidate would exceed `budget` elements.
  ElementSet folner_set(const ElementSet& r, double eps, std::size_t budget = 2'000'000) const;

 private:
  ElementSet candidate(int radius) const;
  std::size_t candidate_size(int radius) const;

  Group group_;
  WitnessKind kind_;
};

/// For each q in `qs`, whether S^q meets H. Returns the first failing q if any.
std::optional<Element> visibility_violation(const AmenableWitness& w, const ElementSet& s, const ElementSet& qs);

}  // namespace gwalk
