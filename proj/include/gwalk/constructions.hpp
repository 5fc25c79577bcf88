#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwalk/algebra.hpp"
#include "gwalk/folner.hpp"
#include "gwalk/measure.hpp"
#include "gwalk/norm.hpp"

namespace gwalk {

/// Finite realization of a probability vector: explicit head entries followed by a power-law tail.
/// Tail entry j (j = 1..tail_len) sits at index head.size() + j - 1 with weight
/// tail_mass * j^-alpha / sum_{k <= tail_len} k^-alpha.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  /// Explicit entries only; they must sum to 1.
  static ProbabilityVector explicit_entries(std::vector<double> entries);

  double alpha() const { return alpha_; }
  const std::vector<double>& head() const { return head_; }
  double tail_mass() const { return tail_mass_; }
  std::size_t tail_len() const { return tail_len_; }

  const std::vector<double>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return i < entries_.size() ? entries_[i] : 0.0; }
  /// Sum of entries with index > depth.
  double mass_beyond(std::size_t depth) const;
  std::size_t positive_count() const;

 private:
  friend ProbabilityVector power_law_vector(double, std::vector<double>, double, std::size_t);
  double alpha_ = 1.5;
  std::vector<double> head_;
  double tail_mass_ = 0.0;
  std::size_t tail_len_ = 0;
  std::vector<double> entries_;
};

ProbabilityVector power_law_vector(double alpha, std::vector<double> head, double tail_mass, std::size_t tail_len);

/// Measures nu'_i (one per realized index) with sum_i upsilon_i nu'_i = nu'. Entries with
/// upsilon_i = 0 get nu' itself. Mass is poured greedily in element order into buckets of size upsilon_i.
std::vector<SparseMeasure> finitary_decompose(const SparseMeasure& nu_prime, const ProbabilityVector& upsilon);

struct ConjugatedIntersection {
  ElementSet hits;                   // {s^q : s in S, q in Q} ∩ H
  std::vector<Element> failures;     // q with S^q ∩ H empty
};

ConjugatedIntersection conjugated_intersection(const Group& g, const ElementSet& s, const ElementSet& q,
                                               const AmenableWitness& w);

struct NonFreeRecipe {
  Group group;
  ElementSet s;
  WitnessKind witness = WitnessKind::WholeGroup;
  ProbabilityVector upsilon;
  SparseMeasure base;  // nu'
  double theta = 0.5;
  int depth = 1;
  int radius_offset = 0;       // Q_i = word_ball(A_{i-1}, i + radius_offset)
  int visibility_radius = 3;   // S^q ∩ H checked for q in the ball of this radius
  std::size_t folner_budget = 2'000'000;
  std::size_t ball_cap = 2'000'000;

  void validate() const;
};

struct NonFreeStage {
  int index = 0;
  Element c;
  std::size_t q_size = 0;
  ElementSet r;  // S^{Q_i} ∩ H
  ElementSet f;
  double defect = 0.0;
  double eps = 0.0;
  ElementSet a;  // A_i
};

struct NonFreeResult {
  SparseMeasure nu;
  SparseMeasure nu_second;  // nu'' restricted to the realized depth (sub-probability)
  std::vector<SparseMeasure> parts;  // nu'_i
  std::vector<NonFreeStage> stages;
  double residual = 0.0;  // vector mass beyond the depth, times theta
};

NonFreeResult build_nonfree_measure(const NonFreeRecipe& recipe);

struct PowersOptions {
  std::optional<Element> conjugator;  // default: product of the free generators
  int max_m = 4096;
  bool symmetrize = true;
  NormBudget budget;
};

struct PowersRecord {
  AlgebraElement target;
  NormEstimate before;
  NormEstimate after;
  int m = 0;  // 0 when the target was already below eps
  std::string conjugator;
};

struct PowersResult {
  SparseMeasure nu;
  std::vector<SparseMeasure> stages;  // convolution factors in order (before symmetrization)
  std::vector<PowersRecord> records;
  bool certified = true;
};

PowersResult powers_search(const Group& g, const std::vector<AlgebraElement>& targets, double eps,
                           const PowersOptions& options = {});

/// Dense test sequence in the unit ball of ker tau: for n = 2, 3, ...: 𝔞_{c_n}, then (𝔞_{c_p} - 𝔞_{c_n}) / 2 for 2 <= p < n.
std::vector<AlgebraElement> dense_test_sequence(const Group& g, std::size_t count);

struct HKRecipe {
  Group group = Group::free(2);
  SparseMeasure mu0;
  double delta = 0.5;
  ProbabilityVector upsilon;  // upsilon_0 = 1 - delta
  int depth = 2;
  double stage_eps = 0.25;
  double anchor_weight = 1e-3;
  std::size_t max_targets = 4096;
  PowersOptions powers;

  void validate() const;
};

struct HKStage {
  int index = 0;
  Element c;
  std::size_t target_count = 0;
  double search_eps = 0.0;
  double worst_upper = 0.0;  // max over targets of the certified bound for d^{g*mu_i}
  std::vector<PowersRecord> records;
  SparseMeasure mu;
};

struct HKResult {
  SparseMeasure nu;
  std::vector<SparseMeasure> components;  // mu_0 .. mu_depth
  std::vector<double> weights;            // upsilon_0 .. upsilon_depth
  std::vector<HKStage> stages;
  double residual = 0.0;
  /// Finer split of nu: mu_0, then per stage the Powers measure and the two anchor diracs.
  std::vector<std::pair<double, SparseMeasure>> mixture;
};

HKResult build_hk_measure(const HKRecipe& recipe);

}  // namespace gwalk
