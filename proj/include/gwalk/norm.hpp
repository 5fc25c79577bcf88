#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gwalk/algebra.hpp"
#include "gwalk/free_subgroup.hpp"

namespace gwalk {

struct NormBudget {
  int max_moment = 40;                  // moment depth m for trace((a*a)^m)
  std::size_t support_cap = 400'000;    // explicit powers stop once a power exceeds this many terms
  bool schur = true;                    // Schur-test upper bound on free factors
  int character_grid = 512;             // characters sampled per dimension on abelian quotients

  void validate() const;
};

/// trace((a*a)^k) for k = 1..depth together with absolute roundoff bounds.
struct MomentSequence {
  std::vector<double> moments;  // moments[k-1] = trace((a*a)^k)
  std::vector<double> errors;
  std::string method;
};

MomentSequence trace_moments(const Group& g, const AlgebraElement& a, int depth, const NormBudget& budget = {});

/// Certified lower bounds on ||a|| in C_r(G), one per moment depth k = 1..m.
/// Each value is the best of (trace((a*a)^j))^{1/2j} and (trace((a*a)^j) / trace((a*a)^{j-1}))^{1/2}
/// over j <= k, so the sequence is nondecreasing.
struct LowerBoundSequence {
  std::vector<double> values;
  int exact_depth = 0;  // depth actually reached; later entries repeat the last value
  std::string method;
};

LowerBoundSequence norm_lower_bound(const Group& g, const AlgebraElement& a, int m, const NormBudget& budget = {});

/// min over k <= m of (||(a*a)^k||_1)^{1/2k}, together with ||a||_1.
double norm_upper_bound(const Group& g, const AlgebraElement& a, int m, const NormBudget& budget = {});

/// Schur-test bound for elements of groups with a free factor (infinity otherwise).
double schur_upper_bound(const Group& g, const AlgebraElement& a);

enum class NormVerdict { CertifiedBelow, CertifiedAbove, Undecided };
std::string to_string(NormVerdict v);

struct NormEstimate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::string lower_method;
  std::string upper_method;

  NormVerdict classify(double threshold) const {
    if (upper < threshold) return NormVerdict::CertifiedBelow;
    if (lower > threshold) return NormVerdict::CertifiedAbove;
    return NormVerdict::Undecided;
  }
};

/// Best certified interval for ||a|| under the budget, including the element's own l1 ledger.
NormEstimate estimate_norm(const Group& g, const AlgebraElement& a, const NormBudget& budget = {});

// Free-group building blocks, exposed for testing.
namespace freegroup {

/// Moments of a nearest-neighbour element (every word has length <= 1) via first-passage series.
MomentSequence nearest_neighbour_moments(const WordPoly& x, int depth);
/// Moments by explicit powers; stops early (shorter result) once support exceeds cap.
MomentSequence explicit_moments(const WordPoly& x, int depth, std::size_t cap);
/// Schur test with letter weights optimized over a few families.
double schur_bound(const WordPoly& x);
/// Schur bound for fixed letter weights r[l-1] in (0,1].
double schur_bound_with_weights(const WordPoly& x, const std::vector<double>& r);

}  // namespace freegroup

}  // namespace gwalk
