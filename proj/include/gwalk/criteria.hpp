#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwalk/algebra.hpp"
#include "gwalk/constructions.hpp"
#include "gwalk/measure.hpp"
#include "gwalk/norm.hpp"

namespace gwalk {

enum class Verdict { Pass, Fail, Undecided };
std::string to_string(Verdict v);

// ---------------------------------------------------------------- NF_S test

/// 2 (1 - 1/(2|S|))
double nf_threshold(std::size_t s_size);

struct NFCell {
  int n = 0;
  std::size_t s_index = 0;  // minimizing s
  TVDistance tv;
  NormVerdict verdict = NormVerdict::Undecided;  // against the threshold
};

struct NFSeries {
  std::size_t sigma_index = 0;
  std::vector<NFCell> cells;       // n = 0, 1, ...
  std::optional<int> first_pass;   // first n with a certified value below threshold
  Verdict verdict = Verdict::Fail;
  bool monotone = true;
};

struct NFOptions {
  int n_max = 12;
  TruncationPolicy policy;
  bool stop_on_pass = true;  // stop a series at its first certified pass
};

struct NFReport {
  double threshold = 0.0;
  std::vector<NFSeries> series;
  Verdict verdict = Verdict::Fail;
  bool support_generates = false;  // every generator is a product of < 4 elements of supp nu ∪ supp nu^-1
};

/// Default dense family: diracs on the first `diracs` enumerated elements, then uniform measures on balls of radius 1..3.
std::vector<SparseMeasure> default_sigma_family(const Group& g, std::size_t diracs = 5, int max_radius = 3);

NFReport nf_check(const Group& g, const SparseMeasure& nu, const std::vector<SparseMeasure>& sigmas,
                  const ElementSet& s, const NFOptions& options = {});

struct TVProfile {
  std::vector<TVDistance> values;  // n = 0..n_max
  bool monotone = true;
  int violations = 0;           // increases beyond 2x the ledger error
  double worst_increase = 0.0;  // largest raw increase seen
  TVDistance limit;             // last value
};

TVProfile tv_decay_profile(const Group& g, const SparseMeasure& nu, const SparseMeasure& sigma, const Element& s,
                           int n_max, const TruncationPolicy& policy = {});

/// Least-squares slope of log tv against log n over n in [n_lo, n_hi].
double log_log_slope(const TVProfile& p, int n_lo, int n_hi);

// ---------------------------------------------------------------- HK test

struct HKCell {
  int n = 0;
  NormEstimate direct;  // from iterated truncated conjugation
  double tree_upper = std::numeric_limits<double>::infinity();  // mixture-tree bound when a mixture is given
  double upper = 0.0;   // best certified upper bound
  double lower = 0.0;
  std::size_t support = 0;
};

struct HKSeries {
  AlgebraElement test;
  std::vector<HKCell> cells;  // n = 0..
  std::optional<int> first_half;  // first n with upper < 1/2
  Verdict verdict = Verdict::Fail;
  /// With ||d^{nu^n}|| < 1/2 certified at n, ||d^{nu^{kn}}|| <= 2^-k for unit-ball d.
  std::optional<double> decay_rate_per_step;
};

struct HKOptions {
  int n_max = 50;
  NormBudget budget;
  double floor = 1e-15;
  std::size_t support_cap = 200'000;
  bool stop_at_half = true;
  /// nu = sum_j weight_j * component_j; enables the mixture-tree upper bound.
  std::vector<std::pair<double, SparseMeasure>> mixture;
  std::size_t tree_node_cap = 4096;
};

struct HKReport {
  std::vector<HKSeries> series;
  Verdict verdict = Verdict::Fail;
  std::vector<std::string> notes;
};

HKReport hk_check(const Group& g, const SparseMeasure& nu, const std::vector<AlgebraElement>& tests,
                  const HKOptions& options = {});

// ---------------------------------------------------------------- stopping-time decomposition

enum class DecompositionMode { Analytic, ExactSmallN, MonteCarlo };
DecompositionMode decomposition_mode_from_name(const std::string& name);
std::string to_string(DecompositionMode m);

struct DecompositionInput {
  Group group;
  ProbabilityVector upsilon;
  std::vector<SparseMeasure> zeta_prime;   // one per realized index
  std::vector<SparseMeasure> zeta_second;  // one per realized index
  std::vector<double> beta;                // one per realized index, in [0,1]
  int m = 1;
  double eps = 0.1;
  int n = 10;
  DecompositionMode mode = DecompositionMode::Analytic;
  std::size_t trials = 100'000;
  std::uint64_t seed = 1;
  int prefix_radius_offset = -1;  // q' checked against word_ball(A_{i-1}, i + offset)
  TruncationPolicy policy{0.0, 5'000'000};

  void validate() const;
};

struct DecompositionComponent {
  int t = 0;  // stopping step
  int i = 0;  // stopped index k_t
  double weight = 0.0;        // sum of alpha over (q', q'')
  double prefix_escape = 0.0; // mass of q' outside the prefix ball
};

struct DecompositionReport {
  std::vector<double> p;         // p_t, t = 1..n
  std::vector<double> survival;  // P(T > t), t = 0..n
  std::optional<int> n_eps;      // least N with P(T > N) < eps
  bool hypothesis_holds = false; // some N exists on the realization
  // exact mode
  std::vector<DecompositionComponent> components;
  double alpha_total = 0.0;
  double remainder_mass = 0.0;
  double mass_identity_error = 0.0;
  double mixture_tv = 0.0;
  double prefix_escape = 0.0;
  // monte-carlo mode
  double mc_survival = 0.0;
  double mc_stderr = 0.0;
  double mc_z = 0.0;
  bool mc_agrees = false;
  std::vector<std::string> checks_run;
};

/// nu = sum_i upsilon_i (beta_i zeta'_i + (1 - beta_i) zeta''_i)
SparseMeasure decomposition_measure(const DecompositionInput& in);

DecompositionReport decomposition_verify(const DecompositionInput& in);

// ---------------------------------------------------------------- walk simulation

struct WalkStats {
  int n = 0;
  std::size_t trials = 0;
  SparseMeasure empirical;        // distribution of Z_n
  std::vector<double> mean_length;  // E|Z_t| for t = 0..n (when per-step records are requested)
  double return_frequency = 0.0;    // fraction with Z_n = e
};

WalkStats walk_simulate(const Group& g, const SparseMeasure& nu, int n, std::size_t trials, std::uint64_t seed,
                        bool per_step = false);

}  // namespace gwalk
