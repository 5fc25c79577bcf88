#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gwalk/group.hpp"

namespace gwalk {

struct TruncationPolicy {
  double floor = 1e-15;
  std::size_t cap = 5'000'000;

  void validate() const;
};

/// Finitely supported nonnegative weights plus the total mass removed by truncation.
class SparseMeasure {
 public:
  using Atom = std::pair<Element, double>;

  SparseMeasure() = default;
  /// Merges duplicate elements and discards zero weights. Negative weights are rejected.
  static SparseMeasure from_atoms(std::vector<Atom> atoms, double dropped = 0.0);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double dropped() const { return dropped_; }
  /// Stored mass (excludes the dropped ledger).
  double mass() const;
  double weight(const Element& g) const;
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  ElementSet support() const;
  void add_dropped(double m) { dropped_ += m; }

 private:
  std::vector<Atom> atoms_;  // sorted by element
  double dropped_ = 0.0;
};

SparseMeasure dirac(const Element& g);
SparseMeasure uniform_on(const ElementSet& f);

/// (mu * nu)(g) = sum_h mu(h) nu(h^-1 g), then the policy floor is applied.
SparseMeasure convolve(const Group& g, const SparseMeasure& mu, const SparseMeasure& nu,
                       const TruncationPolicy& policy = {});
SparseMeasure convolution_power(const Group& g, const SparseMeasure& nu, int n, const TruncationPolicy& policy = {});

SparseMeasure translate_left(const Group& g, const Element& s, const SparseMeasure& mu);
SparseMeasure invert(const Group& g, const SparseMeasure& mu);
/// Pushforward under x -> q^-1 x q.
SparseMeasure conjugate_measure(const Group& g, const SparseMeasure& mu, const Element& q);

struct TVDistance {
  double value = 0.0;
  double error = 0.0;  // true distance lies in [value - error, value + error]
  double lower() const { return value - error < 0 ? 0.0 : value - error; }
  double upper() const { return value + error > 2 ? 2.0 : value + error; }
};

TVDistance tv_distance(const SparseMeasure& mu, const SparseMeasure& nu);

SparseMeasure convex_combine(const std::vector<double>& weights, const std::vector<SparseMeasure>& measures);

bool is_symmetric(const Group& g, const SparseMeasure& mu, double tol = 1e-12);

/// Repeated draws from a fixed probability measure.
class Sampler {
 public:
  explicit Sampler(const SparseMeasure& mu);
  const Element& operator()(std::mt19937_64& rng) const;

 private:
  std::vector<Element> elements_;
  std::vector<double> cumulative_;
};

Element sample(const SparseMeasure& mu, std::uint64_t seed);

void write_measure(std::ostream& os, const Group& g, const SparseMeasure& mu);
/// `source` is used in error messages ("file:line").
SparseMeasure read_measure(std::istream& is, const Group& g, const std::string& source = "<input>");

}  // namespace gwalk
