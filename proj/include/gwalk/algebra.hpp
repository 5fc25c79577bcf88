#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gwalk/group.hpp"
#include "gwalk/measure.hpp"

namespace gwalk {

using Complex = std::complex<double>;

/// Finitely supported element of the complex group algebra, viewed inside C_r(G).
/// `dropped()` is an l1 bound on the difference to the untruncated value; since the
/// C*-norm is dominated by the l1 norm it bounds the norm error as well.
class AlgebraElement {
 public:
  using Term = std::pair<Element, Complex>;

  AlgebraElement() = default;
  /// Merges duplicates and removes exact zeros.
  static AlgebraElement from_terms(std::vector<Term> terms, double dropped = 0.0);
  /// The unitary 𝔞_g.
  static AlgebraElement basis(const Element& g);

  const std::vector<Term>& terms() const { return terms_; }
  double dropped() const { return dropped_; }
  void add_dropped(double x) { dropped_ += x; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  Complex coefficient(const Element& g) const;
  ElementSet support() const;
  double l1_norm() const;
  double l2_norm_sq() const;
  bool is_real() const;

 private:
  std::vector<Term> terms_;  // sorted by element
  double dropped_ = 0.0;
};

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement subtract(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement scale(Complex lambda, const AlgebraElement& a);
AlgebraElement multiply(const Group& g, const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement adjoint(const Group& g, const AlgebraElement& a);
/// Coefficientwise |a(g)|.
AlgebraElement absolute(const AlgebraElement& a);

Complex trace(const Group& g, const AlgebraElement& a);
AlgebraElement kernel_projection(const Group& g, const AlgebraElement& a);

/// a^g = 𝔞_g^-1 a 𝔞_g, i.e. coefficients moved along x -> g^-1 x g.
AlgebraElement conjugate_action(const Group& g, const AlgebraElement& a, const Element& by);
/// a^nu = sum_g nu(g) a^g. The dropped ledger grows by nu.dropped() * ||a||_1.
AlgebraElement averaged_conjugation(const Group& g, const AlgebraElement& a, const SparseMeasure& nu);

/// Drops coefficients below `floor` in magnitude, then keeps the `cap` largest; the l1 mass
/// removed goes to the ledger.
AlgebraElement truncate(const AlgebraElement& a, double floor, std::size_t cap);

/// Max coefficientwise distance |a(g) - b(g)| over the union of supports.
double max_coefficient_distance(const AlgebraElement& a, const AlgebraElement& b);

void write_algebra(std::ostream& os, const Group& g, const AlgebraElement& a);
AlgebraElement read_algebra(std::istream& is, const Group& g, const std::string& source = "<input>");

}  // namespace gwalk
