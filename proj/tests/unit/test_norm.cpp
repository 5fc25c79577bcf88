#include <cmath>
#include <random>

#include "doctest.h"
#include "gwalk/norm.hpp"

using namespace gwalk;

namespace {

AlgebraElement srw(const Group& g) {
  std::vector<AlgebraElement::Term> t;
  double w = 1.0 / static_cast<double>(g.generators().size());
  for (const auto& s : g.generators()) t.emplace_back(s, w);
  return AlgebraElement::from_terms(t);
}

// Return probability of simple random walk on the 2k-regular tree after n steps,
// counted by distance from the root.
double tree_return_probability(int degree, int n) {
  std::vector<double> p(n + 2, 0.0);
  p[0] = 1.0;
  for (int step = 0; step < n; ++step) {
    std::vector<double> q(n + 2, 0.0);
    q[1] += p[0];
    for (int d = 1; d <= n; ++d) {
      q[d - 1] += p[d] / degree;
      q[d + 1] += p[d] * (degree - 1) / degree;
    }
    p = q;
  }
  return p[0];
}

AlgebraElement conjugate_family(const Group& f2, int m) {
  std::vector<AlgebraElement::Term> t;
  Element a = f2.parse("a"), b = f2.parse("b");
  for (int k = 1; k <= m; ++k) t.emplace_back(f2.conjugate(b, f2.power(a, k)), 1.0 / m);
  return AlgebraElement::from_terms(t);
}

AlgebraElement random_element(const Group& g, std::mt19937_64& rng, int support) {
  auto pool = enumerate_elements(g, 13);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<AlgebraElement::Term> t;
  for (int i = 0; i < support; ++i) t.emplace_back(pool[pick(rng)], u(rng));
  return AlgebraElement::from_terms(t);
}

}  // namespace

TEST_CASE("srw moments match the closed-walk counter") {
  Group f2 = Group::free(2);
  auto a = srw(f2);
  MomentSequence ms = trace_moments(f2, a, 30);
  REQUIRE(ms.moments.size() == 30);
  for (int k = 1; k <= 30; ++k)
    CHECK(ms.moments[k - 1] == doctest::Approx(tree_return_probability(4, 2 * k)).epsilon(1e-10));
}

TEST_CASE("srw lower bounds approach the spectral radius from below") {
  Group f2 = Group::free(2);
  auto lb = norm_lower_bound(f2, srw(f2), 40);
  REQUIRE(lb.values.size() == 40);
  for (std::size_t i = 1; i < lb.values.size(); ++i) CHECK(lb.values[i] >= lb.values[i - 1] - 1e-10);
  CHECK(lb.values.back() <= std::sqrt(3.0) / 2 + 1e-9);
  CHECK(lb.values.back() >= 0.85);
  NormEstimate e = estimate_norm(f2, srw(f2));
  CHECK(e.upper == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));
  CHECK(e.classify(0.8) == NormVerdict::CertifiedAbove);
}

TEST_CASE("simple bounds") {
  Group f2 = Group::free(2);
  auto u = AlgebraElement::basis(f2.parse("ab"));
  for (double t : norm_lower_bound(f2, u, 10).values) CHECK(t == doctest::Approx(1.0));
  CHECK(norm_upper_bound(f2, u, 5) == doctest::Approx(1.0));
  CHECK(estimate_norm(f2, u).classify(0.5) == NormVerdict::CertifiedAbove);

  AlgebraElement zero;
  for (double t : norm_lower_bound(f2, zero, 5).values) CHECK(t == 0.0);
  CHECK(estimate_norm(f2, zero).classify(0.5) == NormVerdict::CertifiedBelow);

  auto ab = add(AlgebraElement::basis(f2.parse("a")), AlgebraElement::basis(f2.parse("b")));
  CHECK(norm_upper_bound(f2, ab, 1) == doctest::Approx(2.0));
}

TEST_CASE("sums of free conjugates") {
  Group f2 = Group::free(2);
  // m free unitaries sum to norm 2 sqrt(m - 1)
  auto x4 = conjugate_family(f2, 4);
  NormEstimate e4 = estimate_norm(f2, x4);
  CHECK(e4.lower >= 0.80);
  CHECK(e4.lower <= std::sqrt(3.0) / 2 + 1e-9);
  CHECK(e4.upper >= std::sqrt(3.0) / 2 - 1e-9);

  auto x17 = conjugate_family(f2, 17);
  auto lb = norm_lower_bound(f2, x17, 40);
  for (double t : lb.values) CHECK(t < 0.5);
  double truth = 2 * std::sqrt(16.0) / 17;
  CHECK(std::abs(lb.values.back() - truth) < 0.05);
  NormEstimate e17 = estimate_norm(f2, x17);
  CHECK(e17.upper >= truth - 1e-9);
  CHECK(e17.classify(0.5) == NormVerdict::CertifiedBelow);
}

TEST_CASE("nearest-neighbour series agrees with explicit powers") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    WordPoly x{2, {}};
    for (std::int32_t l : {1, -1, 2, -2}) x.terms.push_back({{l}, {u(rng), trial % 3 == 0 ? u(rng) : 0.0}});
    x.terms.push_back({{}, u(rng)});
    auto nn = freegroup::nearest_neighbour_moments(x, 6);
    auto ex = freegroup::explicit_moments(x, 6, 1'000'000);
    REQUIRE(ex.moments.size() == 6);
    for (int k = 0; k < 6; ++k) CHECK(nn.moments[k] == doctest::Approx(ex.moments[k]).epsilon(1e-9));
  }
}

TEST_CASE("schur test dominates the lower bounds") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    WordPoly x{2, {}};
    for (std::int32_t l : {1, -1, 2, -2}) x.terms.push_back({{l}, u(rng)});
    auto nn = freegroup::nearest_neighbour_moments(x, 30);
    double lower = std::pow(nn.moments.back(), 1.0 / 60);
    CHECK(freegroup::schur_bound(x) >= lower - 1e-9);
    CHECK(freegroup::schur_bound(x) <= freegroup::schur_bound_with_weights(x, {1.0, 1.0}) + 1e-12);
  }
}

TEST_CASE("abelian groups use characters") {
  Group z = Group::integers();
  auto a = add(AlgebraElement::basis(z.integer(1)), AlgebraElement::basis(z.integer(-1)));
  NormEstimate e = estimate_norm(z, a);
  CHECK(e.lower <= 2.0 + 1e-9);
  CHECK(e.upper >= 2.0 - 1e-9);
  CHECK(e.upper - e.lower < 0.1);
}

TEST_CASE("intervals are consistent across the catalog") {
  std::mt19937_64 rng(21);
  NormBudget budget;
  budget.max_moment = 12;
  budget.support_cap = 20000;
  for (const auto& g : {Group::integers(), Group::lattice(2), Group::free(2), Group::free_times_cyclic(2, 2),
                        Group::cyclic(4), Group::lamplighter()}) {
    for (int trial = 0; trial < 15; ++trial) {
      auto a = random_element(g, rng, 4);
      auto ms = trace_moments(g, a, 8, budget);
      for (double m : ms.moments) CHECK(m >= -1e-12);
      NormEstimate e = estimate_norm(g, a, budget);
      CHECK(e.lower <= e.upper + 1e-9);
      CHECK(e.upper <= a.l1_norm() + 1e-9);
    }
  }
}

TEST_CASE("averaging is contractive in computed bounds") {
  std::mt19937_64 rng(77);
  Group f2 = Group::free(2);
  auto pool = enumerate_elements(f2, 9);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  NormBudget budget;
  budget.max_moment = 10;
  budget.support_cap = 20000;
  for (int trial = 0; trial < 20; ++trial) {
    auto r = random_element(f2, rng, 3);
    auto a = add(r, adjoint(f2, r));
    std::vector<SparseMeasure::Atom> atoms{{pool[pick(rng)], 0.5}, {pool[pick(rng)], 0.5}};
    auto nu = SparseMeasure::from_atoms(atoms);
    auto lb = norm_lower_bound(f2, averaged_conjugation(f2, a, nu), 10, budget);
    CHECK(lb.values.back() <= estimate_norm(f2, a, budget).upper + 1e-9);
  }
}

TEST_CASE("budget validation") {
  NormBudget b;
  b.max_moment = 0;
  CHECK_THROWS_AS(b.validate(), UsageError);
}
