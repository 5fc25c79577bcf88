#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gwalk/measure.hpp"

using namespace gwalk;

namespace {

SparseMeasure atoms(const Group& g, std::initializer_list<std::pair<const char*, double>> list) {
  std::vector<SparseMeasure::Atom> a;
  for (const auto& [w, p] : list) a.emplace_back(g.parse(w), p);
  return SparseMeasure::from_atoms(a);
}

SparseMeasure random_measure(const Group& g, std::mt19937_64& rng, int support, int radius) {
  auto pool = enumerate_elements(g, static_cast<std::size_t>(radius));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<SparseMeasure::Atom> a;
  double total = 0;
  for (int i = 0; i < support; ++i) {
    double w = u(rng);
    a.emplace_back(pool[pick(rng)], w);
    total += w;
  }
  for (auto& x : a) x.second /= total;
  return SparseMeasure::from_atoms(a);
}

// Lazy walk on Z: nu^n(k) = C(2n, n+k) / 4^n.
double lazy_oracle(int n, int k) {
  if (std::abs(k) > n) return 0.0;
  return std::exp(std::lgamma(2.0 * n + 1) - std::lgamma(n + k + 1.0) - std::lgamma(n - k + 1.0) - 2.0 * n * std::log(2.0));
}

}  // namespace

TEST_CASE("dirac and uniform") {
  Group g = Group::free_times_cyclic(2, 2);
  CHECK(dirac(g.identity()).weight(g.identity()) == 1.0);
  SparseMeasure u = uniform_on({g.identity(), g.parse("z")});
  CHECK(u.weight(g.parse("z")) == 0.5);
  CHECK(u.dropped() == 0.0);
  Group f2 = Group::free(2);
  SparseMeasure s = uniform_on({f2.parse("a"), f2.parse("A"), f2.parse("b"), f2.parse("B")});
  for (const auto& [x, w] : s.atoms()) CHECK(w == 0.25);
  CHECK_THROWS_AS(uniform_on({}), UsageError);
}

TEST_CASE("convolution examples") {
  Group z = Group::integers();
  CHECK(tv_distance(convolve(z, dirac(z.integer(2)), dirac(z.integer(3))), dirac(z.integer(5))).value == 0.0);

  SparseMeasure pm = atoms(z, {{"1", 0.5}, {"-1", 0.5}});
  SparseMeasure two = convolve(z, pm, pm);
  CHECK(two.weight(z.integer(2)) == 0.25);
  CHECK(two.weight(z.integer(0)) == 0.5);
  CHECK(two.weight(z.integer(-2)) == 0.25);

  SparseMeasure cut = convolve(z, pm, pm, {0.3, 1000});
  CHECK(cut.size() == 1);
  CHECK(cut.weight(z.integer(0)) == 0.5);
  CHECK(cut.dropped() == 0.5);

  SparseMeasure lazy = atoms(z, {{"0", 0.5}, {"1", 0.25}, {"-1", 0.25}});
  SparseMeasure l2 = convolution_power(z, lazy, 2);
  CHECK(l2.weight(z.integer(-2)) == doctest::Approx(1.0 / 16));
  CHECK(l2.weight(z.integer(-1)) == doctest::Approx(0.25));
  CHECK(l2.weight(z.integer(0)) == doctest::Approx(3.0 / 8));

  CHECK(convolution_power(z, lazy, 0).weight(z.identity()) == 1.0);
  CHECK(convolution_power(z, dirac(z.integer(1)), 7).weight(z.integer(7)) == 1.0);
  CHECK_THROWS_AS(convolution_power(z, lazy, 30, {0.0, 10}), ResourceError);
}

TEST_CASE("lazy walk powers match the binomial closed form") {
  Group z = Group::integers();
  SparseMeasure lazy = atoms(z, {{"0", 0.5}, {"1", 0.25}, {"-1", 0.25}});
  SparseMeasure p = convolution_power(z, lazy, 60, {0.0, 1000});
  for (int k = -60; k <= 60; ++k) CHECK(p.weight(z.integer(k)) == doctest::Approx(lazy_oracle(60, k)).epsilon(1e-10));
}

TEST_CASE("pushforwards") {
  Group f2 = Group::free(2);
  Element s = f2.parse("ab"), g = f2.parse("B");
  CHECK(translate_left(f2, s, dirac(g)).weight(f2.parse("a")) == 1.0);
  SparseMeasure m = atoms(f2, {{"a", 0.25}, {"b", 0.75}});
  SparseMeasure inv = invert(f2, m);
  CHECK(inv.weight(f2.parse("A")) == 0.25);
  CHECK(inv.weight(f2.parse("B")) == 0.75);

  ElementSet f = ball(f2, 1);
  Element q = f2.parse("ab");
  ElementSet fq;
  for (const auto& x : f) fq.push_back(f2.conjugate(x, q));
  normalize(fq);
  CHECK(tv_distance(conjugate_measure(f2, uniform_on(f), q), uniform_on(fq)).value == doctest::Approx(0.0));

  SparseMeasure led = SparseMeasure::from_atoms({{f2.parse("a"), 0.9}}, 0.1);
  CHECK(invert(f2, led).dropped() == 0.1);
  CHECK(translate_left(f2, s, led).dropped() == 0.1);
}

TEST_CASE("total variation") {
  Group z = Group::integers();
  SparseMeasure m = atoms(z, {{"0", 0.5}, {"1", 0.5}});
  CHECK(tv_distance(m, m).value == 0.0);
  CHECK(tv_distance(dirac(z.integer(1)), dirac(z.integer(2))).value == 2.0);
  CHECK(tv_distance(m, dirac(z.integer(0))).value == 1.0);
  SparseMeasure led = SparseMeasure::from_atoms({{z.integer(0), 0.9}}, 0.1);
  TVDistance d = tv_distance(led, dirac(z.integer(0)));
  CHECK(d.error == doctest::Approx(0.1));
  CHECK(d.lower() == 0.0);
}

TEST_CASE("convex combination") {
  Group z = Group::integers();
  SparseMeasure m = atoms(z, {{"0", 0.3}, {"4", 0.7}});
  CHECK(tv_distance(convex_combine({1.0}, {m}), m).value == 0.0);
  CHECK(convex_combine({0.5, 0.5}, {dirac(z.integer(2)), dirac(z.integer(2))}).weight(z.integer(2)) == 1.0);
  SparseMeasure c = convex_combine({0.3, 0.7}, {dirac(z.integer(0)), dirac(z.integer(1))});
  CHECK(c.weight(z.integer(0)) == 0.3);
  CHECK(c.weight(z.integer(1)) == 0.7);
  CHECK_THROWS_AS(convex_combine({0.3, 0.6}, {m, m}), UsageError);
}

TEST_CASE("sampling") {
  Group f2 = Group::free(2);
  CHECK(sample(dirac(f2.parse("ab")), 99) == f2.parse("ab"));
  SparseMeasure m = atoms(f2, {{"a", 0.2}, {"b", 0.3}, {"e", 0.5}});
  CHECK(sample(m, 5) == sample(m, 5));

  std::mt19937_64 rng(17);
  Sampler draw(m);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += draw(rng) == f2.parse("b");
  double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(hits / double(n) - 0.3) < 4 * se);

  CHECK_THROWS_AS(Sampler(SparseMeasure::from_atoms({{f2.parse("a"), 0.5}}, 0.5)), UsageError);
}

TEST_CASE("file round trip") {
  Group g = Group::free_times_cyclic(2, 3);
  SparseMeasure m = SparseMeasure::from_atoms({{g.parse("abz"), 0.1}, {g.parse("Bz^2"), 0.2}, {g.parse("e"), 0.6}}, 0.1);
  std::stringstream ss;
  write_measure(ss, g, m);
  SparseMeasure back = read_measure(ss, g);
  CHECK(tv_distance(m, back).value == 0.0);
  CHECK(back.dropped() == 0.1);

  std::stringstream bad("a 0.5\nb oops\n");
  try {
    read_measure(bad, g, "nu.txt");
    FAIL("expected a parse error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("nu.txt:2") != std::string::npos);
  }
}

TEST_CASE("measure algebra properties") {
  std::mt19937_64 rng(23);
  for (const auto& g : {Group::integers(), Group::free(2), Group::free_times_cyclic(2, 2), Group::lamplighter()}) {
    for (int trial = 0; trial < 40; ++trial) {
      SparseMeasure mu = random_measure(g, rng, 4, 15), mu2 = random_measure(g, rng, 4, 15);
      SparseMeasure nu = random_measure(g, rng, 3, 9), rho = random_measure(g, rng, 3, 9);
      // Markov contraction
      CHECK(tv_distance(convolve(g, mu, nu), convolve(g, mu2, nu)).value <= tv_distance(mu, mu2).value + 1e-12);
      // associativity
      CHECK(tv_distance(convolve(g, convolve(g, mu, nu), rho), convolve(g, mu, convolve(g, nu, rho))).value < 1e-12);
      // translation commutes
      Element s = g.generators()[trial % g.generators().size()];
      CHECK(tv_distance(translate_left(g, s, convolve(g, mu, nu)), convolve(g, translate_left(g, s, mu), nu)).value <
            1e-12);
      // inversion reverses products
      CHECK(tv_distance(invert(g, convolve(g, mu, nu)), convolve(g, invert(g, nu), invert(g, mu))).value < 1e-12);
    }
  }
}

TEST_CASE("truncation stays inside its error bar") {
  Group f2 = Group::free(2);
  SparseMeasure srw = uniform_on(ElementSet(f2.generators().begin(), f2.generators().end()));
  SparseMeasure lazy = convex_combine({0.5, 0.5}, {dirac(f2.identity()), srw});
  SparseMeasure exact = convolution_power(f2, lazy, 8, {0.0, 1'000'000});
  SparseMeasure cut = convolution_power(f2, lazy, 8, {1e-5, 1'000'000});
  CHECK(cut.dropped() > 0);
  CHECK(cut.mass() + cut.dropped() == doctest::Approx(1.0).epsilon(1e-12));
  Element s = f2.parse("a");
  TVDistance a = tv_distance(translate_left(f2, s, exact), exact);
  TVDistance b = tv_distance(translate_left(f2, s, cut), cut);
  CHECK(std::abs(a.value - b.value) <= b.error + 1e-12);
}
