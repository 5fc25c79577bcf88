#include <random>
#include <set>

#include "doctest.h"
#include "gwalk/group.hpp"

using namespace gwalk;

namespace {

std::vector<Group> catalog() {
  return {Group::integers(),        Group::lattice(2), Group::free(2), Group::free(3),
          Group::free_times_cyclic(2, 2), Group::cyclic(5), Group::lamplighter()};
}

Element random_element(const Group& g, std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<std::size_t> pick(0, g.generators().size() - 1);
  Element x = g.identity();
  for (int i = 0; i < len; ++i) x = g.multiply(x, g.generators()[pick(rng)]);
  return x;
}

// Brute-force lamplighter product on explicit lamp sets.
std::pair<std::set<int>, int> lamp_product(std::set<int> f, int p, const std::set<int>& g, int q) {
  for (int x : g) {
    int y = x + p;
    if (f.count(y)) f.erase(y);
    else f.insert(y);
  }
  return {f, p + q};
}

}  // namespace

TEST_CASE("multiply examples") {
  Group z = Group::integers();
  CHECK(z.multiply(z.integer(3), z.integer(5)) == z.integer(8));

  Group f2 = Group::free(2);
  CHECK(f2.multiply(f2.parse("ab"), f2.parse("Ba")) == f2.parse("a^2"));
  CHECK(f2.format(f2.parse("a a")) == "a^2");

  Group ll = Group::lamplighter();
  CHECK(ll.multiply(ll.lamplighter_element({}, 1), ll.lamplighter_element({0}, 0)) ==
        ll.lamplighter_element({1}, 1));
}

TEST_CASE("lamplighter product matches brute force") {
  Group ll = Group::lamplighter();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pos(-4, 4), coin(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<int> f, g;
    for (int k = -4; k <= 4; ++k) {
      if (coin(rng)) f.insert(k);
      if (coin(rng)) g.insert(k);
    }
    int p = pos(rng), q = pos(rng);
    auto [h, r] = lamp_product(f, p, g, q);
    Element x = ll.lamplighter_element({f.begin(), f.end()}, p);
    Element y = ll.lamplighter_element({g.begin(), g.end()}, q);
    CHECK(ll.multiply(x, y) == ll.lamplighter_element({h.begin(), h.end()}, r));
  }
}

TEST_CASE("mixed groups are rejected") {
  Group a = Group::free(2), b = Group::free(3);
  CHECK_THROWS_AS(a.multiply(a.parse("a"), b.parse("a")), UsageError);
}

TEST_CASE("conjugation") {
  Group f2 = Group::free(2);
  Element b = f2.parse("b"), a = f2.parse("a");
  CHECK(f2.conjugate(b, f2.identity()) == b);
  Element ba = f2.conjugate(b, a);
  CHECK(ba == f2.parse("Aba"));
  CHECK(f2.length(ba) == 3);

  Group g = Group::free_times_cyclic(2, 2);
  Element z = g.parse("z");
  for (const auto& q : enumerate_elements(g, 40)) CHECK(g.conjugate(z, q) == z);
}

TEST_CASE("group axioms hold on random elements") {
  std::mt19937_64 rng(11);
  for (const auto& g : catalog()) {
    for (int i = 0; i < 200; ++i) {
      Element x = random_element(g, rng, 6), y = random_element(g, rng, 6), w = random_element(g, rng, 6);
      CHECK(g.multiply(x, g.inverse(x)) == g.identity());
      CHECK(g.inverse(g.inverse(x)) == x);
      CHECK(g.multiply(g.multiply(x, y), w) == g.multiply(x, g.multiply(y, w)));
      CHECK(g.multiply(g.identity(), x) == x);
      CHECK(g.parse(g.format(x)) == x);
      // (s^q)^r = s^{qr}
      CHECK(g.conjugate(g.conjugate(x, y), w) == g.conjugate(x, g.multiply(y, w)));
    }
  }
}

TEST_CASE("power") {
  Group f2 = Group::free(2);
  Element ab = f2.parse("ab");
  CHECK(f2.power(ab, 3) == f2.parse("ababab"));
  CHECK(f2.power(ab, -2) == f2.parse("BABA"));
  CHECK(f2.power(ab, 0) == f2.identity());
  Group c = Group::cyclic(5);
  CHECK(c.power(c.parse("z"), 7) == c.parse("z^2"));
}

TEST_CASE("parse errors") {
  Group f2 = Group::free(2);
  CHECK_THROWS_AS(f2.parse(""), UsageError);
  CHECK_THROWS_AS(f2.parse("c"), UsageError);
  CHECK_THROWS_AS(Group::lattice(2).parse("(1,2,3)"), UsageError);
  CHECK_THROWS_AS(Group::integers().parse("x"), UsageError);
}

TEST_CASE("enumeration") {
  Group z = Group::integers();
  auto e = enumerate_elements(z, 5);
  std::vector<Element> want{z.integer(0), z.integer(1), z.integer(-1), z.integer(2), z.integer(-2)};
  CHECK(e == want);

  Group f2 = Group::free(2);
  auto f = enumerate_elements(f2, 5);
  std::vector<Element> fw{f2.identity(), f2.parse("a"), f2.parse("A"), f2.parse("b"), f2.parse("B")};
  CHECK(f == fw);

  for (const auto& g : catalog()) {
    auto one = enumerate_elements(g, 1);
    REQUIRE(one.size() == 1);
    CHECK(g.is_identity(one[0]));
    auto small = enumerate_elements(g, 20), big = enumerate_elements(g, 21);
    CHECK(std::equal(small.begin(), small.end(), big.begin()));
  }
}

TEST_CASE("enumeration covers balls in order") {
  for (const auto& g : {Group::free(2), Group::lattice(2), Group::free_times_cyclic(2, 3), Group::lamplighter()}) {
    ElementSet b2 = ball(g, 2);
    auto e = enumerate_elements(g, b2.size());
    ElementSet got(e.begin(), e.end());
    normalize(got);
    CHECK(got == b2);
  }
}

TEST_CASE("word ball") {
  Group z = Group::integers();
  CHECK(word_ball(z, {}, 4) == ElementSet{z.identity()});
  ElementSet pm{z.integer(1), z.integer(-1)};
  normalize(pm);
  ElementSet want{z.integer(-2), z.integer(-1), z.integer(0), z.integer(1), z.integer(2)};
  normalize(want);
  CHECK(word_ball(z, pm, 3) == want);

  Group f2 = Group::free(2);
  ElementSet a{f2.parse("a"), f2.parse("A")};
  normalize(a);
  ElementSet wa{f2.identity(), f2.parse("a"), f2.parse("A")};
  normalize(wa);
  CHECK(word_ball(f2, a, 2) == wa);

  ElementSet gens(f2.generators().begin(), f2.generators().end());
  normalize(gens);
  CHECK_THROWS_AS(word_ball(f2, gens, 12, 1000), ResourceError);

  // monotone in the factor set and the length
  ElementSet small = word_ball(f2, a, 3), big = word_ball(f2, gens, 3), longer = word_ball(f2, a, 4);
  for (const auto& x : small) {
    CHECK(set_contains(big, x));
    CHECK(set_contains(longer, x));
  }
}

TEST_CASE("ball sizes") {
  // |B_r| in F_k is 1 + 2k((2k-1)^r - 1)/(2k-2)
  Group f2 = Group::free(2);
  CHECK(ball(f2, 3).size() == 1 + 4 * (27 - 1) / 2);
  CHECK(ball(Group::lattice(2), 2).size() == 13);
  CHECK(ball(Group::cyclic(5), 10).size() == 5);
}

TEST_CASE("invariance check") {
  Group z = Group::integers();
  ElementSet f;
  for (int i = -10; i <= 10; ++i) f.push_back(z.integer(i));
  normalize(f);
  ElementSet r{z.integer(1), z.integer(-1)};
  normalize(r);
  auto d = folner_invariance_check(z, f, r, 0.1);
  CHECK(d.ratio == doctest::Approx(2.0 / 21));
  CHECK(d.passes);

  auto d0 = folner_invariance_check(z, {z.integer(0)}, {z.integer(1)}, 0.5);
  CHECK(d0.ratio == 1.0);
  CHECK_FALSE(d0.passes);

  Group g = Group::free_times_cyclic(2, 2);
  ElementSet h{g.identity(), g.parse("z")};
  normalize(h);
  CHECK(folner_invariance_check(g, h, h, 1e-9).ratio == 0.0);

  CHECK_THROWS_AS(folner_invariance_check(z, {}, r, 0.1), UsageError);
}
