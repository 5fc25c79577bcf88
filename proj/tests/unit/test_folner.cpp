#include "doctest.h"
#include "gwalk/folner.hpp"

using namespace gwalk;

namespace {

ElementSet set_of(const Group& g, std::initializer_list<const char*> words) {
  ElementSet out;
  for (const char* w : words) out.push_back(g.parse(w));
  normalize(out);
  return out;
}

bool symmetric(const Group& g, const ElementSet& f) {
  for (const auto& x : f)
    if (!set_contains(f, g.inverse(x))) return false;
  return true;
}

}  // namespace

TEST_CASE("finite witness returns the subgroup") {
  Group g = Group::free_times_cyclic(2, 2);
  AmenableWitness w(g, WitnessKind::CentralFactor);
  ElementSet h = set_of(g, {"e", "z"});
  CHECK(w.folner_set({g.parse("z")}, 1e-6) == h);
  CHECK(w.folner_set({}, 0.5) == h);
  CHECK(w.finite_listing() == h);
  CHECK_THROWS_AS(w.folner_set({g.parse("a")}, 0.5), UsageError);
}

TEST_CASE("integer intervals") {
  Group z = Group::integers();
  AmenableWitness w(z, WitnessKind::WholeGroup);
  ElementSet r = set_of(z, {"1", "-1", "2", "-2"});
  ElementSet f = w.folner_set(r, 0.25);
  // smallest passing interval: 4/(2n+1) < 1/4 gives n = 8
  CHECK(f.size() == 17);
  CHECK(set_contains(f, z.integer(8)));
  CHECK_FALSE(set_contains(f, z.integer(9)));
}

TEST_CASE("oracle output always passes the defect check") {
  struct Case {
    Group g;
    WitnessKind kind;
    ElementSet r;
    double eps;
  };
  Group z = Group::integers(), z2 = Group::lattice(2), ll = Group::lamplighter();
  std::vector<Case> cases{
      {z, WitnessKind::WholeGroup, set_of(z, {"3", "-3"}), 0.01},
      {z2, WitnessKind::WholeGroup, set_of(z2, {"(1,0)", "(0,1)", "(-1,0)", "(0,-1)"}), 0.2},
      {ll, WitnessKind::WholeGroup, ElementSet(ll.generators().begin(), ll.generators().end()), 0.5},
      {ll, WitnessKind::Lamps, set_of(ll, {"l", "tlT", "TTltt"}), 0.1},
  };
  for (auto& c : cases) {
    AmenableWitness w(c.g, c.kind);
    ElementSet f = w.folner_set(c.r, c.eps);
    CHECK(folner_invariance_check(c.g, f, c.r, c.eps).passes);
    CHECK(symmetric(c.g, f));
    CHECK(set_contains(f, c.g.identity()));
    for (const auto& x : f) CHECK(w.contains(x));
  }
}

TEST_CASE("budget exhaustion is a resource error") {
  Group ll = Group::lamplighter();
  AmenableWitness w(ll, WitnessKind::WholeGroup);
  ElementSet gens(ll.generators().begin(), ll.generators().end());
  normalize(gens);
  CHECK_THROWS_AS(w.folner_set(gens, 0.01, 100000), ResourceError);
}

TEST_CASE("membership") {
  Group g = Group::free_times_cyclic(2, 2);
  AmenableWitness c(g, WitnessKind::CentralFactor);
  CHECK(c.contains(g.parse("z")));
  CHECK_FALSE(c.contains(g.parse("az")));
  Group ll = Group::lamplighter();
  AmenableWitness lamps(ll, WitnessKind::Lamps);
  CHECK(lamps.contains(ll.parse("tlT")));
  CHECK_FALSE(lamps.contains(ll.parse("t")));
  CHECK_THROWS_AS(AmenableWitness::from_name(g, "nope"), UsageError);
}

TEST_CASE("visibility of a central element") {
  Group g = Group::free_times_cyclic(2, 2);
  AmenableWitness w(g, WitnessKind::CentralFactor);
  ElementSet gens(g.generators().begin(), g.generators().end());
  normalize(gens);
  CHECK_FALSE(visibility_violation(w, {g.parse("z")}, word_ball(g, gens, 7)).has_value());

  Group f2 = Group::free(2);
  AmenableWitness t(f2, WitnessKind::Trivial);
  auto bad = visibility_violation(t, {f2.parse("b")}, ball(f2, 1));
  REQUIRE(bad.has_value());
  CHECK(f2.is_identity(*bad));
}
