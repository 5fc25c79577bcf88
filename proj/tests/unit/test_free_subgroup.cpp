#include <random>

#include "doctest.h"
#include "gwalk/free_subgroup.hpp"
#include "gwalk/group.hpp"

using namespace gwalk;

namespace {

Word reduce(const Word& w) {
  Word out;
  for (std::int32_t l : w) append_reduced(out, Word{l});
  return out;
}

// Substitutes basis words for the letters of a word over the basis.
Word expand(const Word& over_basis, const std::vector<Word>& basis) {
  Word out;
  for (std::int32_t l : over_basis) {
    const Word& b = basis[std::abs(l) - 1];
    if (l > 0) append_reduced(out, b);
    else append_reduced(out, invert_word(b));
  }
  return out;
}

}  // namespace

TEST_CASE("conjugates of b by powers of a are a free basis") {
  std::vector<Word> gens;
  for (int k = 1; k <= 5; ++k) {
    Word w(k, -1);
    w.push_back(2);
    w.insert(w.end(), k, 1);
    gens.push_back(w);
  }
  SubgroupBasis sb(gens, 2);
  CHECK(sb.rank() == 5);
  for (const auto& g : gens) {
    CHECK(sb.contains(g));
    Word r = sb.rewrite(g);
    CHECK(r.size() == 1);
    CHECK(expand(r, sb.basis()) == g);
  }
  CHECK_FALSE(sb.contains({1}));
  CHECK_FALSE(sb.contains({2}));
}

TEST_CASE("cyclic subgroups fold") {
  SubgroupBasis sb({{1, 1}, {1, 1, 1}}, 2);
  CHECK(sb.rank() == 1);
  CHECK(sb.contains({1}));
  CHECK(sb.contains({-1, -1, -1, -1, -1}));
  CHECK_FALSE(sb.contains({2}));
}

TEST_CASE("finite index subgroup") {
  // even-length words in F2 form an index-2 subgroup of rank 3
  SubgroupBasis sb({{1, 1}, {1, 2}, {1, -2}, {2, 2}}, 2);
  CHECK(sb.rank() == 3);
  CHECK(sb.contains({2, -1}));
  CHECK_FALSE(sb.contains({2, 2, 1}));
}

TEST_CASE("rewrite round trips on random products") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> letter(1, 3), sign(0, 1), len(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Word> gens;
    for (int i = 0; i < 3; ++i) {
      Word w;
      int n = len(rng);
      for (int j = 0; j < n; ++j) w.push_back(sign(rng) ? letter(rng) : -letter(rng));
      w = reduce(w);
      if (!w.empty()) gens.push_back(w);
    }
    if (gens.empty()) continue;
    SubgroupBasis sb(gens, 3);
    CHECK(sb.rank() <= static_cast<int>(gens.size()));
    std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
    for (int k = 0; k < 10; ++k) {
      Word w;
      for (int j = 0; j < 4; ++j) {
        const Word& g = gens[pick(rng)];
        if (sign(rng)) append_reduced(w, g);
        else append_reduced(w, invert_word(g));
      }
      REQUIRE(sb.contains(w));
      CHECK(expand(sb.rewrite(w), sb.basis()) == w);
    }
  }
}

TEST_CASE("polynomial rewrite keeps coefficients") {
  WordPoly p{2, {{{-1, 2, 1}, 0.5}, {{-1, -1, 2, 1, 1}, 0.25}}};
  WordPoly q = rewrite_in_subgroup_basis(p);
  CHECK(q.rank == 2);
  REQUIRE(q.terms.size() == 2);
  for (const auto& [w, c] : q.terms) CHECK(w.size() == 1);
  CHECK(q.terms[0].second + q.terms[1].second == std::complex<double>(0.75));
}
