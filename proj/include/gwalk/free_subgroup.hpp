#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace gwalk {

using Word = std::vector<std::int32_t>;

/// Complex combination of reduced words in a free group of the given rank.
struct WordPoly {
  int rank = 0;
  std::vector<std::pair<Word, std::complex<double>>> terms;
};

/// Free basis of the subgroup generated by a finite set of reduced words, via Stallings folding.
class SubgroupBasis {
 public:
  /// `rank` is the rank of the ambient free group (letters are +-1..+-rank).
  SubgroupBasis(const std::vector<Word>& generators, int rank);

  int rank() const { return static_cast<int>(basis_.size()); }
  /// Basis elements as reduced words in the ambient letters.
  const std::vector<Word>& basis() const { return basis_; }
  /// Expresses w (which must lie in the subgroup) as a reduced word in the basis letters +-1..+-rank().
  Word rewrite(const Word& w) const;
  bool contains(const Word& w) const;

 private:
  struct Edge {
    int from, to;
    std::int32_t label;  // > 0
    int basis_index;     // 0 for tree edges, otherwise 1-based basis letter
  };
  int step(int vertex, std::int32_t letter, int& edge) const;

  int ambient_rank_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;  // out_[v][2*(l-1)] = outgoing l-edge, [2*(l-1)+1] = incoming l-edge
  std::vector<Word> basis_;
};

/// Rewrites every word of p into the basis of the subgroup its support generates.
WordPoly rewrite_in_subgroup_basis(const WordPoly& p);

}  // namespace gwalk
