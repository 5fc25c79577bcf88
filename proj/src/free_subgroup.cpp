#include "gwalk/free_subgroup.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <numeric>

#include "gwalk/group.hpp"

namespace gwalk {
namespace {

struct RawEdge {
  int u, v;
  std::int32_t label;
  bool alive = true;
};

class Folder {
 public:
  explicit Folder(int rank) : rank_(rank) { add_vertex(); }

  int add_vertex() {
    parent_.push_back(static_cast<int>(parent_.size()));
    inc_.emplace_back();
    return parent_.back();
  }

  void add_path(const Word& w) {
    if (w.empty()) return;
    int cur = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      int next = i + 1 == w.size() ? 0 : add_vertex();
      std::int32_t l = w[i];
      if (l > 0) {
        add_edge(cur, next, l);
      } else {
        add_edge(next, cur, -l);
      }
      cur = next;
    }
  }

  int find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void fold() {
    std::deque<int> work;
    for (int v = 0; v < static_cast<int>(parent_.size()); ++v) work.push_back(v);
    std::vector<int> slot(2 * static_cast<std::size_t>(rank_), -1);
    while (!work.empty()) {
      int x = find(work.front());
      work.pop_front();
      bool restart = true;
      while (restart) {
        restart = false;
        x = find(x);
        std::fill(slot.begin(), slot.end(), -1);
        std::vector<int> kept;
        std::vector<int> list = std::move(inc_[x]);
        inc_[x].clear();
        std::size_t idx = 0;
        for (; idx < list.size(); ++idx) {
          int e = list[idx];
          if (!edges_[e].alive) continue;
          int u = find(edges_[e].u), v = find(edges_[e].v);
          if (u != x && v != x) continue;  // stale incidence
          bool merged_into_x = false;
          for (int dir = 0; dir < 2 && edges_[e].alive; ++dir) {
            if ((dir == 0 && u != x) || (dir == 1 && v != x)) continue;
            std::size_t key = 2 * static_cast<std::size_t>(edges_[e].label - 1) + dir;
            int other = dir == 0 ? v : u;
            if (slot[key] == -1) {
              slot[key] = e;
            } else if (slot[key] != e) {
              const RawEdge& f = edges_[slot[key]];
              int other_f = dir == 0 ? find(f.v) : find(f.u);
              edges_[e].alive = false;
              int r = unite(other, other_f);
              work.push_back(r);
              if (find(x) != x || other == x || other_f == x) merged_into_x = true;
            }
          }
          if (edges_[e].alive && (kept.empty() || kept.back() != e)) kept.push_back(e);
          if (merged_into_x) {
            ++idx;
            break;
          }
        }
        // keep unscanned incidences plus whatever was merged in meanwhile
        int root = find(x);
        std::vector<int>& target = inc_[root];
        target.insert(target.end(), kept.begin(), kept.end());
        target.insert(target.end(), list.begin() + static_cast<std::ptrdiff_t>(idx), list.end());
        if (idx < list.size() || root != x) {
          restart = true;
          x = root;
        }
      }
    }
  }

  std::vector<RawEdge>& edges() { return edges_; }
  std::size_t vertex_count() const { return parent_.size(); }

 private:
  void add_edge(int u, int v, std::int32_t l) {
    edges_.push_back({u, v, l});
    int e = static_cast<int>(edges_.size()) - 1;
    inc_[u].push_back(e);
    if (v != u) inc_[v].push_back(e);
  }

  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    // keep the base vertex as a root so it stays addressable as 0
    if (b == 0 || (a != 0 && inc_[a].size() < inc_[b].size())) std::swap(a, b);
    parent_[b] = a;
    inc_[a].insert(inc_[a].end(), inc_[b].begin(), inc_[b].end());
    inc_[b].clear();
    inc_[b].shrink_to_fit();
    return a;
  }

  int rank_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> inc_;
  std::vector<RawEdge> edges_;
};

}  // namespace

SubgroupBasis::SubgroupBasis(const std::vector<Word>& generators, int rank) : ambient_rank_(rank) {
  Folder folder(rank);
  for (const auto& w : generators) folder.add_path(w);
  folder.fold();

  // compact the folded graph
  std::vector<int> id(folder.vertex_count(), -1);
  int n = 0;
  id[folder.find(0)] = n++;
  for (std::size_t v = 0; v < folder.vertex_count(); ++v) {
    int r = folder.find(static_cast<int>(v));
    if (id[r] == -1) id[r] = n++;
  }
  std::size_t width = 2 * static_cast<std::size_t>(rank);
  out_.assign(static_cast<std::size_t>(n), std::vector<int>(width, -1));
  for (const auto& e : folder.edges()) {
    if (!e.alive) continue;
    int u = id[folder.find(e.u)], v = id[folder.find(e.v)];
    int k = static_cast<int>(edges_.size());
    std::size_t o = 2 * static_cast<std::size_t>(e.label - 1);
    if (out_[u][o] != -1 || out_[v][o + 1] != -1) throw std::logic_error("folding left a non-folded vertex");
    edges_.push_back({u, v, e.label, 0});
    out_[u][o] = k;
    out_[v][o + 1] = k;
  }

  // BFS spanning tree; non-tree edges give the basis
  std::vector<int> parent_edge(static_cast<std::size_t>(n), -1);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<char> tree(edges_.size(), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (std::size_t s = 0; s < width; ++s) {
      int e = out_[v][s];
      if (e == -1) continue;
      int w = s % 2 == 0 ? edges_[e].to : edges_[e].from;
      if (!seen[w]) {
        seen[w] = 1;
        tree[e] = 1;
        parent_edge[w] = e;
        queue.push_back(w);
      }
    }
  }
  auto path_to = [&](int v) {
    Word w;
    while (v != 0) {
      const Edge& e = edges_[parent_edge[v]];
      if (e.to == v) {
        w.push_back(e.label);
        v = e.from;
      } else {
        w.push_back(-e.label);
        v = e.to;
      }
    }
    std::reverse(w.begin(), w.end());
    return w;
  };
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (tree[k]) continue;
    Word w = path_to(edges_[k].from);
    std::int32_t one[1] = {edges_[k].label};
    append_reduced(w, one);
    append_reduced(w, invert_word(path_to(edges_[k].to)));
    basis_.push_back(std::move(w));
    edges_[k].basis_index = static_cast<int>(basis_.size());
  }
}

int SubgroupBasis::step(int vertex, std::int32_t letter, int& edge) const {
  if (letter == 0 || std::abs(letter) > ambient_rank_) return -1;
  std::size_t o = 2 * static_cast<std::size_t>(std::abs(letter) - 1) + (letter > 0 ? 0 : 1);
  edge = out_[vertex][o];
  if (edge == -1) return -1;
  return letter > 0 ? edges_[edge].to : edges_[edge].from;
}

bool SubgroupBasis::contains(const Word& w) const {
  int v = 0, e = -1;
  for (auto l : w) {
    v = step(v, l, e);
    if (v < 0) return false;
  }
  return v == 0;
}

Word SubgroupBasis::rewrite(const Word& w) const {
  Word out;
  int v = 0, e = -1;
  for (auto l : w) {
    v = step(v, l, e);
    if (v < 0) throw UsageError("word is not in the subgroup");
    if (int b = edges_[e].basis_index) {
      std::int32_t one[1] = {l > 0 ? b : -b};
      append_reduced(out, one);
    }
  }
  if (v != 0) throw UsageError("word is not in the subgroup");
  return out;
}

WordPoly rewrite_in_subgroup_basis(const WordPoly& p) {
  std::vector<Word> gens;
  for (const auto& [w, c] : p.terms)
    if (!w.empty()) gens.push_back(w);
  SubgroupBasis basis(gens, p.rank);
  WordPoly out;
  out.rank = basis.rank();
  out.terms.reserve(p.terms.size());
  for (const auto& [w, c] : p.terms) out.terms.emplace_back(basis.rewrite(w), c);
  return out;
}

}  // namespace gwalk
