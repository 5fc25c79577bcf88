#include "gwalk/norm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace gwalk {

void NormBudget::validate() const {
  if (max_moment < 1) throw UsageError("norm budget: max_moment must be >= 1");
  if (support_cap < 1) throw UsageError("norm budget: support_cap must be >= 1");
  if (character_grid < 1) throw UsageError("norm budget: character_grid must be >= 1");
}

std::string to_string(NormVerdict v) {
  switch (v) {
    case NormVerdict::CertifiedBelow: return "certified-below";
    case NormVerdict::CertifiedAbove: return "certified-above";
    case NormVerdict::Undecided: return "undecided";
  }
  return "?";
}

namespace {

constexpr double kRound = 1e-15;

double moment_error(double abs_moment, int k) { return abs_moment * (4.0 * k + 10.0) * kRound; }

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : w) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
      h ^= h >> 31;
    }
    return static_cast<std::size_t>(h);
  }
};

// Explicit powers of y = x* x over any key type.
inline std::size_t key_length(const Word& w) { return w.size(); }
inline std::size_t key_length(const Element& x) { return x.code().size(); }

template <class Key, class Hash, class Mul, class Inv>
struct PowerEngine {
  using Poly = std::unordered_map<Key, Complex, Hash>;
  Mul mul;
  Inv inv;

  Poly product(const Poly& a, const Poly& b) const {
    Poly out;
    out.reserve(a.size() * 2 + b.size());
    for (const auto& [x, cx] : a)
      for (const auto& [y, cy] : b) out[mul(x, y)] += cx * cy;
    return out;
  }

  Poly star(const Poly& a) const {
    Poly out;
    for (const auto& [x, c] : a) out[inv(x)] += std::conj(c);
    return out;
  }

  static Complex inner(const Poly& a, const Poly& b) {
    Complex s = 0;
    for (const auto& [x, c] : a) {
      auto it = b.find(x);
      if (it != b.end()) s += c * std::conj(it->second);
    }
    return s;
  }

  static double mean_length(const Poly& a) {
    if (a.empty()) return 0.0;
    double s = 0;
    for (const auto& kv : a) s += static_cast<double>(key_length(kv.first));
    return s / static_cast<double>(a.size());
  }

  static double l1(const Poly& a) {
    double s = 0;
    for (const auto& kv : a) s += std::abs(kv.second);
    return s;
  }

  // moments[k-1] = trace((x*x)^k) for k <= depth while powers stay under cap;
  // l1_powers[k-1] = ||(x*x)^k||_1.
  void run(const Poly& x, int depth, std::size_t cap, std::vector<double>& moments,
           std::vector<double>& l1_powers) const {
    moments.push_back(inner(x, x).real());
    // bounds both the number of pairwise products and the letters they occupy
    auto affordable = [cap](const Poly& a, const Poly& b) {
      double pairs = static_cast<double>(a.size()) * static_cast<double>(b.size());
      double letters = pairs * (mean_length(a) + mean_length(b));
      return pairs <= 64.0 * static_cast<double>(cap) && letters <= 64.0 * static_cast<double>(cap);
    };
    Poly xs = star(x);
    if (!affordable(xs, x)) return;
    Poly y = product(xs, x);
    if (y.size() > cap) return;
    std::vector<Poly> pw{Poly{}, y};
    l1_powers.push_back(l1(y));
    for (int k = 2; k <= depth; ++k) {
      int half = (k + 1) / 2;
      while (static_cast<int>(pw.size()) <= half) {
        if (!affordable(pw.back(), y)) return;
        Poly next = product(pw.back(), y);
        if (next.size() > cap) return;
        l1_powers.push_back(l1(next));
        pw.push_back(std::move(next));
      }
      moments.push_back(k % 2 == 0 ? inner(pw[k / 2], pw[k / 2]).real() : inner(pw[half], pw[half - 1]).real());
    }
  }
};

struct WordMul {
  Word operator()(const Word& a, const Word& b) const {
    Word c = a;
    append_reduced(c, b);
    return c;
  }
};
struct WordInv {
  Word operator()(const Word& a) const { return invert_word(a); }
};

using WordEngine = PowerEngine<Word, WordHash, WordMul, WordInv>;

WordEngine::Poly to_poly(const WordPoly& x, bool absolute) {
  WordEngine::Poly p;
  for (const auto& [w, c] : x.terms) p[w] += absolute ? Complex(std::abs(c)) : c;
  return p;
}

bool nonnegative_real(const WordPoly& x) {
  return std::all_of(x.terms.begin(), x.terms.end(),
                     [](const auto& t) { return t.second.imag() == 0.0 && t.second.real() >= 0.0; });
}

WordPoly abs_poly(const WordPoly& x) {
  WordPoly y = x;
  for (auto& t : y.terms) t.second = std::abs(t.second);
  return y;
}

double l1_of(const WordPoly& x) {
  double s = 0;
  for (const auto& t : x.terms) s += std::abs(t.second);
  return s;
}

WordPoly scaled(const WordPoly& x, double s) {
  WordPoly y = x;
  for (auto& t : y.terms) t.second /= s;
  return y;
}

}  // namespace

namespace freegroup {

namespace {

struct M2 {
  Complex a{0}, b{0}, c{0}, d{0};
  M2 operator+(const M2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  M2 operator-(const M2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  M2 operator*(const M2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  M2& operator+=(const M2& o) { return *this = *this + o; }
};

std::vector<double> nn_series(const WordPoly& x, int depth) {
  // Two phases: phase 0 multiplies by x*, phase 1 by x. T_t moves along letter t.
  std::map<std::int32_t, Complex> coef;
  Complex ce = 0;
  for (const auto& [w, c] : x.terms) {
    if (w.empty()) {
      ce += c;
    } else {
      if (w.size() != 1) throw std::logic_error("nearest_neighbour_moments needs words of length <= 1");
      coef[w[0]] += c;
    }
  }
  auto at = [&](std::int32_t t) {
    auto it = coef.find(t);
    return it == coef.end() ? Complex(0) : it->second;
  };
  std::vector<std::int32_t> letters;
  for (std::int32_t l = 1; l <= x.rank; ++l)
    if (at(l) != Complex(0) || at(-l) != Complex(0)) {
      letters.push_back(l);
      letters.push_back(-l);
    }
  std::size_t L = letters.size();
  std::vector<M2> T(L);
  std::vector<std::size_t> inv(L);
  for (std::size_t i = 0; i < L; ++i) {
    T[i].b = std::conj(at(-letters[i]));
    T[i].c = at(letters[i]);
    inv[i] = i ^ 1;
  }
  M2 Te;
  Te.b = std::conj(ce);
  Te.c = ce;

  std::size_t N = 2 * static_cast<std::size_t>(depth) + 1;
  std::vector<std::vector<M2>> F(L, std::vector<M2>(N)), Q(L, std::vector<M2>(N));
  std::vector<M2> P(N);
  for (std::size_t n = 1; n < N; ++n) {
    if (n >= 2) {
      std::size_t j = n - 1;
      M2 p;
      for (std::size_t t = 0; t < L; ++t) p += T[t] * F[inv[t]][j - 1];
      P[j] = p;
      for (std::size_t s = 0; s < L; ++s) Q[s][j] = P[j] - T[s] * F[inv[s]][j - 1];
    }
    for (std::size_t s = 0; s < L; ++s) {
      M2 f = Te * F[s][n - 1];
      if (n == 1) f += T[s];
      for (std::size_t j = 2; j + 1 <= n; ++j) f += Q[s][j] * F[s][n - j];
      F[s][n] = f;
    }
  }
  if (N >= 2) {
    M2 p;
    for (std::size_t t = 0; t < L; ++t) p += T[t] * F[inv[t]][N - 2];
    P[N - 1] = p;
  }
  std::vector<M2> G(N);
  G[0].a = G[0].d = 1;
  for (std::size_t n = 1; n < N; ++n) {
    M2 g = Te * G[n - 1];
    for (std::size_t j = 2; j <= n; ++j) g += P[j] * G[n - j];
    G[n] = g;
  }
  std::vector<double> m(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k) m[k - 1] = G[2 * static_cast<std::size_t>(k)].a.real();
  return m;
}

}  // namespace

MomentSequence nearest_neighbour_moments(const WordPoly& x, int depth) {
  MomentSequence out;
  out.method = "free-first-passage";
  out.moments = nn_series(x, depth);
  std::vector<double> absm = nonnegative_real(x) ? out.moments : nn_series(abs_poly(x), depth);
  for (int k = 1; k <= depth; ++k) out.errors.push_back(moment_error(absm[k - 1], k));
  return out;
}

MomentSequence explicit_moments(const WordPoly& x, int depth, std::size_t cap) {
  MomentSequence out;
  out.method = "free-explicit";
  WordEngine eng{};
  std::vector<double> l1s;
  eng.run(to_poly(x, false), depth, cap, out.moments, l1s);
  std::vector<double> absm;
  if (nonnegative_real(x)) {
    absm = out.moments;
  } else {
    std::vector<double> ignore;
    eng.run(to_poly(x, true), static_cast<int>(out.moments.size()), cap, absm, ignore);
  }
  out.moments.resize(std::min(out.moments.size(), absm.size()));
  for (std::size_t k = 1; k <= out.moments.size(); ++k)
    out.errors.push_back(moment_error(absm[k - 1], static_cast<int>(k)));
  return out;
}

namespace {

struct Trie {
  std::vector<int> parent{-1};
  std::vector<std::int32_t> letter{0};
  std::vector<double> mass{0.0};

  explicit Trie(const std::vector<std::pair<Word, double>>& words, int rank) {
    std::unordered_map<std::uint64_t, int> child;
    std::uint64_t width = 2 * static_cast<std::uint64_t>(rank) + 1;
    for (const auto& [w, m] : words) {
      int node = 0;
      for (auto l : w) {
        std::uint64_t key = static_cast<std::uint64_t>(node) * width + static_cast<std::uint64_t>(l + rank);
        auto [it, fresh] = child.try_emplace(key, static_cast<int>(parent.size()));
        if (fresh) {
          parent.push_back(node);
          letter.push_back(l);
          mass.push_back(0.0);
        }
        node = it->second;
      }
      mass[node] += m;
    }
  }

  // sup over prefixes p of sum_g m(g) r^{n(g) - 2 n(lcp(g, p))}
  double sup(const std::vector<double>& logr, std::vector<double>& logw, std::vector<double>& s) const {
    std::size_t n = parent.size();
    logw.assign(n, 0.0);
    s.assign(n, 0.0);
    for (std::size_t v = 1; v < n; ++v) logw[v] = logw[parent[v]] + logr[std::abs(letter[v]) - 1];
    for (std::size_t v = 0; v < n; ++v) s[v] = mass[v] * std::exp(logw[v]);
    for (std::size_t v = n; v-- > 1;) s[parent[v]] += s[v];
    std::vector<double>& acc = logw;  // reuse: logw no longer needed after we cache exp(-2 logw)
    std::vector<double> inv_w2(n);
    for (std::size_t v = 0; v < n; ++v) inv_w2[v] = std::exp(-2.0 * logw[v]);
    double best = s[0];
    acc[0] = 0.0;
    for (std::size_t v = 1; v < n; ++v) {
      int p = parent[v];
      acc[v] = acc[p] + inv_w2[p] * (s[p] - s[v]);
      double val = acc[v] + inv_w2[v] * s[v];
      if (!(val <= best)) best = val;  // also catches NaN/inf as "worse"
    }
    return best;
  }
};

struct SchurProblem {
  Trie row, col;
  int rank;
  std::vector<double> weights;  // total coefficient mass per letter, used by the AO family
  mutable std::vector<double> buf1, buf2;

  explicit SchurProblem(const WordPoly& x)
      : row(collect(x, false), x.rank), col(collect(x, true), x.rank), rank(x.rank), weights(x.rank, 0.0) {
    for (const auto& [w, c] : x.terms) {
      if (w.empty()) continue;
      double m = std::abs(c) / static_cast<double>(w.size());
      for (auto l : w) weights[std::abs(l) - 1] += m;
    }
  }

  static std::vector<std::pair<Word, double>> collect(const WordPoly& x, bool inverse) {
    std::vector<std::pair<Word, double>> out;
    for (const auto& [w, c] : x.terms) out.emplace_back(inverse ? invert_word(w) : w, std::abs(c));
    return out;
  }

  double eval(const std::vector<double>& logr) const {
    double a = row.sup(logr, buf1, buf2);
    double b = col.sup(logr, buf1, buf2);
    double v = std::sqrt(a * b) * (1 + 1e-12);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  std::size_t nodes() const { return row.parent.size() + col.parent.size(); }
};

template <class F>
double golden(F&& f, double lo, double hi, int iters, double& argbest) {
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::min(fc, fd);
  argbest = fc <= fd ? c : d;
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
      if (fc < best) best = fc, argbest = c;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
      if (fd < best) best = fd, argbest = d;
    }
  }
  return best;
}

}  // namespace

double schur_bound_with_weights(const WordPoly& x, const std::vector<double>& r) {
  if (static_cast<int>(r.size()) != x.rank) throw UsageError("schur weights must have one entry per letter");
  std::vector<double> logr(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0 && r[i] <= 1)) throw UsageError("schur weights must lie in (0,1]");
    logr[i] = std::log(r[i]);
  }
  return SchurProblem(x).eval(logr);
}

double schur_bound(const WordPoly& x) {
  if (x.terms.empty()) return 0.0;
  SchurProblem pb(x);
  std::size_t R = static_cast<std::size_t>(x.rank);
  std::vector<double> logr(R, 0.0);
  double best = pb.eval(logr);  // r = 1 reproduces the l1 norm
  std::vector<double> best_logr = logr;

  auto consider = [&](const std::vector<double>& lr) {
    double v = pb.eval(lr);
    if (v < best) {
      best = v;
      best_logr = lr;
    }
    return v;
  };

  double arg = 0;
  golden([&](double u) { return consider(std::vector<double>(R, u)); }, -8.0, 0.0, 40, arg);

  auto ao = [&](double logt) {
    double t = std::exp(logt);
    std::vector<double> lr(R, 0.0);
    for (std::size_t l = 0; l < R; ++l) {
      double w = pb.weights[l];
      if (w > 0) lr[l] = std::log(std::max((std::sqrt(t * t + w * w) - t) / w, 1e-300));
    }
    return lr;
  };
  golden([&](double lt) { return consider(ao(lt)); }, -14.0, 6.0, 50, arg);

  // coordinate refinement when affordable
  if (R <= 64 && pb.nodes() * R <= 4'000'000) {
    for (int round = 0; round < 3; ++round) {
      for (std::size_t l = 0; l < R; ++l) {
        if (pb.weights[l] == 0) continue;
        std::vector<double> lr = best_logr;
        double centre = best_logr[l];
        golden(
            [&](double u) {
              lr[l] = u;
              return consider(lr);
            },
            std::max(-10.0, centre - 2.0), std::min(0.0, centre + 2.0), 20, arg);
      }
    }
  }
  return best;
}

}  // namespace freegroup

namespace {

// sup over the circle of |sum_n c_n e^{i n theta}|: grid maximum and a Lipschitz-corrected upper bound.
std::pair<double, double> circle_bounds(const std::vector<std::pair<long, Complex>>& terms, int grid) {
  double lip = 0;
  for (const auto& [n, c] : terms) lip += std::abs(c) * std::abs(static_cast<double>(n));
  if (lip == 0) {
    Complex s = 0;
    for (const auto& t : terms) s += t.second;
    return {std::abs(s), std::abs(s)};
  }
  int g = std::max(grid, 8);
  double best = 0;
  for (int i = 0; i < g; ++i) {
    double th = 2 * std::numbers::pi * i / g;
    Complex s = 0;
    for (const auto& [n, c] : terms) s += c * std::polar(1.0, th * static_cast<double>(n));
    best = std::max(best, std::abs(s));
  }
  return {best, best + lip * std::numbers::pi / g};
}

WordPoly free_part(const Group& g, const AlgebraElement& a) {
  WordPoly p;
  p.rank = g.rank();
  std::map<Word, Complex> acc;
  for (const auto& [x, c] : a.terms()) {
    auto w = g.free_letters(x);
    acc[Word(w.begin(), w.end())] += c;
  }
  for (auto& [w, c] : acc)
    if (c != Complex(0)) p.terms.emplace_back(w, c);
  return p;
}

// a = sum_c a_c (x) z^c  ->  a_chi = sum_c chi(z)^c a_c for each character of Z/m.
std::vector<WordPoly> character_parts(const Group& g, const AlgebraElement& a) {
  int m = g.modulus();
  std::vector<std::map<Word, Complex>> acc(static_cast<std::size_t>(m));
  for (const auto& [x, c] : a.terms()) {
    auto w = g.free_letters(x);
    Word word(w.begin(), w.end());
    int r = g.residue_of(x);
    for (int j = 0; j < m; ++j) {
      double ang = 2 * std::numbers::pi * static_cast<double>((static_cast<long>(j) * r) % m) / m;
      Complex chi = m == 2 ? Complex(r * j % 2 ? -1.0 : 1.0) : std::polar(1.0, ang);
      acc[j][word] += c * chi;
    }
  }
  std::vector<WordPoly> out;
  for (auto& mp : acc) {
    WordPoly p;
    p.rank = g.rank();
    for (auto& [w, c] : mp)
      if (std::abs(c) > 0) p.terms.emplace_back(w, c);
    out.push_back(std::move(p));
  }
  return out;
}

// Everything we know about one free-group polynomial, after moving to the subgroup basis.
struct FreeAnalysis {
  MomentSequence moments;  // for x / scale
  double scale = 1.0;
  double upper = std::numeric_limits<double>::infinity();
  double exact_lower = 0.0;  // from characters when the subgroup is cyclic
  std::string upper_method;
};

// When the support words (up to inversion) are as many as the rank of the subgroup they generate,
// they form a free basis of it (free groups of finite rank are Hopfian) and x is nearest-neighbour
// in that basis. Otherwise fall back to the Stallings basis.
WordPoly support_as_basis(const WordPoly& p) {
  std::vector<Word> gens;
  for (const auto& [w, c] : p.terms)
    if (!w.empty()) gens.push_back(w);
  SubgroupBasis basis(gens, p.rank);
  std::vector<Word> distinct;
  for (const auto& w : gens) {
    Word inv = invert_word(w);
    distinct.push_back(std::min(w, inv));
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  WordPoly out;
  if (static_cast<int>(distinct.size()) == basis.rank()) {
    out.rank = basis.rank();
    for (const auto& [w, c] : p.terms) {
      if (w.empty()) {
        out.terms.emplace_back(Word{}, c);
        continue;
      }
      Word inv = invert_word(w);
      bool flip = inv < w;
      auto idx = static_cast<std::int32_t>(
          std::lower_bound(distinct.begin(), distinct.end(), flip ? inv : w) - distinct.begin() + 1);
      out.terms.emplace_back(Word{flip ? -idx : idx}, c);
    }
    return out;
  }
  out.rank = basis.rank();
  for (const auto& [w, c] : p.terms) out.terms.emplace_back(basis.rewrite(w), c);
  return out;
}

FreeAnalysis analyse_free(const WordPoly& raw, int depth, const NormBudget& budget, bool want_upper) {
  FreeAnalysis fa;
  fa.scale = l1_of(raw);
  if (fa.scale == 0) {
    fa.moments.moments.assign(static_cast<std::size_t>(depth), 0.0);
    fa.moments.errors.assign(static_cast<std::size_t>(depth), 0.0);
    fa.moments.method = "zero";
    fa.upper = 0;
    fa.upper_method = "zero";
    fa.scale = 1.0;
    return fa;
  }
  WordPoly x = support_as_basis(scaled(raw, fa.scale));
  bool nn = std::all_of(x.terms.begin(), x.terms.end(), [](const auto& t) { return t.first.size() <= 1; });
  if (x.rank <= 1) {
    std::vector<std::pair<long, Complex>> terms;
    for (const auto& [w, c] : x.terms) {
      long n = 0;
      for (auto l : w) n += l > 0 ? 1 : -1;
      terms.emplace_back(n, c);
    }
    auto [lo, hi] = circle_bounds(terms, std::max(budget.character_grid, 64));
    fa.exact_lower = lo * fa.scale;
    fa.upper = hi * fa.scale;
    fa.upper_method = "cyclic-subgroup-characters";
  }
  if (nn) {
    x.rank = std::max(x.rank, 1);
    fa.moments = freegroup::nearest_neighbour_moments(x, depth);
  } else {
    fa.moments = freegroup::explicit_moments(x, depth, budget.support_cap);
  }
  if (want_upper && budget.schur && x.rank >= 2) {
    double s = freegroup::schur_bound(x) * fa.scale;
    if (s < fa.upper) {
      fa.upper = s;
      fa.upper_method = "schur";
    }
  }
  return fa;
}

// Lower bounds from moments of x/scale.
std::vector<double> bounds_from_moments(const MomentSequence& ms, double scale) {
  std::vector<double> out;
  double best = 0, prev_hi = 1.0;  // trace((a*a)^0) = 1
  for (std::size_t k = 1; k <= ms.moments.size(); ++k) {
    double lo = std::max(ms.moments[k - 1] - ms.errors[k - 1], 0.0);
    double root = std::pow(lo, 1.0 / (2.0 * static_cast<double>(k)));
    double ratio = prev_hi > 0 ? std::sqrt(lo / prev_hi) : 0.0;
    best = std::max({best, root, ratio});
    out.push_back(best * scale);
    prev_hi = ms.moments[k - 1] + ms.errors[k - 1];
  }
  return out;
}

MomentSequence generic_moments(const Group& g, const AlgebraElement& a, int depth, std::size_t cap, double scale,
                               std::vector<double>* l1_powers = nullptr) {
  auto mul = [&g](const Element& x, const Element& y) { return g.multiply(x, y); };
  auto inv = [&g](const Element& x) { return g.inverse(x); };
  PowerEngine<Element, ElementHash, decltype(mul), decltype(inv)> eng{mul, inv};
  using Poly = decltype(eng)::Poly;
  Poly x, xa;
  bool positive = true;
  for (const auto& [e, c] : a.terms()) {
    x[e] += c / scale;
    xa[e] += std::abs(c) / scale;
    positive = positive && c.imag() == 0 && c.real() >= 0;
  }
  MomentSequence out;
  out.method = "explicit-powers";
  std::vector<double> l1s, absm, ignore;
  eng.run(x, depth, cap, out.moments, l1s);
  if (positive) {
    absm = out.moments;
  } else {
    eng.run(xa, static_cast<int>(out.moments.size()), cap, absm, ignore);
  }
  out.moments.resize(std::min(out.moments.size(), absm.size()));
  for (std::size_t k = 1; k <= out.moments.size(); ++k)
    out.errors.push_back(moment_error(absm[k - 1], static_cast<int>(k)));
  if (l1_powers) *l1_powers = l1s;
  return out;
}

// Character bounds for amenable groups: the lower bound is a max over characters (valid since
// one-dimensional representations are weakly contained in the regular one); the upper bound is
// exact for abelian groups up to the grid's Lipschitz slack.
std::pair<double, double> amenable_character_bounds(const Group& g, const AlgebraElement& a, int grid) {
  double inf = std::numeric_limits<double>::infinity();
  if (a.empty()) return {0.0, 0.0};
  switch (g.kind()) {
    case GroupKind::Cyclic: {
      int m = g.modulus();
      double best = 0;
      for (int j = 0; j < m; ++j) {
        Complex s = 0;
        for (const auto& [x, c] : a.terms())
          s += c * std::polar(1.0, 2 * std::numbers::pi * static_cast<double>((static_cast<long>(j) * x.code()[0]) % m) / m);
        best = std::max(best, std::abs(s));
      }
      double slack = 1e-12 * a.l1_norm();
      return {std::max(best - slack, 0.0), best + slack};
    }
    case GroupKind::Integers:
    case GroupKind::Lattice: {
      int d = static_cast<int>(a.terms().front().first.code().size());
      double points = std::max(64.0, 4e7 / static_cast<double>(a.size()));
      int per = static_cast<int>(std::floor(std::pow(std::min(points, 1048576.0), 1.0 / d)));
      per = std::max(2, std::min(per, grid));
      double lip = 0;
      for (const auto& [x, c] : a.terms()) {
        double n1 = 0;
        for (auto v : x.code()) n1 += std::abs(static_cast<double>(v));
        lip += std::abs(c) * n1;
      }
      std::vector<int> idx(static_cast<std::size_t>(d), 0);
      double best = 0;
      while (true) {
        Complex s = 0;
        for (const auto& [x, c] : a.terms()) {
          double ph = 0;
          for (int i = 0; i < d; ++i) ph += 2 * std::numbers::pi * idx[i] / per * x.code()[i];
          s += c * std::polar(1.0, ph);
        }
        best = std::max(best, std::abs(s));
        int i = 0;
        while (i < d && ++idx[i] == per) idx[i++] = 0;
        if (i == d) break;
      }
      return {best, best + lip * std::numbers::pi / per};
    }
    case GroupKind::Lamplighter: {
      double best = 0;
      std::vector<std::pair<long, Complex>> even, odd;
      for (const auto& [x, c] : a.terms()) {
        bool parity = (x.code().size() - 1) % 2;
        (parity ? odd : even).emplace_back(x.code()[0], c);
      }
      for (double sign : {1.0, -1.0}) {
        std::vector<std::pair<long, Complex>> terms = even;
        for (const auto& [n, c] : odd) terms.emplace_back(n, sign * c);
        best = std::max(best, circle_bounds(terms, std::min(grid, 256)).first);
      }
      return {best, inf};
    }
    default: return {0.0, inf};
  }
}

}  // namespace

MomentSequence trace_moments(const Group& g, const AlgebraElement& a, int depth, const NormBudget& budget) {
  if (depth < 1) throw UsageError("moment depth must be >= 1");
  auto unscale = [](MomentSequence ms, double s) {
    for (std::size_t k = 1; k <= ms.moments.size(); ++k) {
      double f = std::pow(s, 2.0 * static_cast<double>(k));
      ms.moments[k - 1] *= f;
      ms.errors[k - 1] *= f;
    }
    return ms;
  };
  if (g.kind() == GroupKind::Free) {
    FreeAnalysis fa = analyse_free(free_part(g, a), depth, budget, false);
    return unscale(fa.moments, fa.scale);
  }
  if (g.kind() == GroupKind::FreeTimesCyclic) {
    auto parts = character_parts(g, a);
    MomentSequence out;
    out.method = "characters+free";
    std::size_t depth_reached = static_cast<std::size_t>(depth);
    std::vector<MomentSequence> seqs;
    for (const auto& p : parts) {
      FreeAnalysis fa = analyse_free(p, depth, budget, false);
      seqs.push_back(unscale(fa.moments, fa.scale));
      depth_reached = std::min(depth_reached, seqs.back().moments.size());
    }
    double m = static_cast<double>(parts.size());
    out.moments.assign(depth_reached, 0.0);
    out.errors.assign(depth_reached, 0.0);
    for (const auto& s : seqs)
      for (std::size_t k = 0; k < depth_reached; ++k) {
        out.moments[k] += s.moments[k] / m;
        out.errors[k] += s.errors[k] / m;
      }
    return out;
  }
  double s = a.l1_norm();
  if (s == 0) {
    MomentSequence z;
    z.method = "zero";
    z.moments.assign(static_cast<std::size_t>(depth), 0.0);
    z.errors.assign(static_cast<std::size_t>(depth), 0.0);
    return z;
  }
  return unscale(generic_moments(g, a, depth, budget.support_cap, s), s);
}

LowerBoundSequence norm_lower_bound(const Group& g, const AlgebraElement& a, int m, const NormBudget& budget) {
  if (m < 1) throw UsageError("norm_lower_bound requires m >= 1");
  LowerBoundSequence out;
  auto pad = [&](std::vector<double> v) {
    out.exact_depth = static_cast<int>(v.size());
    double last = v.empty() ? 0.0 : v.back();
    v.resize(static_cast<std::size_t>(m), last);
    out.values = std::move(v);
  };
  if (g.kind() == GroupKind::Free) {
    FreeAnalysis fa = analyse_free(free_part(g, a), m, budget, false);
    out.method = fa.moments.method;
    pad(bounds_from_moments(fa.moments, fa.scale));
    return out;
  }
  if (g.kind() == GroupKind::FreeTimesCyclic) {
    std::vector<double> best(static_cast<std::size_t>(m), 0.0);
    int reached = m;
    for (const auto& p : character_parts(g, a)) {
      FreeAnalysis fa = analyse_free(p, m, budget, false);
      auto v = bounds_from_moments(fa.moments, fa.scale);
      reached = std::min(reached, static_cast<int>(v.size()));
      double last = v.empty() ? 0.0 : v.back();
      v.resize(static_cast<std::size_t>(m), last);
      for (int k = 0; k < m; ++k) best[k] = std::max(best[k], v[k]);
      out.method = "characters+" + fa.moments.method;
    }
    out.values = best;
    out.exact_depth = reached;
    return out;
  }
  double s = a.l1_norm();
  if (s == 0) {
    out.method = "zero";
    pad(std::vector<double>(static_cast<std::size_t>(m), 0.0));
    return out;
  }
  MomentSequence ms = generic_moments(g, a, m, budget.support_cap, s);
  out.method = ms.method;
  pad(bounds_from_moments(ms, s));
  return out;
}

double norm_upper_bound(const Group& g, const AlgebraElement& a, int m, const NormBudget& budget) {
  if (m < 1) throw UsageError("norm_upper_bound requires m >= 1");
  double s = a.l1_norm();
  if (s == 0) return 0.0;
  std::vector<double> l1s;
  generic_moments(g, a, 2 * m, budget.support_cap, s, &l1s);
  double best = 1.0;  // ||a/s||_1
  for (std::size_t k = 1; k <= l1s.size() && static_cast<int>(k) <= m; ++k)
    best = std::min(best, std::pow(l1s[k - 1], 1.0 / (2.0 * static_cast<double>(k))) * (1 + 1e-13));
  return best * s;
}

double schur_upper_bound(const Group& g, const AlgebraElement& a) {
  NormBudget nb;
  if (g.kind() == GroupKind::Free) return analyse_free(free_part(g, a), 1, nb, true).upper;
  if (g.kind() == GroupKind::FreeTimesCyclic) {
    double best = 0;
    for (const auto& p : character_parts(g, a)) best = std::max(best, analyse_free(p, 1, nb, true).upper);
    return best;
  }
  return std::numeric_limits<double>::infinity();
}

NormEstimate estimate_norm(const Group& g, const AlgebraElement& a, const NormBudget& budget) {
  budget.validate();
  NormEstimate est;
  double l1 = a.l1_norm();
  est.upper = l1;
  est.upper_method = "l1";
  auto take_upper = [&](double v, const std::string& how) {
    if (v < est.upper) {
      est.upper = v;
      est.upper_method = how;
    }
  };
  auto take_lower = [&](double v, const std::string& how) {
    if (v > est.lower) {
      est.lower = v;
      est.lower_method = how;
    }
  };
  if (l1 == 0) {
    est.lower_method = "zero";
    est.upper_method = "zero";
  } else if (g.has_free_factor()) {
    std::vector<WordPoly> parts;
    if (g.kind() == GroupKind::Free) {
      parts.push_back(free_part(g, a));
    } else {
      parts = character_parts(g, a);
    }
    double lo = 0, hi = 0;
    std::string lo_how = "moments", hi_how = "l1";
    for (const auto& p : parts) {
      FreeAnalysis fa = analyse_free(p, budget.max_moment, budget, true);
      auto v = bounds_from_moments(fa.moments, fa.scale);
      double plo = std::max(v.empty() ? 0.0 : v.back(), fa.exact_lower);
      if (plo > lo) {
        lo = plo;
        lo_how = fa.exact_lower >= plo ? "cyclic-subgroup-characters" : fa.moments.method;
      }
      double phi = std::min(fa.upper, l1_of(p));
      if (phi >= hi) {
        hi = phi;
        hi_how = fa.upper <= l1_of(p) ? fa.upper_method : "l1";
      }
    }
    take_lower(lo, lo_how);
    take_upper(hi, hi_how);
    if (a.size() <= 2000) take_upper(norm_upper_bound(g, a, 1, budget), "l1-power");
  } else {
    auto seq = norm_lower_bound(g, a, budget.max_moment, budget);
    take_lower(seq.values.back(), seq.method);
    auto [clo, chi] = amenable_character_bounds(g, a, budget.character_grid);
    take_lower(clo, "characters");
    take_upper(chi, "characters");
    take_upper(norm_upper_bound(g, a, budget.max_moment, budget), "l1-power");
  }
  double led = a.dropped();
  if (led > 0) {
    est.lower = std::max(0.0, est.lower - led);
    est.upper += led;
  }
  return est;
}

}  // namespace gwalk
