#include "gwalk/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace gwalk {

AlgebraElement AlgebraElement::from_terms(std::vector<Term> terms, double dropped) {
  for (const auto& t : terms)
    if (!std::isfinite(t.second.real()) || !std::isfinite(t.second.imag()))
      throw UsageError("algebra coefficients must be finite");
  std::stable_sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.first < y.first; });
  AlgebraElement a;
  a.dropped_ = dropped;
  for (auto& t : terms) {
    if (!a.terms_.empty() && a.terms_.back().first == t.first) {
      a.terms_.back().second += t.second;
    } else {
      a.terms_.push_back(std::move(t));
    }
  }
  std::erase_if(a.terms_, [](const Term& t) { return t.second == Complex(0.0); });
  return a;
}

AlgebraElement AlgebraElement::basis(const Element& g) { return from_terms({{g, Complex(1.0)}}); }

Complex AlgebraElement::coefficient(const Element& g) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), g,
                             [](const Term& t, const Element& x) { return t.first < x; });
  return it != terms_.end() && it->first == g ? it->second : Complex(0.0);
}

ElementSet AlgebraElement::support() const {
  ElementSet s;
  s.reserve(terms_.size());
  for (const auto& t : terms_) s.push_back(t.first);
  return s;
}

double AlgebraElement::l1_norm() const {
  double s = 0;
  for (const auto& t : terms_) s += std::abs(t.second);
  return s;
}

double AlgebraElement::l2_norm_sq() const {
  double s = 0;
  for (const auto& t : terms_) s += std::norm(t.second);
  return s;
}

bool AlgebraElement::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.second.imag() == 0.0; });
}

namespace {

AlgebraElement combine(const AlgebraElement& a, const AlgebraElement& b, double sign) {
  std::vector<AlgebraElement::Term> terms(a.terms());
  for (const auto& [x, c] : b.terms()) terms.emplace_back(x, sign * c);
  return AlgebraElement::from_terms(std::move(terms), a.dropped() + b.dropped());
}

template <class F>
AlgebraElement relabel(const AlgebraElement& a, F&& f) {
  std::vector<AlgebraElement::Term> terms;
  terms.reserve(a.size());
  for (const auto& [x, c] : a.terms()) terms.emplace_back(f(x), c);
  return AlgebraElement::from_terms(std::move(terms), a.dropped());
}

}  // namespace

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b) { return combine(a, b, 1.0); }
AlgebraElement subtract(const AlgebraElement& a, const AlgebraElement& b) { return combine(a, b, -1.0); }

AlgebraElement scale(Complex lambda, const AlgebraElement& a) {
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [x, c] : a.terms()) terms.emplace_back(x, lambda * c);
  return AlgebraElement::from_terms(std::move(terms), std::abs(lambda) * a.dropped());
}

AlgebraElement multiply(const Group& g, const AlgebraElement& a, const AlgebraElement& b) {
  std::unordered_map<Element, Complex, ElementHash> acc;
  acc.reserve(a.size() * b.size());
  for (const auto& [x, cx] : a.terms())
    for (const auto& [y, cy] : b.terms()) acc[g.multiply(x, y)] += cx * cy;
  std::vector<AlgebraElement::Term> terms(acc.begin(), acc.end());
  // ||ab - a'b'|| <= ||a-a'|| ||b|| + ||a'|| ||b-b'||, all in l1
  double ledger = a.dropped() * (b.l1_norm() + b.dropped()) + a.l1_norm() * b.dropped();
  return AlgebraElement::from_terms(std::move(terms), ledger);
}

AlgebraElement adjoint(const Group& g, const AlgebraElement& a) {
  std::vector<AlgebraElement::Term> terms;
  terms.reserve(a.size());
  for (const auto& [x, c] : a.terms()) terms.emplace_back(g.inverse(x), std::conj(c));
  return AlgebraElement::from_terms(std::move(terms), a.dropped());
}

AlgebraElement absolute(const AlgebraElement& a) {
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [x, c] : a.terms()) terms.emplace_back(x, Complex(std::abs(c)));
  return AlgebraElement::from_terms(std::move(terms), a.dropped());
}

Complex trace(const Group& g, const AlgebraElement& a) { return a.coefficient(g.identity()); }

AlgebraElement kernel_projection(const Group& g, const AlgebraElement& a) {
  std::vector<AlgebraElement::Term> terms;
  Element e = g.identity();
  for (const auto& t : a.terms())
    if (t.first != e) terms.push_back(t);
  return AlgebraElement::from_terms(std::move(terms), a.dropped());
}

AlgebraElement conjugate_action(const Group& g, const AlgebraElement& a, const Element& by) {
  Element inv = g.inverse(by);
  return relabel(a, [&](const Element& x) { return g.multiply(g.multiply(inv, x), by); });
}

AlgebraElement averaged_conjugation(const Group& g, const AlgebraElement& a, const SparseMeasure& nu) {
  std::unordered_map<Element, Complex, ElementHash> acc;
  acc.reserve(a.size() * nu.size());
  for (const auto& [q, w] : nu.atoms()) {
    Element qi = g.inverse(q);
    for (const auto& [x, c] : a.terms()) acc[g.multiply(g.multiply(qi, x), q)] += w * c;
  }
  std::vector<AlgebraElement::Term> terms(acc.begin(), acc.end());
  return AlgebraElement::from_terms(std::move(terms), a.dropped() * nu.mass() + nu.dropped() * a.l1_norm());
}

AlgebraElement truncate(const AlgebraElement& a, double floor, std::size_t cap) {
  std::vector<AlgebraElement::Term> keep;
  double lost = 0;
  for (const auto& t : a.terms()) {
    if (std::abs(t.second) < floor) {
      lost += std::abs(t.second);
    } else {
      keep.push_back(t);
    }
  }
  if (keep.size() > cap) {
    std::stable_sort(keep.begin(), keep.end(),
                     [](const auto& x, const auto& y) { return std::abs(x.second) > std::abs(y.second); });
    for (std::size_t i = cap; i < keep.size(); ++i) lost += std::abs(keep[i].second);
    keep.resize(cap);
  }
  return AlgebraElement::from_terms(std::move(keep), a.dropped() + lost);
}

double max_coefficient_distance(const AlgebraElement& a, const AlgebraElement& b) {
  double d = 0;
  for (const auto& [x, c] : a.terms()) d = std::max(d, std::abs(c - b.coefficient(x)));
  for (const auto& [x, c] : b.terms()) d = std::max(d, std::abs(c - a.coefficient(x)));
  return d;
}

void write_algebra(std::ostream& os, const Group& g, const AlgebraElement& a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g", a.dropped());
  os << "# group " << g.name() << "\n# dropped_l1 " << buf << "\n";
  for (const auto& [x, c] : a.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g", c.real(), c.imag());
    os << g.format(x) << ' ' << buf << '\n';
  }
}

AlgebraElement read_algebra(std::istream& is, const Group& g, const std::string& source) {
  std::vector<AlgebraElement::Term> terms;
  double dropped = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string key = "# dropped_l1 ";
      if (line.compare(first, key.size(), key) == 0) dropped = std::stod(line.substr(first + key.size()));
      continue;
    }
    // last two tokens are re im; a single trailing number is read as a real coefficient
    std::vector<std::pair<std::size_t, std::size_t>> tokens;
    std::size_t i = first;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.emplace_back(i, j);
      i = j;
    }
    auto number = [&](std::pair<std::size_t, std::size_t> t, double& out) {
      try {
        std::size_t used = 0;
        std::string s = line.substr(t.first, t.second - t.first);
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
      } catch (const std::exception&) {
        return false;
      }
    };
    if (tokens.size() < 2) throw UsageError(where() + "expected 'element re im'");
    double re = 0, im = 0;
    std::size_t elem_end;
    if (tokens.size() >= 3 && number(tokens[tokens.size() - 2], re) && number(tokens.back(), im)) {
      elem_end = tokens[tokens.size() - 3].second;
    } else if (number(tokens.back(), re)) {
      im = 0;
      elem_end = tokens[tokens.size() - 2].second;
    } else {
      throw UsageError(where() + "bad coefficient");
    }
    try {
      terms.emplace_back(g.parse(std::string_view(line).substr(first, elem_end - first)), Complex(re, im));
    } catch (const UsageError& e) {
      throw UsageError(where() + e.what());
    }
  }
  return AlgebraElement::from_terms(std::move(terms), dropped);
}

}  // namespace gwalk
