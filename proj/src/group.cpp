#include "gwalk/group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <deque>
#include <sstream>

namespace gwalk {
namespace {

constexpr std::string_view kFreeLetters = "abcdfghijkmnopqrsuvwxy";

std::uint32_t make_tag(GroupKind kind, int a, int b) {
  return (static_cast<std::uint32_t>(kind) + 1) << 24 | (static_cast<std::uint32_t>(a) & 0xfff) << 12 |
         (static_cast<std::uint32_t>(b) & 0xfff);
}

std::int32_t mod(std::int64_t x, int m) {
  std::int64_t r = x % m;
  return static_cast<std::int32_t>(r < 0 ? r + m : r);
}

// symmetric difference of two sorted lamp lists
std::vector<std::int32_t> sym_diff(const std::vector<std::int32_t>& f, const std::vector<std::int32_t>& g) {
  std::vector<std::int32_t> out;
  out.reserve(f.size() + g.size());
  std::set_symmetric_difference(f.begin(), f.end(), g.begin(), g.end(), std::back_inserter(out));
  return out;
}

}  // namespace

void normalize(ElementSet& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

bool set_contains(const ElementSet& set, const Element& x) {
  return std::binary_search(set.begin(), set.end(), x);
}

void append_reduced(std::vector<std::int32_t>& x, std::span<const std::int32_t> y) {
  std::size_t i = 0;
  while (i < y.size() && !x.empty() && x.back() == -y[i]) {
    x.pop_back();
    ++i;
  }
  x.insert(x.end(), y.begin() + static_cast<std::ptrdiff_t>(i), y.end());
}

std::vector<std::int32_t> invert_word(std::span<const std::int32_t> w) {
  std::vector<std::int32_t> out(w.rbegin(), w.rend());
  for (auto& v : out) v = -v;
  return out;
}

Group::Group(GroupKind kind, int rank, int dim, int modulus)
    : kind_(kind), rank_(rank), dim_(dim), modulus_(modulus) {
  switch (kind) {
    case GroupKind::Integers:
      tag_ = make_tag(kind, 1, 0);
      generators_ = {integer(1), integer(-1)};
      break;
    case GroupKind::Lattice:
      tag_ = make_tag(kind, dim, 0);
      for (int i = 0; i < dim; ++i) {
        std::vector<std::int32_t> e(dim, 0);
        e[i] = 1;
        generators_.push_back(lattice_point(e));
        e[i] = -1;
        generators_.push_back(lattice_point(e));
      }
      break;
    case GroupKind::Free:
    case GroupKind::FreeTimesCyclic:
      tag_ = make_tag(kind, rank, modulus);
      for (std::int32_t i = 1; i <= rank; ++i) {
        std::int32_t w[1] = {i};
        generators_.push_back(word(w));
        w[0] = -i;
        generators_.push_back(word(w));
      }
      if (kind == GroupKind::FreeTimesCyclic) {
        generators_.push_back(residue(1));
        if (modulus > 2) generators_.push_back(residue(modulus - 1));
      }
      break;
    case GroupKind::Cyclic:
      tag_ = make_tag(kind, 0, modulus);
      generators_.push_back(residue(1));
      if (modulus > 2) generators_.push_back(residue(modulus - 1));
      break;
    case GroupKind::Lamplighter:
      tag_ = make_tag(kind, 0, 0);
      generators_ = {lamplighter_element({}, 1), lamplighter_element({}, -1), lamplighter_element({0}, 0)};
      break;
  }
}

Group Group::integers() { return Group(GroupKind::Integers, 0, 1, 0); }

Group Group::lattice(int dim) {
  if (dim < 1 || dim > 8) throw UsageError("lattice dimension must be in [1,8]");
  return Group(GroupKind::Lattice, 0, dim, 0);
}

Group Group::free(int rank) {
  if (rank < 2 || rank > static_cast<int>(kFreeLetters.size()))
    throw UsageError("free rank must be in [2," + std::to_string(kFreeLetters.size()) + "]");
  return Group(GroupKind::Free, rank, 0, 0);
}

Group Group::free_times_cyclic(int rank, int modulus) {
  if (rank < 2 || rank > static_cast<int>(kFreeLetters.size()))
    throw UsageError("free rank must be in [2," + std::to_string(kFreeLetters.size()) + "]");
  if (modulus < 2 || modulus > 4095) throw UsageError("cyclic modulus must be in [2,4095]");
  return Group(GroupKind::FreeTimesCyclic, rank, 0, modulus);
}

Group Group::cyclic(int modulus) {
  if (modulus < 2 || modulus > 4095) throw UsageError("cyclic modulus must be in [2,4095]");
  return Group(GroupKind::Cyclic, 0, 0, modulus);
}

Group Group::lamplighter() { return Group(GroupKind::Lamplighter, 0, 0, 0); }

std::string Group::name() const {
  switch (kind_) {
    case GroupKind::Integers: return "Z";
    case GroupKind::Lattice: return dim_ == 1 ? "Z" : "Z^" + std::to_string(dim_);
    case GroupKind::Free: return "F" + std::to_string(rank_);
    case GroupKind::FreeTimesCyclic: return "F" + std::to_string(rank_) + "xZ/" + std::to_string(modulus_);
    case GroupKind::Cyclic: return "Z/" + std::to_string(modulus_);
    case GroupKind::Lamplighter: return "lamplighter";
  }
  return "?";
}

bool Group::is_amenable() const { return !has_free_factor(); }

Element Group::identity() const {
  switch (kind_) {
    case GroupKind::Integers: return Element(tag_, {0});
    case GroupKind::Lattice: return Element(tag_, std::vector<std::int32_t>(dim_, 0));
    case GroupKind::Free: return Element(tag_, {});
    case GroupKind::FreeTimesCyclic: return Element(tag_, {0});
    case GroupKind::Cyclic: return Element(tag_, {0});
    case GroupKind::Lamplighter: return Element(tag_, {0});
  }
  return {};
}

void Group::require_owned(const Element& x) const {
  if (x.tag() != tag_) throw UsageError("element does not belong to group " + name());
}

void Group::require_same(const Element& x, const Element& y) const {
  if (x.tag() != y.tag()) throw UsageError("operands belong to different groups");
  require_owned(x);
}

Element Group::multiply(const Element& x, const Element& y) const {
  require_same(x, y);
  const auto& a = x.code();
  const auto& b = y.code();
  switch (kind_) {
    case GroupKind::Integers:
    case GroupKind::Lattice: {
      std::vector<std::int32_t> c(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
      return Element(tag_, std::move(c));
    }
    case GroupKind::Free: {
      std::vector<std::int32_t> c = a;
      append_reduced(c, b);
      return Element(tag_, std::move(c));
    }
    case GroupKind::FreeTimesCyclic: {
      std::vector<std::int32_t> c = a;
      c[0] = mod(static_cast<std::int64_t>(a[0]) + b[0], modulus_);
      std::vector<std::int32_t> w(c.begin() + 1, c.end());
      append_reduced(w, std::span(b).subspan(1));
      c.resize(1);
      c.insert(c.end(), w.begin(), w.end());
      return Element(tag_, std::move(c));
    }
    case GroupKind::Cyclic:
      return Element(tag_, {mod(static_cast<std::int64_t>(a[0]) + b[0], modulus_)});
    case GroupKind::Lamplighter: {
      // (f,p)(g,q) = (f + shift_p g, p + q)
      std::vector<std::int32_t> f(a.begin() + 1, a.end());
      std::vector<std::int32_t> g(b.begin() + 1, b.end());
      for (auto& v : g) v += a[0];
      auto lamps = sym_diff(f, g);
      std::vector<std::int32_t> c;
      c.reserve(lamps.size() + 1);
      c.push_back(a[0] + b[0]);
      c.insert(c.end(), lamps.begin(), lamps.end());
      return Element(tag_, std::move(c));
    }
  }
  return {};
}

Element Group::inverse(const Element& x) const {
  require_owned(x);
  const auto& a = x.code();
  switch (kind_) {
    case GroupKind::Integers:
    case GroupKind::Lattice: {
      std::vector<std::int32_t> c(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) c[i] = -a[i];
      return Element(tag_, std::move(c));
    }
    case GroupKind::Free: return Element(tag_, invert_word(a));
    case GroupKind::FreeTimesCyclic: {
      std::vector<std::int32_t> c{mod(-static_cast<std::int64_t>(a[0]), modulus_)};
      auto w = invert_word(std::span(a).subspan(1));
      c.insert(c.end(), w.begin(), w.end());
      return Element(tag_, std::move(c));
    }
    case GroupKind::Cyclic: return Element(tag_, {mod(-static_cast<std::int64_t>(a[0]), modulus_)});
    case GroupKind::Lamplighter: {
      std::vector<std::int32_t> c = a;
      c[0] = -a[0];
      for (std::size_t i = 1; i < c.size(); ++i) c[i] -= a[0];
      return Element(tag_, std::move(c));
    }
  }
  return {};
}

Element Group::conjugate(const Element& s, const Element& q) const {
  return multiply(multiply(inverse(q), s), q);
}

Element Group::power(const Element& x, long n) const {
  Element base = n < 0 ? inverse(x) : x;
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  Element acc = identity();
  while (k) {
    if (k & 1) acc = multiply(acc, base);
    k >>= 1;
    if (k) base = multiply(base, base);
  }
  return acc;
}

bool Group::is_identity(const Element& x) const { return x == identity(); }

Element Group::integer(std::int32_t x) const {
  if (kind_ != GroupKind::Integers && !(kind_ == GroupKind::Lattice && dim_ == 1))
    throw UsageError("integer() requires Z");
  return Element(tag_, {x});
}

Element Group::lattice_point(std::vector<std::int32_t> coords) const {
  if (kind_ == GroupKind::Integers && coords.size() == 1) return Element(tag_, std::move(coords));
  if (kind_ != GroupKind::Lattice || static_cast<int>(coords.size()) != dim_)
    throw UsageError("lattice point has wrong dimension for " + name());
  return Element(tag_, std::move(coords));
}

Element Group::word(std::span<const std::int32_t> letters, std::int32_t res) const {
  if (!has_free_factor()) throw UsageError("word() requires a free factor");
  std::vector<std::int32_t> w;
  for (std::int32_t l : letters) {
    if (l == 0 || std::abs(l) > rank_) throw UsageError("letter out of range for " + name());
    std::int32_t one[1] = {l};
    append_reduced(w, one);
  }
  if (kind_ == GroupKind::Free) {
    if (res != 0) throw UsageError("free group has no cyclic part");
    return Element(tag_, std::move(w));
  }
  std::vector<std::int32_t> c{mod(res, modulus_)};
  c.insert(c.end(), w.begin(), w.end());
  return Element(tag_, std::move(c));
}

Element Group::residue(std::int32_t c) const {
  if (kind_ == GroupKind::Cyclic) return Element(tag_, {mod(c, modulus_)});
  if (kind_ == GroupKind::FreeTimesCyclic) return Element(tag_, {mod(c, modulus_)});
  throw UsageError("residue() requires a cyclic factor");
}

Element Group::lamplighter_element(std::vector<std::int32_t> lamps, std::int32_t position) const {
  if (kind_ != GroupKind::Lamplighter) throw UsageError("lamplighter_element() requires the lamplighter");
  std::sort(lamps.begin(), lamps.end());
  // repeated lamps toggle off in pairs
  std::vector<std::int32_t> odd;
  for (std::size_t i = 0; i < lamps.size();) {
    std::size_t j = i;
    while (j < lamps.size() && lamps[j] == lamps[i]) ++j;
    if ((j - i) % 2) odd.push_back(lamps[i]);
    i = j;
  }
  std::vector<std::int32_t> c{position};
  c.insert(c.end(), odd.begin(), odd.end());
  return Element(tag_, std::move(c));
}

std::span<const std::int32_t> Group::free_letters(const Element& x) const {
  require_owned(x);
  if (kind_ == GroupKind::Free) return x.code();
  if (kind_ == GroupKind::FreeTimesCyclic) return std::span(x.code()).subspan(1);
  throw UsageError("free_letters() requires a free factor");
}

std::int32_t Group::residue_of(const Element& x) const {
  require_owned(x);
  if (kind_ == GroupKind::FreeTimesCyclic || kind_ == GroupKind::Cyclic) return x.code()[0];
  return 0;
}

std::size_t Group::length(const Element& x) const {
  require_owned(x);
  const auto& a = x.code();
  switch (kind_) {
    case GroupKind::Integers:
    case GroupKind::Lattice: {
      std::size_t s = 0;
      for (auto v : a) s += static_cast<std::size_t>(std::abs(v));
      return s;
    }
    case GroupKind::Free: return a.size();
    case GroupKind::FreeTimesCyclic: {
      std::size_t c = static_cast<std::size_t>(a[0]);
      if (modulus_ > 2) c = std::min<std::size_t>(c, modulus_ - c);
      return a.size() - 1 + c;
    }
    case GroupKind::Cyclic: {
      std::size_t c = static_cast<std::size_t>(a[0]);
      return modulus_ > 2 ? std::min<std::size_t>(c, modulus_ - c) : c;
    }
    case GroupKind::Lamplighter: {
      std::int64_t p = a[0];
      std::int64_t lo = std::min<std::int64_t>(0, p), hi = std::max<std::int64_t>(0, p);
      if (a.size() > 1) {
        lo = std::min<std::int64_t>(lo, a[1]);
        hi = std::max<std::int64_t>(hi, a.back());
      }
      std::int64_t left_first = -lo + (hi - lo) + (hi - p);
      std::int64_t right_first = hi + (hi - lo) + (p - lo);
      return a.size() - 1 + static_cast<std::size_t>(std::min(left_first, right_first));
    }
  }
  return 0;
}

char Group::letter_name(std::int32_t l) const {
  char c = kFreeLetters[static_cast<std::size_t>(std::abs(l) - 1)];
  return l > 0 ? c : static_cast<char>(std::toupper(c));
}

std::int32_t Group::letter_code(char c) const {
  auto pos = kFreeLetters.find(static_cast<char>(std::tolower(c)));
  if (pos == std::string_view::npos || static_cast<int>(pos) >= rank_) return 0;
  auto v = static_cast<std::int32_t>(pos + 1);
  return std::isupper(static_cast<unsigned char>(c)) ? -v : v;
}

namespace {

void emit_run(std::ostringstream& os, bool& first, char letter, long count) {
  if (count == 0) return;
  if (!first) os << ' ';
  first = false;
  os << letter;
  if (count != 1) os << '^' << count;
}

void emit_signed(std::ostringstream& os, bool& first, char pos, char neg, long count) {
  if (count > 0) emit_run(os, first, pos, count);
  if (count < 0) emit_run(os, first, neg, -count);
}

}  // namespace

std::string Group::format(const Element& x) const {
  require_owned(x);
  const auto& a = x.code();
  std::ostringstream os;
  switch (kind_) {
    case GroupKind::Integers: os << a[0]; return os.str();
    case GroupKind::Lattice:
      os << '(';
      for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
      os << ')';
      return os.str();
    case GroupKind::Free:
    case GroupKind::FreeTimesCyclic:
    case GroupKind::Cyclic: {
      bool first = true;
      if (kind_ != GroupKind::Cyclic) {
        auto w = free_letters(x);
        for (std::size_t i = 0; i < w.size();) {
          std::size_t j = i;
          while (j < w.size() && w[j] == w[i]) ++j;
          emit_run(os, first, letter_name(w[i]), static_cast<long>(j - i));
          i = j;
        }
      }
      if (kind_ != GroupKind::Free) emit_run(os, first, 'z', a[0]);
      if (first) return "e";
      return os.str();
    }
    case GroupKind::Lamplighter: {
      bool first = true;
      std::int64_t at = 0;
      for (std::size_t i = 1; i < a.size(); ++i) {
        emit_signed(os, first, 't', 'T', static_cast<long>(a[i] - at));
        emit_run(os, first, 'l', 1);
        at = a[i];
      }
      emit_signed(os, first, 't', 'T', static_cast<long>(a[0] - at));
      if (first) return "e";
      return os.str();
    }
  }
  return "";
}

Element Group::parse(std::string_view text) const {
  auto fail = [&](const std::string& why) -> UsageError {
    return UsageError("cannot parse element '" + std::string(text) + "' in " + name() + ": " + why);
  };
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw fail("empty");

  if (kind_ == GroupKind::Integers || kind_ == GroupKind::Lattice) {
    std::string body = s;
    if (body.front() == '(') {
      if (body.back() != ')') throw fail("unbalanced parenthesis");
      body = body.substr(1, body.size() - 2);
    }
    std::vector<std::int32_t> coords;
    std::size_t start = 0;
    while (true) {
      auto end = body.find(',', start);
      std::string_view tok(body.data() + start, (end == std::string::npos ? body.size() : end) - start);
      std::int32_t v = 0;
      if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) throw fail("bad integer");
      coords.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    int want = kind_ == GroupKind::Integers ? 1 : dim_;
    if (static_cast<int>(coords.size()) != want) throw fail("wrong number of coordinates");
    return Element(tag_, std::move(coords));
  }

  Element acc = identity();
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i++];
    long exp = 1;
    if (i < s.size() && s[i] == '^') {
      ++i;
      std::size_t j = i;
      if (j < s.size() && (s[j] == '-' || s[j] == '+')) ++j;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      std::string_view tok(s.data() + i, j - i);
      if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), exp);
      if (ec != std::errc() || p != tok.data() + tok.size()) throw fail("bad exponent");
      i = j;
    }
    Element gen;
    if (c == 'e') {
      gen = identity();
    } else if (kind_ == GroupKind::Lamplighter) {
      if (c == 't') gen = lamplighter_element({}, 1);
      else if (c == 'T') gen = lamplighter_element({}, -1);
      else if (c == 'l' || c == 'L') gen = lamplighter_element({0}, 0);
      else throw fail(std::string("unknown letter '") + c + "'");
    } else if ((c == 'z' || c == 'Z') && kind_ != GroupKind::Free) {
      gen = residue(c == 'z' ? 1 : -1);
    } else if (kind_ != GroupKind::Cyclic) {
      std::int32_t l = letter_code(c);
      if (l == 0) throw fail(std::string("unknown letter '") + c + "'");
      std::int32_t one[1] = {l};
      gen = word(one);
    } else {
      throw fail(std::string("unknown letter '") + c + "'");
    }
    acc = multiply(acc, power(gen, exp));
  }
  return acc;
}

std::vector<Element> enumerate_elements(const Group& g, std::size_t n) {
  if (n == 0) throw UsageError("enumerate_elements requires n >= 1");
  std::vector<Element> out{g.identity()};
  ElementHashSet seen{g.identity()};
  for (std::size_t head = 0; out.size() < n; ++head) {
    if (head == out.size()) break;  // finite group exhausted
    Element x = out[head];
    for (const auto& s : g.generators()) {
      Element y = g.multiply(x, s);
      if (seen.insert(y).second) {
        out.push_back(std::move(y));
        if (out.size() == n) break;
      }
    }
  }
  return out;
}

ElementSet word_ball(const Group& g, const ElementSet& factors, int m, std::size_t cap) {
  for (const auto& a : factors) g.require_owned(a);
  ElementSet result;
  if (m <= 0) return result;
  ElementHashSet seen{g.identity()};
  std::vector<Element> frontier{g.identity()};
  for (int j = 1; j < m && !frontier.empty() && !factors.empty(); ++j) {
    std::vector<Element> next;
    for (const auto& x : frontier)
      for (const auto& a : factors) {
        Element y = g.multiply(x, a);
        if (seen.insert(y).second) {
          if (seen.size() > cap)
            throw ResourceError("word_ball exceeded size cap " + std::to_string(cap), seen.size());
          next.push_back(std::move(y));
        }
      }
    frontier = std::move(next);
  }
  result.assign(seen.begin(), seen.end());
  normalize(result);
  return result;
}

ElementSet ball(const Group& g, int r, std::size_t cap) {
  ElementSet gens(g.generators().begin(), g.generators().end());
  normalize(gens);
  return word_ball(g, gens, r + 1, cap);
}

InvarianceDefect folner_invariance_check(const Group& g, const ElementSet& f, const ElementSet& r, double eps) {
  if (f.empty()) throw UsageError("Folner candidate set is empty");
  if (!(eps > 0)) throw UsageError("eps must be positive");
  ElementHashSet fs(f.begin(), f.end());
  ElementHashSet outside;
  for (const auto& s : r)
    for (const auto& x : f) {
      Element y = g.multiply(s, x);
      if (!fs.count(y)) outside.insert(std::move(y));
    }
  InvarianceDefect d;
  d.ratio = static_cast<double>(outside.size()) / static_cast<double>(fs.size());
  d.passes = d.ratio < eps;
  return d;
}

}  // namespace gwalk
