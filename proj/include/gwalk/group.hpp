#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace gwalk {

/// Bad input: mixed groups, out-of-range parameters, malformed text.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size or iteration budget was exhausted before the request could be met.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t reached = 0)
      : std::runtime_error(what), reached_(reached) {}
  std::size_t reached() const { return reached_; }

 private:
  std::size_t reached_;
};

enum class GroupKind { Integers, Lattice, Free, FreeTimesCyclic, Cyclic, Lamplighter };

/// Canonical normal form of a group element.
///
/// The code layout depends on the group:
///   Integers / Lattice   coordinates
///   Free                 reduced word, letters +-1..+-k (negative = inverse)
///   FreeTimesCyclic      [residue, reduced word...]
///   Cyclic               [residue]
///   Lamplighter          [position, lamp_1 < lamp_2 < ...]
/// Two elements are equal iff they belong to the same group and have the same code.
class Element {
 public:
  Element() = default;
  Element(std::uint32_t tag, std::vector<std::int32_t> code) : tag_(tag), code_(std::move(code)) {}

  std::uint32_t tag() const { return tag_; }
  const std::vector<std::int32_t>& code() const { return code_; }

  friend bool operator==(const Element&, const Element&) = default;
  friend std::strong_ordering operator<=>(const Element& x, const Element& y) {
    if (auto c = x.tag_ <=> y.tag_; c != 0) return c;
    if (auto c = x.code_.size() <=> y.code_.size(); c != 0) return c;
    return x.code_ <=> y.code_;
  }

 private:
  std::uint32_t tag_ = 0;
  std::vector<std::int32_t> code_;
};

struct ElementHash {
  std::size_t operator()(const Element& x) const noexcept {
    std::uint64_t h = 1469598103934665603ULL ^ x.tag();
    for (std::int32_t v : x.code()) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Finite element set: sorted, duplicate-free.
using ElementSet = std::vector<Element>;
using ElementHashSet = std::unordered_set<Element, ElementHash>;

/// Sorts and deduplicates in place.
void normalize(ElementSet& set);
bool set_contains(const ElementSet& set, const Element& x);

/// One of the catalog groups together with its ordered symmetric generating set.
class Group {
 public:
  /// Defaults to Z.
  Group() : Group(GroupKind::Integers, 0, 1, 0) {}
  static Group integers();
  static Group lattice(int dim);
  static Group free(int rank);
  static Group free_times_cyclic(int rank, int modulus);
  static Group cyclic(int modulus);
  static Group lamplighter();

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }
  int dim() const { return dim_; }
  int modulus() const { return modulus_; }
  std::uint32_t tag() const { return tag_; }
  std::string name() const;

  bool is_amenable() const;
  /// True when the group has a free factor of rank >= 2.
  bool has_free_factor() const { return kind_ == GroupKind::Free || kind_ == GroupKind::FreeTimesCyclic; }

  Element identity() const;
  Element multiply(const Element& x, const Element& y) const;
  Element inverse(const Element& x) const;
  /// q^-1 s q
  Element conjugate(const Element& s, const Element& q) const;
  Element power(const Element& x, long n) const;
  bool is_identity(const Element& x) const;
  bool owns(const Element& x) const { return x.tag() == tag_; }
  void require_owned(const Element& x) const;

  const std::vector<Element>& generators() const { return generators_; }

  // Element builders.
  Element integer(std::int32_t x) const;
  Element lattice_point(std::vector<std::int32_t> coords) const;
  /// Free word (reduced on construction); for FreeTimesCyclic pass the residue too.
  Element word(std::span<const std::int32_t> letters, std::int32_t residue = 0) const;
  Element residue(std::int32_t c) const;
  Element lamplighter_element(std::vector<std::int32_t> lamps, std::int32_t position) const;

  /// Free part of a Free / FreeTimesCyclic element.
  std::span<const std::int32_t> free_letters(const Element& x) const;
  /// Cyclic part of FreeTimesCyclic / Cyclic elements, 0 otherwise.
  std::int32_t residue_of(const Element& x) const;
  /// Geodesic length for free and abelian groups; lamplighter uses lamp count + travel.
  std::size_t length(const Element& x) const;

  std::string format(const Element& x) const;
  Element parse(std::string_view text) const;

  friend bool operator==(const Group& a, const Group& b) { return a.tag_ == b.tag_; }

 private:
  Group(GroupKind kind, int rank, int dim, int modulus);
  char letter_name(std::int32_t letter) const;
  std::int32_t letter_code(char c) const;
  void require_same(const Element& x, const Element& y) const;

  GroupKind kind_;
  int rank_ = 0;
  int dim_ = 0;
  int modulus_ = 0;
  std::uint32_t tag_ = 0;
  std::vector<Element> generators_;
};

/// Appends y to x with free cancellation; both are reduced words.
void append_reduced(std::vector<std::int32_t>& x, std::span<const std::int32_t> y);
std::vector<std::int32_t> invert_word(std::span<const std::int32_t> w);

/// First n elements in breadth-first shortlex order over the generator list.
/// The result is prefix-stable and starts with the identity.
std::vector<Element> enumerate_elements(const Group& g, std::size_t n);

/// All products of j factors from A with 0 <= j < m (the empty product is the identity).
ElementSet word_ball(const Group& g, const ElementSet& factors, int m, std::size_t cap = 4'000'000);

/// Elements of word length <= r over the generators.
ElementSet ball(const Group& g, int r, std::size_t cap = 4'000'000);

struct InvarianceDefect {
  double ratio = 0.0;  // |RF \ F| / |F|
  bool passes = false; // ratio < eps
};

InvarianceDefect folner_invariance_check(const Group& g, const ElementSet& f, const ElementSet& r,
                                         double eps);

}  // namespace gwalk
