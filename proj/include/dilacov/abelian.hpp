#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dilacov/matrix.hpp"

namespace dilacov {

// Element of a finite abelian group in invariant-factor coordinates.
using GroupElement = std::vector<int64_t>;

// Finite abelian group Z/d1 x ... x Z/dk with d1 | d2 | ... | dk, di >= 2.
// The empty factor list is the trivial group.
class Group {
 public:
  Group() = default;
  explicit Group(std::vector<int64_t> invariant_factors);

  const std::vector<int64_t>& factors() const { return factors_; }
  int rank() const { return static_cast<int>(factors_.size()); }
  uint64_t order() const { return order_; }

  GroupElement zero() const { return GroupElement(factors_.size(), 0); }
  GroupElement add(const GroupElement& a, const GroupElement& b) const;
  GroupElement neg(const GroupElement& a) const;
  GroupElement reduce(const std::vector<Int>& raw) const;
  // Standard generators e_0, ..., e_{k-1}.
  GroupElement generator(int i) const;
  // All elements in lexicographic coordinate order.
  std::vector<GroupElement> elements() const;

  bool operator==(const Group& rhs) const { return factors_ == rhs.factors_; }
  bool operator!=(const Group& rhs) const { return !(*this == rhs); }

 private:
  std::vector<int64_t> factors_;
  uint64_t order_ = 1;
};

// Normalizes arbitrary positive factors into an invariant-factor chain via the
// Smith normal form of diag(factors); entries equal to 1 are dropped.
Group make_group(const std::vector<int64_t>& factors);

// Subgroup of a fixed parent group, canonicalized as the column Hermite
// normal form of its preimage lattice in Z^k. Equal subgroups have byte-equal
// bases, so comparison is structural.
class Subgroup {
 public:
  Subgroup() = default;

  const Group& parent() const { return parent_; }
  const IntMatrix& basis() const { return basis_; }
  const std::vector<GroupElement>& elements() const { return elements_; }
  uint64_t order() const { return elements_.size(); }
  uint64_t index() const { return index_; }

  bool contains(const GroupElement& g) const;
  bool contains_subgroup(const Subgroup& other) const;
  bool is_trivial() const { return order() == 1; }
  bool is_full() const { return index_ == 1; }
  // A subgroup is cyclic iff it has at most one invariant factor > 1.
  bool is_cyclic() const;
  std::vector<int64_t> invariant_factors() const;

  bool operator==(const Subgroup& rhs) const;
  bool operator!=(const Subgroup& rhs) const { return !(*this == rhs); }
  // Deterministic total order: by order, then basis lexicographically.
  bool operator<(const Subgroup& rhs) const;

  static Subgroup from_generators(const Group& g, const std::vector<GroupElement>& gens);
  static Subgroup trivial(const Group& g);
  static Subgroup full(const Group& g);
  // Lattice basis must contain diag(d); used internally by the lattice ops.
  static Subgroup from_lattice(const Group& g, const IntMatrix& lattice_columns);

  friend Subgroup subgroup_sum(const Subgroup& h, const Subgroup& k);
  friend Subgroup subgroup_intersection(const Subgroup& h, const Subgroup& k);

 private:
  Group parent_;
  IntMatrix basis_;  // k x k column HNF
  std::vector<GroupElement> elements_;
  uint64_t index_ = 1;
};

// Every subgroup exactly once, sorted by (order, basis). Includes 0 and G.
// Throws ResourceError when |G| exceeds max_order.
std::vector<Subgroup> enumerate_subgroups(const Group& g, uint64_t max_order = 64);

// Smallest subgroup containing both; HNF of the concatenated bases.
Subgroup subgroup_sum(const Subgroup& h, const Subgroup& k);

// Lattice intersection; equals the set intersection of the element lists.
Subgroup subgroup_intersection(const Subgroup& h, const Subgroup& k);

// The quotient G/H with a canonical section. Cosets are ordered by their
// lexicographically minimal representative in G.
class QuotientPresentation {
 public:
  QuotientPresentation() = default;
  QuotientPresentation(const Group& g, const Subgroup& h);

  const Group& group() const { return group_; }
  const Subgroup& subgroup() const { return subgroup_; }
  const Group& quotient_group() const { return quotient_; }
  uint64_t size() const { return lifts_.size(); }

  // Index of the coset of g, in canonical coset order.
  int64_t project_index(const GroupElement& g) const;
  // Image of g as an element of the quotient group.
  GroupElement project(const GroupElement& g) const;
  // Lexicographically minimal preimage of a coset.
  const GroupElement& canonical_lift(int64_t coset) const { return lifts_[coset]; }
  int64_t coset_of_quotient_element(const GroupElement& q) const;

 private:
  Group group_;
  Subgroup subgroup_;
  Group quotient_;  // invariant factors of G/H
  std::vector<int64_t> torsion_;           // full-length SNF diagonal, incl. 1s
  std::vector<std::vector<int64_t>> u_;    // projector matrix, reduced mod torsion
  std::vector<GroupElement> lifts_;        // canonical lift per coset
  std::map<std::vector<int64_t>, int64_t> coset_by_residue_;

  std::vector<int64_t> residue(const GroupElement& g) const;
};

// Lexicographically minimal element of g + H.
GroupElement canonical_coset_rep(const QuotientPresentation& q, const GroupElement& g);

// Thread-local memo for quotient presentations; cover construction asks for
// the same handful of quotients thousands of times.
const QuotientPresentation& cached_quotient(const Group& g, const Subgroup& h);

// CLI literal forms: "2,2", "Z2xZ2", "Z6".
Group parse_group_literal(const std::string& text);
// Generator list "<10;01>" (per-character coordinates) or "<1,0;0,1>".
Subgroup parse_subgroup_literal(const Group& g, const std::string& text);
std::string format_group(const Group& g);
std::string format_element(const GroupElement& g);
std::string format_subgroup(const Subgroup& h);

}  // namespace dilacov
