#include "dilacov/abelian.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

IntMatrix ambient_lattice(const Group& g) {
  std::vector<Int> d(g.factors().begin(), g.factors().end());
  return IntMatrix::diagonal(d);
}

IntMatrix lattice_with_ambient(const Group& g, const std::vector<GroupElement>& gens) {
  const int k = g.rank();
  IntMatrix m(k, static_cast<long>(gens.size()) + k);
  for (size_t j = 0; j < gens.size(); ++j)
    for (int i = 0; i < k; ++i) m.at(i, static_cast<long>(j)) = gens[j][i];
  for (int i = 0; i < k; ++i) m.at(i, static_cast<long>(gens.size()) + i) = g.factors()[i];
  return m;
}

}  // namespace

Group::Group(std::vector<int64_t> invariant_factors) : factors_(std::move(invariant_factors)) {
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i] < 2) throw FormatError("group invariant factor below 2");
    if (i > 0 && factors_[i] % factors_[i - 1] != 0)
      throw FormatError("group factors do not form a divisibility chain");
    order_ *= static_cast<uint64_t>(factors_[i]);
  }
}

GroupElement Group::add(const GroupElement& a, const GroupElement& b) const {
  GroupElement out(factors_.size());
  for (size_t i = 0; i < factors_.size(); ++i) out[i] = (a[i] + b[i]) % factors_[i];
  return out;
}

GroupElement Group::neg(const GroupElement& a) const {
  GroupElement out(factors_.size());
  for (size_t i = 0; i < factors_.size(); ++i) out[i] = (factors_[i] - a[i]) % factors_[i];
  return out;
}

GroupElement Group::reduce(const std::vector<Int>& raw) const {
  GroupElement out(factors_.size());
  for (size_t i = 0; i < factors_.size(); ++i) {
    Int r = raw[i] % factors_[i];
    if (r < 0) r += factors_[i];
    out[i] = r.convert_to<int64_t>();
  }
  return out;
}

GroupElement Group::generator(int i) const {
  GroupElement g = zero();
  g[i] = 1 % factors_[i];
  return g;
}

std::vector<GroupElement> Group::elements() const {
  std::vector<GroupElement> out;
  out.reserve(order_);
  GroupElement cur = zero();
  for (;;) {
    out.push_back(cur);
    int i = rank() - 1;
    while (i >= 0 && ++cur[i] == factors_[i]) cur[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

Group make_group(const std::vector<int64_t>& factors) {
  for (int64_t f : factors)
    if (f < 1) throw FormatError("group factors must be positive");
  std::vector<Int> d(factors.begin(), factors.end());
  SmithForm snf = smith_normal_form(IntMatrix::diagonal(d));
  std::vector<int64_t> chain;
  for (const Int& s : snf.diagonal)
    if (s > 1) chain.push_back(s.convert_to<int64_t>());
  return Group(chain);
}

bool Subgroup::contains(const GroupElement& g) const {
  std::vector<Int> b(g.begin(), g.end());
  return solve_lower_triangular(basis_, b).has_value();
}

bool Subgroup::contains_subgroup(const Subgroup& other) const {
  for (const auto& g : other.elements_)
    if (!contains(g)) return false;
  return true;
}

bool Subgroup::is_cyclic() const { return invariant_factors().size() <= 1; }

std::vector<int64_t> Subgroup::invariant_factors() const {
  // H = L / diag(d): express diag(d) in the basis of L and read off the SNF.
  IntMatrix w = solve_lower_triangular_matrix(basis_, ambient_lattice(parent_));
  std::vector<int64_t> out;
  for (const Int& s : finite_cokernel_invariants(parent_.rank(), w))
    out.push_back(s.convert_to<int64_t>());
  return out;
}

bool Subgroup::operator==(const Subgroup& rhs) const {
  return parent_ == rhs.parent_ && basis_ == rhs.basis_;
}

bool Subgroup::operator<(const Subgroup& rhs) const {
  if (order() != rhs.order()) return order() < rhs.order();
  const int k = parent_.rank();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (basis_.at(i, j) != rhs.basis_.at(i, j)) return basis_.at(i, j) < rhs.basis_.at(i, j);
    }
  return false;
}

Subgroup Subgroup::from_lattice(const Group& g, const IntMatrix& lattice_columns) {
  Subgroup h;
  h.parent_ = g;
  h.basis_ = g.rank() ? column_hnf(lattice_columns) : IntMatrix(0, 0);
  for (const auto& e : g.elements())
    if (h.contains(e)) h.elements_.push_back(e);
  h.index_ = g.order() / h.elements_.size();
  return h;
}

Subgroup Subgroup::from_generators(const Group& g, const std::vector<GroupElement>& gens) {
  for (const auto& e : gens)
    if (static_cast<int>(e.size()) != g.rank()) throw FormatError("generator has wrong rank");
  return from_lattice(g, lattice_with_ambient(g, gens));
}

Subgroup Subgroup::trivial(const Group& g) { return from_generators(g, {}); }

Subgroup Subgroup::full(const Group& g) {
  std::vector<GroupElement> gens;
  for (int i = 0; i < g.rank(); ++i) gens.push_back(g.generator(i));
  return from_generators(g, gens);
}

std::vector<Subgroup> enumerate_subgroups(const Group& g, uint64_t max_order) {
  if (g.order() > max_order) {
    std::ostringstream os;
    os << "subgroup enumeration bound exceeded: |G| = " << g.order() << " > " << max_order;
    throw ResourceError(os.str());
  }
  // Closure: grow every known subgroup by every element until stable.
  std::set<Subgroup> known;
  known.insert(Subgroup::trivial(g));
  const auto all = g.elements();
  std::vector<Subgroup> frontier(known.begin(), known.end());
  while (!frontier.empty()) {
    std::vector<Subgroup> next;
    for (const auto& h : frontier) {
      for (const auto& e : all) {
        if (h.contains(e)) continue;
        std::vector<GroupElement> gens = h.elements();
        gens.push_back(e);
        Subgroup bigger = Subgroup::from_generators(g, gens);
        if (known.insert(bigger).second) next.push_back(bigger);
      }
    }
    frontier = std::move(next);
  }
  return {known.begin(), known.end()};
}

Subgroup subgroup_sum(const Subgroup& h, const Subgroup& k) {
  if (h.parent() != k.parent()) throw DomainError("subgroup_sum: mismatched parent groups");
  if (h.parent().rank() == 0) return h;
  return Subgroup::from_lattice(h.parent(), h.basis_.hconcat(k.basis_));
}

Subgroup subgroup_intersection(const Subgroup& h, const Subgroup& k) {
  if (h.parent() != k.parent()) throw DomainError("subgroup_intersection: mismatched parent groups");
  const int n = h.parent().rank();
  if (n == 0) return h;
  // Solve A x = B y: the intersection lattice is A * (x-part of ker [A | -B]).
  IntMatrix negb = k.basis_;
  for (long i = 0; i < negb.rows(); ++i)
    for (long j = 0; j < negb.cols(); ++j) negb.at(i, j) = -negb.at(i, j);
  IntMatrix ker = kernel_basis(h.basis_.hconcat(negb));
  IntMatrix xpart(n, ker.cols());
  for (long j = 0; j < ker.cols(); ++j)
    for (long i = 0; i < n; ++i) xpart.at(i, j) = ker.at(i, j);
  return Subgroup::from_lattice(h.parent(), h.basis_ * xpart);
}

QuotientPresentation::QuotientPresentation(const Group& g, const Subgroup& h)
    : group_(g), subgroup_(h) {
  const int k = g.rank();
  SmithForm snf = smith_normal_form(h.basis());
  std::vector<int64_t> qfactors;
  torsion_.resize(k);
  u_.assign(k, std::vector<int64_t>(k, 0));
  for (int i = 0; i < k; ++i) {
    torsion_[i] = snf.diagonal[i].convert_to<int64_t>();
    for (int j = 0; j < k; ++j) {
      Int r = snf.U.at(i, j) % torsion_[i];
      if (r < 0) r += torsion_[i];
      u_[i][j] = r.convert_to<int64_t>();
    }
    if (torsion_[i] > 1) qfactors.push_back(torsion_[i]);
  }
  quotient_ = Group(qfactors);

  // Scan G in lex order; the first element seen in each coset is its
  // lexicographically minimal representative, defining the canonical order.
  for (const auto& e : g.elements()) {
    auto key = residue(e);
    auto [it, inserted] = coset_by_residue_.try_emplace(key, static_cast<int64_t>(lifts_.size()));
    if (inserted) lifts_.push_back(e);
  }
}

std::vector<int64_t> QuotientPresentation::residue(const GroupElement& g) const {
  const int k = group_.rank();
  std::vector<int64_t> r(k, 0);
  for (int i = 0; i < k; ++i) {
    int64_t acc = 0;
    for (int j = 0; j < k; ++j) acc += u_[i][j] * g[j];
    r[i] = torsion_[i] ? acc % torsion_[i] : acc;
  }
  return r;
}

int64_t QuotientPresentation::project_index(const GroupElement& g) const {
  return coset_by_residue_.at(residue(g));
}

GroupElement QuotientPresentation::project(const GroupElement& g) const {
  auto r = residue(g);
  GroupElement q;
  for (size_t i = 0; i < r.size(); ++i)
    if (torsion_[i] > 1) q.push_back(r[i]);
  return q;
}

int64_t QuotientPresentation::coset_of_quotient_element(const GroupElement& q) const {
  std::vector<int64_t> r(torsion_.size(), 0);
  size_t pos = 0;
  for (size_t i = 0; i < torsion_.size(); ++i)
    if (torsion_[i] > 1) r[i] = q[pos++];
  return coset_by_residue_.at(r);
}

GroupElement canonical_coset_rep(const QuotientPresentation& q, const GroupElement& g) {
  return q.canonical_lift(q.project_index(g));
}

const QuotientPresentation& cached_quotient(const Group& g, const Subgroup& h) {
  thread_local std::map<std::vector<int64_t>, QuotientPresentation> cache;
  std::vector<int64_t> key = g.factors();
  key.push_back(-1);
  for (long i = 0; i < h.basis().rows(); ++i)
    for (long j = 0; j < h.basis().cols(); ++j)
      key.push_back(h.basis().at(i, j).convert_to<int64_t>());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(std::move(key), QuotientPresentation(g, h)).first;
  return it->second;
}

Group parse_group_literal(const std::string& text) {
  if (text.empty()) throw FormatError("empty group literal");
  std::vector<int64_t> factors;
  if (text[0] == 'Z' || text[0] == 'z') {
    // Z6, Z2xZ2, ...
    size_t pos = 0;
    while (pos < text.size()) {
      if (text[pos] != 'Z' && text[pos] != 'z') throw FormatError("bad group literal: " + text);
      ++pos;
      size_t end = pos;
      while (end < text.size() && isdigit(static_cast<unsigned char>(text[end]))) ++end;
      if (end == pos) throw FormatError("bad group literal: " + text);
      factors.push_back(std::stoll(text.substr(pos, end - pos)));
      pos = end;
      if (pos < text.size()) {
        if (text[pos] != 'x' && text[pos] != 'X') throw FormatError("bad group literal: " + text);
        ++pos;
      }
    }
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) throw FormatError("bad group literal: " + text);
      factors.push_back(std::stoll(tok));
    }
  }
  return make_group(factors);
}

namespace {

GroupElement parse_element_token(const Group& g, const std::string& tok) {
  std::vector<int64_t> coords;
  if (tok.find(',') != std::string::npos) {
    std::stringstream ss(tok);
    std::string c;
    while (std::getline(ss, c, ',')) coords.push_back(std::stoll(c));
  } else if (static_cast<int>(tok.size()) == g.rank()) {
    for (char c : tok) {
      if (!isdigit(static_cast<unsigned char>(c))) throw FormatError("bad element literal: " + tok);
      coords.push_back(c - '0');
    }
  } else if (g.rank() == 1) {
    coords.push_back(std::stoll(tok));
  } else {
    throw FormatError("element literal has wrong coordinate count: " + tok);
  }
  if (static_cast<int>(coords.size()) != g.rank())
    throw FormatError("element literal has wrong coordinate count: " + tok);
  std::vector<Int> raw(coords.begin(), coords.end());
  return g.reduce(raw);
}

}  // namespace

Subgroup parse_subgroup_literal(const Group& g, const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '<' && body.back() == '>')
    body = body.substr(1, body.size() - 2);
  std::vector<GroupElement> gens;
  if (!body.empty() && body != "0") {
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ';'))
      if (!tok.empty()) gens.push_back(parse_element_token(g, tok));
  }
  return Subgroup::from_generators(g, gens);
}

std::string format_group(const Group& g) {
  if (g.rank() == 0) return "0";
  std::string out;
  for (int i = 0; i < g.rank(); ++i) {
    if (i) out += " x ";
    out += "Z/" + std::to_string(g.factors()[i]);
  }
  return out;
}

std::string format_element(const GroupElement& g) {
  if (g.empty()) return "0";
  // Single-digit coordinates concatenate ("10" over the Klein group);
  // anything wider falls back to comma separation.
  bool compact = g.size() > 1 && std::all_of(g.begin(), g.end(), [](int64_t c) { return c < 10; });
  std::string out;
  for (size_t i = 0; i < g.size(); ++i) {
    if (i && !compact) out += ",";
    out += std::to_string(g[i]);
  }
  return out;
}

std::string format_subgroup(const Subgroup& h) {
  if (h.is_trivial()) return "<0>";
  // Print a generating set read off the basis columns that are not already
  // in the ambient lattice.
  std::vector<std::string> gens;
  Subgroup acc = Subgroup::trivial(h.parent());
  for (const auto& e : h.elements()) {
    if (acc.contains(e)) continue;
    std::vector<GroupElement> g = acc.elements();
    g.push_back(e);
    acc = Subgroup::from_generators(h.parent(), g);
    gens.push_back(format_element(e));
    if (acc == h) break;
  }
  std::string out = "<";
  for (size_t i = 0; i < gens.size(); ++i) {
    if (i) out += ";";
    out += gens[i];
  }
  return out + ">";
}

}  // namespace dilacov
