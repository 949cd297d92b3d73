#include "dilacov/cohomology.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

IntMatrix int_identity(int n) { return IntMatrix::identity(n); }

Int product_of(const std::vector<Int>& factors) {
  Int p = 1;
  for (const Int& f : factors) p *= f;
  return p;
}

bool all_zero(const std::vector<int64_t>& v) {
  return std::all_of(v.begin(), v.end(), [](int64_t x) { return x == 0; });
}

}  // namespace

PresentedGroup::PresentedGroup(int generators, IntMatrix relations)
    : n_(generators), relations_(std::move(relations)) {
  if (relations_.rows() != n_) throw DomainError("presented group: relation rows != generators");
  SmithForm f = smith_normal_form(relations_);
  if (f.rank < n_) throw DomainError("presented group is infinite");
  torsion_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    torsion_[i] = f.diagonal[i].convert_to<int64_t>();
    order_ *= static_cast<uint64_t>(torsion_[i]);
  }
  u_ = f.U;
  // U is unimodular, so its Smith form is the identity and U^{-1} = V U'.
  SmithForm inv = smith_normal_form(u_);
  u_inv_ = inv.V * inv.U;
  if (n_ > 0 && !(u_ * u_inv_ == int_identity(n_)))
    throw CertificationError("presented group: failed to invert the normal-form transform");
}

PresentedGroup PresentedGroup::from_group(const Group& g) {
  std::vector<Int> d(g.factors().begin(), g.factors().end());
  return PresentedGroup(g.rank(), IntMatrix::diagonal(d));
}

PresentedGroup PresentedGroup::from_quotient(const Group& g, const Subgroup& h) {
  if (g.rank() == 0) return PresentedGroup(0, IntMatrix(0, 0));
  return PresentedGroup(g.rank(), h.basis());
}

std::vector<int64_t> PresentedGroup::invariant_factors() const {
  std::vector<int64_t> out;
  for (int64_t t : torsion_)
    if (t > 1) out.push_back(t);
  return out;
}

std::vector<int64_t> PresentedGroup::normal_form(const std::vector<Int>& x) const {
  std::vector<int64_t> nf(n_);
  for (int i = 0; i < n_; ++i) {
    Int acc = 0;
    for (int j = 0; j < n_; ++j) acc += u_.at(i, j) * x[j];
    Int r = acc % torsion_[i];
    if (r < 0) r += torsion_[i];
    nf[i] = r.convert_to<int64_t>();
  }
  return nf;
}

bool PresentedGroup::is_zero(const std::vector<Int>& x) const {
  auto nf = normal_form(x);
  return all_zero(nf);
}

std::vector<Int> PresentedGroup::representative(const std::vector<int64_t>& nf) const {
  std::vector<Int> x(n_, 0);
  for (int i = 0; i < n_; ++i) {
    if (nf[i] == 0) continue;
    for (int j = 0; j < n_; ++j) x[j] += u_inv_.at(j, i) * nf[i];
  }
  return x;
}

std::vector<int64_t> PresentedGroup::add(const std::vector<int64_t>& a,
                                         const std::vector<int64_t>& b) const {
  std::vector<int64_t> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = (a[i] + b[i]) % torsion_[i];
  return out;
}

std::vector<int64_t> PresentedGroup::neg(const std::vector<int64_t>& a) const {
  std::vector<int64_t> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = (torsion_[i] - a[i]) % torsion_[i];
  return out;
}

std::vector<std::vector<int64_t>> PresentedGroup::elements() const {
  std::vector<std::vector<int64_t>> out;
  std::vector<int64_t> cur(n_, 0);
  for (;;) {
    out.push_back(cur);
    int i = n_ - 1;
    while (i >= 0 && ++cur[i] == torsion_[i]) cur[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

void validate_gdatum(const Graph& graph, const GDatum& a) {
  const int k = a.g.rank();
  if (a.at_vertex.size() != graph.vertices().size() || a.at_edge.size() != graph.edges().size())
    throw DomainError("G-datum: block counts do not match the graph");
  auto check_hom = [&](const IntMatrix& m, const PresentedGroup& src, const PresentedGroup& dst,
                       const char* what) {
    if (m.rows() != dst.generators() || m.cols() != src.generators())
      throw DomainError(std::string("G-datum: bad matrix shape for ") + what);
    for (long j = 0; j < src.relations().cols(); ++j) {
      std::vector<Int> img(dst.generators(), 0);
      for (long i = 0; i < m.rows(); ++i)
        for (long r = 0; r < m.cols(); ++r) img[i] += m.at(i, r) * src.relations().at(r, j);
      if (!dst.is_zero(img))
        throw DomainError(std::string("G-datum: map does not respect relations: ") + what);
    }
  };
  PresentedGroup pg = PresentedGroup::from_group(a.g);
  for (size_t i = 0; i < a.at_vertex.size(); ++i)
    check_hom(a.at_vertex[i].from_g, pg, a.at_vertex[i].group, "f_v");
  for (size_t e = 0; e < a.at_edge.size(); ++e) {
    const Edge& ed = graph.edges()[e];
    const GGroup& src = a.at_vertex[graph.vertex_position(ed.source)];
    const GGroup& dst = a.at_vertex[graph.vertex_position(ed.target)];
    const GEdge& ge = a.at_edge[e];
    check_hom(ge.at.from_g, pg, ge.at.group, "f_e");
    check_hom(ge.source_map, src.group, ge.at.group, "s_e");
    check_hom(ge.target_map, dst.group, ge.at.group, "t_e");
    IntMatrix via_s = ge.source_map * src.from_g;
    IntMatrix via_t = ge.target_map * dst.from_g;
    for (int j = 0; j < k; ++j) {
      std::vector<Int> vs(ge.at.group.generators()), vt(ge.at.group.generators());
      for (long i = 0; i < ge.at.from_g.rows(); ++i) {
        vs[i] = via_s.at(i, j) - ge.at.from_g.at(i, j);
        vt[i] = via_t.at(i, j) - ge.at.from_g.at(i, j);
      }
      if (!ge.at.group.is_zero(vs) || !ge.at.group.is_zero(vt))
        throw DomainError("G-datum: triangle over G does not commute on edge " + std::to_string(e));
    }
  }
}

GDatum datum_from_dilation(const Graph& graph, const DilationDatum& d) {
  GDatum a;
  a.g = d.group;
  const int k = d.group.rank();
  for (int v : graph.vertices())
    a.at_vertex.push_back({PresentedGroup::from_quotient(d.group, d.assign[v]), int_identity(k)});
  for (size_t e = 0; e < graph.edges().size(); ++e) {
    Subgroup c = d.edge_vertex_group(graph, static_cast<int>(e));
    GEdge ge;
    ge.at = {PresentedGroup::from_quotient(d.group, c), int_identity(k)};
    ge.source_map = int_identity(k);
    ge.target_map = int_identity(k);
    a.at_edge.push_back(std::move(ge));
  }
  return a;
}

namespace {

void fill_block_relations(const std::vector<PresentedGroup>& groups,
                          const std::vector<long>& offsets, IntMatrix& rel) {
  long col = 0;
  for (size_t b = 0; b < groups.size(); ++b) {
    const IntMatrix& r = groups[b].relations();
    for (long j = 0; j < r.cols(); ++j, ++col)
      for (long i = 0; i < r.rows(); ++i) rel.at(offsets[b] + i, col) = r.at(i, j);
  }
}

long total_relation_cols(const std::vector<PresentedGroup>& groups) {
  long m = 0;
  for (const auto& pg : groups) m += pg.relations().cols();
  return m;
}

}  // namespace

CochainComplex build_cochain_complex(const Graph& graph, const GDatum& a) {
  CochainComplex c;
  long off = 0;
  for (const auto& gv : a.at_vertex) {
    c.v_offset.push_back(off);
    off += gv.group.generators();
    c.v_groups.push_back(gv.group);
  }
  c.n0 = off;
  off = 0;
  for (const auto& ge : a.at_edge) {
    c.e_offset.push_back(off);
    off += ge.at.group.generators();
    c.e_groups.push_back(ge.at.group);
  }
  c.n1 = off;

  c.delta = IntMatrix(c.n1, c.n0);
  for (size_t e = 0; e < a.at_edge.size(); ++e) {
    const Edge& ed = graph.edges()[e];
    const GEdge& ge = a.at_edge[e];
    long er = c.e_offset[e];
    long sc = c.v_offset[graph.vertex_position(ed.source)];
    long tc = c.v_offset[graph.vertex_position(ed.target)];
    for (long i = 0; i < ge.target_map.rows(); ++i)
      for (long j = 0; j < ge.target_map.cols(); ++j)
        c.delta.at(er + i, tc + j) += ge.target_map.at(i, j);
    for (long i = 0; i < ge.source_map.rows(); ++i)
      for (long j = 0; j < ge.source_map.cols(); ++j)
        c.delta.at(er + i, sc + j) -= ge.source_map.at(i, j);
  }

  c.rel0 = IntMatrix(c.n0, total_relation_cols(c.v_groups));
  c.rel1 = IntMatrix(c.n1, total_relation_cols(c.e_groups));
  fill_block_relations(c.v_groups, c.v_offset, c.rel0);
  fill_block_relations(c.e_groups, c.e_offset, c.rel1);
  return c;
}

namespace {

// Lattice { x in Z^n0 : delta x in colspan(rel1) } as a square HNF basis.
IntMatrix kernel_preimage_lattice(const CochainComplex& c) {
  IntMatrix ker = kernel_basis(c.delta.hconcat(c.rel1));
  IntMatrix xpart(c.n0, ker.cols() + c.rel0.cols());
  for (long j = 0; j < ker.cols(); ++j)
    for (long i = 0; i < c.n0; ++i) xpart.at(i, j) = ker.at(i, j);
  for (long j = 0; j < c.rel0.cols(); ++j)
    for (long i = 0; i < c.n0; ++i) xpart.at(i, ker.cols() + j) = c.rel0.at(i, j);
  return column_hnf(xpart);
}

CohomologyResult h0_h1_from(const CochainComplex& c, const IntMatrix& extra_rel0) {
  CohomologyResult out;
  if (c.n0 > 0) {
    IntMatrix p = kernel_preimage_lattice(c);
    IntMatrix denom = extra_rel0.cols() ? c.rel0.hconcat(extra_rel0) : c.rel0;
    IntMatrix w = solve_lower_triangular_matrix(p, denom);
    out.h0_factors = finite_cokernel_invariants(c.n0, w);
  }
  out.h0_order = product_of(out.h0_factors);
  if (c.n1 > 0) out.h1_factors = finite_cokernel_invariants(c.n1, c.delta.hconcat(c.rel1));
  out.h1_order = product_of(out.h1_factors);
  return out;
}

}  // namespace

CohomologyResult cohomology_of_complex(const CochainComplex& c) {
  return h0_h1_from(c, IntMatrix(c.n0, 0));
}

CohomologyResult reduced_cohomology_of_complex(const CochainComplex& c, const Group& g,
                                               const std::vector<IntMatrix>& diagonal_maps) {
  IntMatrix diag(c.n0, g.rank());
  for (size_t v = 0; v < diagonal_maps.size(); ++v)
    for (long i = 0; i < diagonal_maps[v].rows(); ++i)
      for (long j = 0; j < diagonal_maps[v].cols(); ++j)
        diag.at(c.v_offset[v] + i, j) = diagonal_maps[v].at(i, j);
  return h0_h1_from(c, diag);
}

namespace {

// A cochain side (C0 or C1) of a complex, with element arithmetic in
// normal-form coordinates.
struct Side {
  const std::vector<PresentedGroup>* groups;
  const std::vector<long>* offsets;
  long dim;
  std::vector<int64_t> torsion;
  uint64_t order = 1;
  bool order_ok = true;

  Side(const std::vector<PresentedGroup>& g, const std::vector<long>& off, long d, uint64_t bound)
      : groups(&g), offsets(&off), dim(d) {
    for (const auto& pg : g)
      for (int64_t t : pg.torsion()) {
        torsion.push_back(t);
        if (order > bound / std::max<uint64_t>(1, static_cast<uint64_t>(t))) {
          order_ok = false;
          return;
        }
        order *= static_cast<uint64_t>(t);
      }
  }

  std::vector<std::vector<int64_t>> all_elements() const {
    std::vector<std::vector<int64_t>> out;
    std::vector<int64_t> cur(dim, 0);
    for (;;) {
      out.push_back(cur);
      long i = dim - 1;
      while (i >= 0 && ++cur[i] == torsion[i]) cur[i--] = 0;
      if (i < 0) break;
    }
    return out;
  }

  std::vector<int64_t> add(const std::vector<int64_t>& a, const std::vector<int64_t>& b) const {
    std::vector<int64_t> out(dim);
    for (long i = 0; i < dim; ++i) out[i] = (a[i] + b[i]) % torsion[i];
    return out;
  }

  std::vector<Int> representative(const std::vector<int64_t>& nf) const {
    std::vector<Int> out(dim, 0);
    for (size_t b = 0; b < groups->size(); ++b) {
      const PresentedGroup& pg = (*groups)[b];
      std::vector<int64_t> seg(nf.begin() + (*offsets)[b],
                               nf.begin() + (*offsets)[b] + pg.generators());
      std::vector<Int> rep = pg.representative(seg);
      for (int i = 0; i < pg.generators(); ++i) out[(*offsets)[b] + i] = rep[i];
    }
    return out;
  }

  std::vector<int64_t> normal_form(const std::vector<Int>& raw) const {
    std::vector<int64_t> out(dim, 0);
    for (size_t b = 0; b < groups->size(); ++b) {
      const PresentedGroup& pg = (*groups)[b];
      std::vector<Int> seg(raw.begin() + (*offsets)[b],
                           raw.begin() + (*offsets)[b] + pg.generators());
      std::vector<int64_t> nf = pg.normal_form(seg);
      for (int i = 0; i < pg.generators(); ++i) out[(*offsets)[b] + i] = nf[i];
    }
    return out;
  }
};

std::vector<Int> matvec(const IntMatrix& m, const std::vector<Int>& x) {
  std::vector<Int> out(m.rows(), 0);
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      if (m.at(i, j) != 0) out[i] += m.at(i, j) * x[j];
  return out;
}

std::vector<int64_t> apply_delta(const CochainComplex& c, const Side& c0, const Side& c1,
                                 const std::vector<int64_t>& xnf) {
  return c1.normal_form(matvec(c.delta, c0.representative(xnf)));
}

// Invariant factors of the subgroup generated by the given normal forms.
std::vector<Int> subgroup_invariants(const Side& side,
                                     const std::vector<std::vector<int64_t>>& elems) {
  if (side.dim == 0) return {};
  IntMatrix gens(side.dim, static_cast<long>(elems.size()) + side.dim);
  for (size_t j = 0; j < elems.size(); ++j)
    for (long i = 0; i < side.dim; ++i) gens.at(i, static_cast<long>(j)) = elems[j][i];
  for (long i = 0; i < side.dim; ++i)
    gens.at(i, static_cast<long>(elems.size()) + i) = side.torsion[i];
  IntMatrix lat = column_hnf(gens);
  std::vector<Int> tor(side.torsion.begin(), side.torsion.end());
  IntMatrix w = solve_lower_triangular_matrix(lat, IntMatrix::diagonal(tor));
  return finite_cokernel_invariants(side.dim, w);
}

// Invariant factors of the quotient of the side by that subgroup.
std::vector<Int> quotient_invariants(const Side& side,
                                     const std::vector<std::vector<int64_t>>& elems) {
  if (side.dim == 0) return {};
  IntMatrix gens(side.dim, static_cast<long>(elems.size()) + side.dim);
  for (size_t j = 0; j < elems.size(); ++j)
    for (long i = 0; i < side.dim; ++i) gens.at(i, static_cast<long>(j)) = elems[j][i];
  for (long i = 0; i < side.dim; ++i)
    gens.at(i, static_cast<long>(elems.size()) + i) = side.torsion[i];
  return finite_cokernel_invariants(side.dim, gens);
}

std::set<std::vector<int64_t>> close_subgroup(const Side& side,
                                              const std::vector<std::vector<int64_t>>& gens) {
  std::set<std::vector<int64_t>> out;
  std::vector<int64_t> zero(side.dim, 0);
  out.insert(zero);
  std::deque<std::vector<int64_t>> queue{zero};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      auto nxt = side.add(cur, g);
      if (out.insert(nxt).second) queue.push_back(nxt);
    }
  }
  return out;
}

}  // namespace

std::optional<BruteCohomology> brute_force_cohomology(const CochainComplex& c, uint64_t bound) {
  Side c0(c.v_groups, c.v_offset, c.n0, bound);
  Side c1(c.e_groups, c.e_offset, c.n1, bound);
  if (!c0.order_ok || !c1.order_ok) return std::nullopt;

  BruteCohomology out;
  std::vector<std::vector<int64_t>> kernel;
  for (const auto& x : c0.all_elements())
    if (all_zero(apply_delta(c, c0, c1, x))) kernel.push_back(x);
  out.h0_order = kernel.size();
  out.h0_factors = subgroup_invariants(c0, kernel);

  std::vector<std::vector<int64_t>> img_gens;
  for (long j = 0; j < c.n0; ++j) {
    std::vector<Int> basis(c.n0, 0);
    basis[j] = 1;
    img_gens.push_back(c1.normal_form(matvec(c.delta, basis)));
  }
  auto image = close_subgroup(c1, img_gens);
  out.h1_order = c1.order / image.size();
  out.h1_factors = quotient_invariants(c1, {image.begin(), image.end()});
  return out;
}

CohomologyResult cohomology_groups(const Graph& graph, const GDatum& a,
                                   const CohomologyOptions& opts) {
  CochainComplex c = build_cochain_complex(graph, a);
  CohomologyResult res = cohomology_of_complex(c);
  if (auto brute = brute_force_cohomology(c, opts.cross_check_bound)) {
    if (brute->h0_order != res.h0_order || brute->h1_order != res.h1_order ||
        brute->h0_factors != res.h0_factors || brute->h1_factors != res.h1_factors)
      throw CertificationError(
          "cohomology: structural and element-enumeration computations disagree");
  }
  return res;
}

CohomologyResult cohomology_of_dilation(const Graph& graph, const DilationDatum& d,
                                        const CohomologyOptions& opts) {
  return cohomology_groups(graph, datum_from_dilation(graph, d), opts);
}

H1Classes::H1Classes(const Graph& graph, const DilationDatum& d, uint64_t class_bound)
    : graph_(&graph), datum_(d) {
  const Group& g = d.group;
  for (size_t e = 0; e < graph.edges().size(); ++e)
    qc_.emplace_back(g, d.edge_vertex_group(graph, static_cast<int>(e)));
  forest_ = spanning_forest(graph);
  cotree_ = forest_.cotree_edges;

  CohomologyResult structural = cohomology_of_dilation(graph, d);
  if (structural.h1_order > class_bound) {
    std::ostringstream os;
    os << "class enumeration bound exceeded: |H1| = " << structural.h1_order << " > "
       << class_bound;
    throw ResourceError(os.str());
  }

  uint64_t q_order = 1;
  for (int e : cotree_) {
    seg_offset_.push_back(seg_len_.empty() ? 0 : seg_offset_.back() + seg_len_.back());
    seg_len_.push_back(qc_[e].quotient_group().rank());
    if (q_order > (16 * class_bound + 4096) / std::max<uint64_t>(1, qc_[e].size()))
      throw ResourceError("class enumeration bound exceeded while expanding cotree residues");
    q_order *= qc_[e].size();
  }
  const long tuple_len = seg_len_.empty() ? 0 : seg_offset_.back() + seg_len_.back();

  // Coboundaries that vanish on the tree edges; their cotree residues form
  // the subgroup that tree-normalized cochains are defined modulo.
  CochainComplex c = build_cochain_complex(graph, datum_from_dilation(graph, d));
  std::vector<long> tree_rows;
  for (int e : forest_.tree_edges)
    for (int i = 0; i < c.e_groups[e].generators(); ++i) tree_rows.push_back(c.e_offset[e] + i);
  IntMatrix stacked = c.delta.hconcat(c.rel1);
  IntMatrix tree_part(static_cast<long>(tree_rows.size()), stacked.cols());
  for (size_t r = 0; r < tree_rows.size(); ++r)
    for (long j = 0; j < stacked.cols(); ++j)
      tree_part.at(static_cast<long>(r), j) = stacked.at(tree_rows[r], j);
  IntMatrix ker = kernel_basis(tree_part);

  std::vector<std::vector<int64_t>> k_gens;
  for (long col = 0; col < ker.cols(); ++col) {
    std::vector<Int> x(c.n0, 0);
    for (long i = 0; i < c.n0; ++i) x[i] = ker.at(i, col);
    std::vector<Int> dx = matvec(c.delta, x);
    std::vector<int64_t> tuple(tuple_len, 0);
    for (size_t ci = 0; ci < cotree_.size(); ++ci) {
      int e = cotree_[ci];
      std::vector<Int> seg(dx.begin() + c.e_offset[e], dx.begin() + c.e_offset[e] + g.rank());
      GroupElement q = qc_[e].project(g.reduce(seg));
      for (size_t i = 0; i < q.size(); ++i) tuple[seg_offset_[ci] + i] = q[i];
    }
    k_gens.push_back(std::move(tuple));
  }
  std::set<std::vector<int64_t>> k_set;
  std::vector<int64_t> zero(tuple_len, 0);
  k_set.insert(zero);
  std::deque<std::vector<int64_t>> queue{zero};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (const auto& kg : k_gens) {
      auto nxt = add_tuples(cur, kg);
      if (k_set.insert(nxt).second) queue.push_back(nxt);
    }
  }
  k_elements_.assign(k_set.begin(), k_set.end());

  // Scan residue tuples lexicographically; the first member of each coset is
  // its canonical representative.
  std::set<std::vector<int64_t>> seen;
  std::vector<int64_t> cur(tuple_len, 0);
  std::vector<int64_t> radix(tuple_len, 1);
  for (size_t ci = 0; ci < cotree_.size(); ++ci) {
    const auto& qf = qc_[cotree_[ci]].quotient_group().factors();
    for (size_t i = 0; i < qf.size(); ++i) radix[seg_offset_[ci] + i] = qf[i];
  }
  for (uint64_t visited = 0; visited < q_order; ++visited) {
    if (!seen.count(cur)) {
      index_of_[cur] = reps_.size();
      reps_.push_back(cur);
      for (const auto& k : k_elements_) seen.insert(add_tuples(cur, k));
    }
    long i = tuple_len - 1;
    while (i >= 0 && ++cur[i] == radix[i]) cur[i--] = 0;
    if (i < 0) break;
  }

  if (Int(reps_.size()) != structural.h1_order)
    throw CertificationError("class enumeration disagrees with the structural H1 order");
}

std::vector<int64_t> H1Classes::add_tuples(const std::vector<int64_t>& a,
                                           const std::vector<int64_t>& b) const {
  std::vector<int64_t> out(a.size());
  for (size_t ci = 0; ci < cotree_.size(); ++ci) {
    const auto& qf = qc_[cotree_[ci]].quotient_group().factors();
    for (size_t i = 0; i < qf.size(); ++i) {
      size_t p = seg_offset_[ci] + i;
      out[p] = (a[p] + b[p]) % qf[i];
    }
  }
  return out;
}

std::vector<int64_t> H1Classes::normalize_to_cotree(const PairCochain& pc) const {
  const Graph& g = *graph_;
  const Group& grp = datum_->group;
  if (pc.pairs.size() != g.edges().size()) throw DomainError("cochain has wrong edge count");
  // Coproduct value of each pair in G, well defined modulo C(e).
  std::vector<GroupElement> value;
  for (size_t e = 0; e < g.edges().size(); ++e)
    value.push_back(grp.add(pc.pairs[e].first, pc.pairs[e].second));

  // Zero the tree edges by a G-valued vertex correction, walking each tree
  // from its root. Any two corrections differ by a tree-supported coboundary,
  // which the minimization over K absorbs.
  std::vector<GroupElement> xi(g.cell_count(), grp.zero());
  std::vector<std::vector<int>> children(g.cell_count());
  std::deque<int> queue;
  for (int v : g.vertices()) {
    int ph = forest_.bfs_parent_halfedge[v];
    if (ph < 0)
      queue.push_back(v);
    else
      children[g.root(g.involution(ph))].push_back(v);
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : children[v]) queue.push_back(w);
    int ph = forest_.bfs_parent_halfedge[v];
    if (ph < 0) continue;
    int e = g.edge_of_halfedge(ph);
    const Edge& ed = g.edges()[e];
    int parent = g.root(g.involution(ph));
    if (ph == ed.hmax)  // v is the target: xi(t) = xi(s) - value
      xi[v] = grp.add(xi[parent], grp.neg(value[e]));
    else  // v is the source: xi(s) = value + xi(t)
      xi[v] = grp.add(value[e], xi[parent]);
  }

  const long tuple_len = seg_len_.empty() ? 0 : seg_offset_.back() + seg_len_.back();
  std::vector<int64_t> tuple(tuple_len, 0);
  for (size_t ci = 0; ci < cotree_.size(); ++ci) {
    int e = cotree_[ci];
    const Edge& ed = g.edges()[e];
    GroupElement w = grp.add(value[e], grp.add(xi[ed.target], grp.neg(xi[ed.source])));
    GroupElement q = qc_[e].project(w);
    for (size_t i = 0; i < q.size(); ++i) tuple[seg_offset_[ci] + i] = q[i];
  }
  return tuple;
}

std::vector<int64_t> H1Classes::minimize_over_k(std::vector<int64_t> tuple) const {
  std::vector<int64_t> best = tuple;
  for (const auto& k : k_elements_) {
    auto cand = add_tuples(tuple, k);
    if (cand < best) best = cand;
  }
  return best;
}

PairCochain H1Classes::representative(uint64_t index) const {
  const Graph& g = *graph_;
  PairCochain pc;
  pc.pairs.assign(g.edges().size(), {datum_->group.zero(), datum_->group.zero()});
  const auto& tuple = reps_[index];
  for (size_t ci = 0; ci < cotree_.size(); ++ci) {
    int e = cotree_[ci];
    GroupElement q(tuple.begin() + seg_offset_[ci], tuple.begin() + seg_offset_[ci] + seg_len_[ci]);
    pc.pairs[e].first = qc_[e].canonical_lift(qc_[e].coset_of_quotient_element(q));
  }
  return pc;
}

uint64_t H1Classes::class_of(const PairCochain& pc) const {
  auto tuple = minimize_over_k(normalize_to_cotree(pc));
  auto it = index_of_.find(tuple);
  if (it == index_of_.end())
    throw CertificationError("cochain reduced to an unknown class representative");
  return it->second;
}

QuotientGraphDatum collapse_subgraph(const Graph& graph, const CellSet& delta, const GDatum& a) {
  if (!is_subgraph(graph, delta)) throw DomainError("collapse: not a subgraph");
  const int n = graph.cell_count();
  QuotientGraphDatum out;
  out.cell_map.assign(n, -1);
  int next = 0;
  std::vector<int> old_of_new(n, -1);
  for (int c = 0; c < n; ++c)
    if (!delta.test(c)) {
      old_of_new[next] = c;
      out.cell_map[c] = next++;
    }
  out.w_cell = next;
  for (int c = 0; c < n; ++c)
    if (delta.test(c)) out.cell_map[c] = out.w_cell;

  std::vector<int> root(next + 1), inv(next + 1);
  root[out.w_cell] = out.w_cell;
  inv[out.w_cell] = out.w_cell;
  for (int c = 0; c < n; ++c) {
    if (delta.test(c)) continue;
    root[out.cell_map[c]] = out.cell_map[graph.root(c)];
    inv[out.cell_map[c]] = out.cell_map[graph.involution(c)];
  }
  out.graph = validate_graph(root, inv);

  const int k = a.g.rank();
  out.datum.g = a.g;
  for (int v : out.graph.vertices()) {
    if (v == out.w_cell)
      out.datum.at_vertex.push_back({PresentedGroup::from_group(a.g), IntMatrix::identity(k)});
    else
      out.datum.at_vertex.push_back(a.at_vertex[graph.vertex_position(old_of_new[v])]);
  }
  for (const Edge& ne : out.graph.edges()) {
    int old_hmin = old_of_new[ne.hmin];
    int old_e = graph.edge_of_halfedge(old_hmin);
    const GEdge& ge = a.at_edge[old_e];
    GEdge nge;
    nge.at = ge.at;
    bool swapped = graph.edges()[old_e].hmin != old_hmin;
    IntMatrix smap = swapped ? ge.target_map : ge.source_map;
    IntMatrix tmap = swapped ? ge.source_map : ge.target_map;
    nge.source_map = (ne.source == out.w_cell) ? ge.at.from_g : smap;
    nge.target_map = (ne.target == out.w_cell) ? ge.at.from_g : tmap;
    out.datum.at_edge.push_back(std::move(nge));
  }
  return out;
}

SubgraphDatum restrict_to_subgraph(const Graph& graph, const CellSet& delta, const GDatum& a) {
  if (!is_subgraph(graph, delta)) throw DomainError("restrict: not a subgraph");
  const int n = graph.cell_count();
  SubgraphDatum out;
  out.cell_map.assign(n, -1);
  int next = 0;
  std::vector<int> old_of_new(n, -1);
  for (int c = 0; c < n; ++c)
    if (delta.test(c)) {
      old_of_new[next] = c;
      out.cell_map[c] = next++;
    }
  std::vector<int> root(next), inv(next);
  for (int c = 0; c < n; ++c) {
    if (!delta.test(c)) continue;
    root[out.cell_map[c]] = out.cell_map[graph.root(c)];
    inv[out.cell_map[c]] = out.cell_map[graph.involution(c)];
  }
  out.graph = validate_graph(root, inv);
  out.datum.g = a.g;
  for (int v : out.graph.vertices())
    out.datum.at_vertex.push_back(a.at_vertex[graph.vertex_position(old_of_new[v])]);
  for (const Edge& ne : out.graph.edges()) {
    int old_hmin = old_of_new[ne.hmin];
    int old_e = graph.edge_of_halfedge(old_hmin);
    GEdge nge = a.at_edge[old_e];
    if (graph.edges()[old_e].hmin != old_hmin) std::swap(nge.source_map, nge.target_map);
    out.datum.at_edge.push_back(std::move(nge));
  }
  return out;
}

CochainComplex relative_complex(const Graph& graph, const CellSet& delta, const GDatum& a) {
  if (!is_subgraph(graph, delta)) throw DomainError("relative complex: not a subgraph");
  CochainComplex c;
  long off = 0;
  std::vector<int> vpos(graph.cell_count(), -1);
  for (size_t i = 0; i < graph.vertices().size(); ++i) {
    int v = graph.vertices()[i];
    if (delta.test(v)) continue;
    vpos[v] = static_cast<int>(c.v_groups.size());
    c.v_offset.push_back(off);
    off += a.at_vertex[i].group.generators();
    c.v_groups.push_back(a.at_vertex[i].group);
  }
  c.n0 = off;
  off = 0;
  std::vector<int> kept_edges;
  for (size_t e = 0; e < graph.edges().size(); ++e) {
    if (delta.test(graph.edges()[e].hmin)) continue;
    kept_edges.push_back(static_cast<int>(e));
    c.e_offset.push_back(off);
    off += a.at_edge[e].at.group.generators();
    c.e_groups.push_back(a.at_edge[e].at.group);
  }
  c.n1 = off;
  c.delta = IntMatrix(c.n1, c.n0);
  for (size_t ei = 0; ei < kept_edges.size(); ++ei) {
    int e = kept_edges[ei];
    const Edge& ed = graph.edges()[e];
    const GEdge& ge = a.at_edge[e];
    long er = c.e_offset[ei];
    if (!delta.test(ed.target)) {
      long tc = c.v_offset[vpos[ed.target]];
      for (long i = 0; i < ge.target_map.rows(); ++i)
        for (long j = 0; j < ge.target_map.cols(); ++j)
          c.delta.at(er + i, tc + j) += ge.target_map.at(i, j);
    }
    if (!delta.test(ed.source)) {
      long sc = c.v_offset[vpos[ed.source]];
      for (long i = 0; i < ge.source_map.rows(); ++i)
        for (long j = 0; j < ge.source_map.cols(); ++j)
          c.delta.at(er + i, sc + j) -= ge.source_map.at(i, j);
    }
  }
  c.rel0 = IntMatrix(c.n0, total_relation_cols(c.v_groups));
  c.rel1 = IntMatrix(c.n1, total_relation_cols(c.e_groups));
  fill_block_relations(c.v_groups, c.v_offset, c.rel0);
  fill_block_relations(c.e_groups, c.e_offset, c.rel1);
  return c;
}

RelativeReducedResult relative_and_reduced(const Graph& graph, const CellSet& delta,
                                           const GDatum& a) {
  RelativeReducedResult out;
  CochainComplex rel = relative_complex(graph, delta, a);
  out.relative = cohomology_of_complex(rel);

  QuotientGraphDatum q = collapse_subgraph(graph, delta, a);
  CochainComplex qc = build_cochain_complex(q.graph, q.datum);
  std::vector<IntMatrix> diag;
  for (const auto& gv : q.datum.at_vertex) diag.push_back(gv.from_g);
  out.reduced = reduced_cohomology_of_complex(qc, a.g, diag);

  out.factors_agree = out.relative.h0_factors == out.reduced.h0_factors &&
                      out.relative.h1_factors == out.reduced.h1_factors;

  // Extension by zero is a chain isomorphism onto the relative complex: with
  // the collapsed vertex's generator columns dropped, the two complexes must
  // agree block for block.
  bool ok = rel.n1 == qc.n1 && rel.rel1 == qc.rel1;
  if (ok) {
    size_t w_pos = qc.v_groups.size() - 1;
    ok = qc.v_offset[w_pos] == rel.n0;
    for (size_t i = 0; ok && i + 1 < qc.v_groups.size(); ++i)
      ok = qc.v_groups[i].relations() == rel.v_groups[i].relations();
    for (long r = 0; r < rel.delta.rows() && ok; ++r)
      for (long cidx = 0; cidx < rel.n0 && ok; ++cidx)
        ok = rel.delta.at(r, cidx) == qc.delta.at(r, cidx);
  }
  out.chain_iso_verified = ok;
  return out;
}

namespace {

// Element-level cohomology of one complex, with canonical coset labels.
struct FiniteCohomology {
  Side c0, c1;
  std::vector<std::vector<int64_t>> h0;
  std::set<std::vector<int64_t>> image;
  std::vector<std::vector<int64_t>> h1_reps;
  std::map<std::vector<int64_t>, size_t> h1_index;

  explicit FiniteCohomology(const CochainComplex& c, uint64_t bound)
      : c0(c.v_groups, c.v_offset, c.n0, bound), c1(c.e_groups, c.e_offset, c.n1, bound) {
    if (!c0.order_ok || !c1.order_ok)
      throw ResourceError("six-term sequence check: enumeration bound exceeded");
    for (const auto& x : c0.all_elements())
      if (all_zero(apply_delta(c, c0, c1, x))) h0.push_back(x);
    std::vector<std::vector<int64_t>> gens;
    for (long j = 0; j < c.n0; ++j) {
      std::vector<Int> basis(c.n0, 0);
      basis[j] = 1;
      gens.push_back(c1.normal_form(matvec(c.delta, basis)));
    }
    image = close_subgroup(c1, gens);
    for (const auto& y : c1.all_elements()) {
      auto canon = canonical(y);
      if (h1_index.emplace(canon, h1_reps.size()).second) h1_reps.push_back(canon);
    }
  }

  std::vector<int64_t> canonical(const std::vector<int64_t>& y) const {
    std::vector<int64_t> best = y;
    for (const auto& i : image) {
      auto cand = c1.add(y, i);
      if (cand < best) best = cand;
    }
    return best;
  }
};

}  // namespace

LesReport verify_les(const Graph& graph, const CellSet& delta, const GDatum& a,
                     uint64_t enumeration_bound) {
  validate_gdatum(graph, a);
  CochainComplex full_c = build_cochain_complex(graph, a);
  SubgraphDatum sub = restrict_to_subgraph(graph, delta, a);
  CochainComplex sub_c = build_cochain_complex(sub.graph, sub.datum);
  CochainComplex rel_c = relative_complex(graph, delta, a);

  FiniteCohomology full(full_c, enumeration_bound);
  FiniteCohomology subf(sub_c, enumeration_bound);
  FiniteCohomology rel(rel_c, enumeration_bound);

  std::vector<int> out_vertices, in_vertices, out_edges, in_edges;
  for (int v : graph.vertices()) (delta.test(v) ? in_vertices : out_vertices).push_back(v);
  for (size_t e = 0; e < graph.edges().size(); ++e)
    (delta.test(graph.edges()[e].hmin) ? in_edges : out_edges).push_back(static_cast<int>(e));

  auto extend0 = [&](const std::vector<int64_t>& x) {
    std::vector<int64_t> out(full_c.n0, 0);
    for (size_t i = 0; i < out_vertices.size(); ++i) {
      long src = rel_c.v_offset[i];
      long dst = full_c.v_offset[graph.vertex_position(out_vertices[i])];
      for (int j = 0; j < rel_c.v_groups[i].generators(); ++j) out[dst + j] = x[src + j];
    }
    return out;
  };
  auto restrict0 = [&](const std::vector<int64_t>& x) {
    std::vector<int64_t> out(sub_c.n0, 0);
    for (size_t i = 0; i < in_vertices.size(); ++i) {
      long dst = sub_c.v_offset[i];
      long src = full_c.v_offset[graph.vertex_position(in_vertices[i])];
      for (int j = 0; j < sub_c.v_groups[i].generators(); ++j) out[dst + j] = x[src + j];
    }
    return out;
  };
  auto lift0 = [&](const std::vector<int64_t>& x) {
    std::vector<int64_t> out(full_c.n0, 0);
    for (size_t i = 0; i < in_vertices.size(); ++i) {
      long src = sub_c.v_offset[i];
      long dst = full_c.v_offset[graph.vertex_position(in_vertices[i])];
      for (int j = 0; j < sub_c.v_groups[i].generators(); ++j) out[dst + j] = x[src + j];
    }
    return out;
  };
  auto extend1 = [&](const std::vector<int64_t>& y) {
    std::vector<int64_t> out(full_c.n1, 0);
    for (size_t i = 0; i < out_edges.size(); ++i) {
      long src = rel_c.e_offset[i];
      long dst = full_c.e_offset[out_edges[i]];
      for (int j = 0; j < rel_c.e_groups[i].generators(); ++j) out[dst + j] = y[src + j];
    }
    return out;
  };
  auto restrict1_sub = [&](const std::vector<int64_t>& y) {
    std::vector<int64_t> out(sub_c.n1, 0);
    for (size_t i = 0; i < in_edges.size(); ++i) {
      long dst = sub_c.e_offset[i];
      long src = full_c.e_offset[in_edges[i]];
      for (int j = 0; j < sub_c.e_groups[i].generators(); ++j) out[dst + j] = y[src + j];
    }
    return out;
  };
  auto restrict1_rel = [&](const std::vector<int64_t>& y) {
    std::vector<int64_t> out(rel_c.n1, 0);
    for (size_t i = 0; i < out_edges.size(); ++i) {
      long dst = rel_c.e_offset[i];
      long src = full_c.e_offset[out_edges[i]];
      for (int j = 0; j < rel_c.e_groups[i].generators(); ++j) out[dst + j] = y[src + j];
    }
    return out;
  };

  LesReport report;
  report.orders = {rel.h0.size(),      full.h0.size(),      subf.h0.size(),
                   rel.h1_reps.size(), full.h1_reps.size(), subf.h1_reps.size()};

  std::set<std::vector<int64_t>> im_alpha, ker_beta, im_beta, ker_snake, im_snake, ker_gamma,
      im_gamma, ker_pi, im_pi;

  for (const auto& x : rel.h0) im_alpha.insert(extend0(x));
  report.start_injective = im_alpha.size() == rel.h0.size();

  for (const auto& x : full.h0) {
    auto r = restrict0(x);
    im_beta.insert(r);
    if (all_zero(r)) ker_beta.insert(x);
  }
  report.exact_h0_total = im_alpha == ker_beta;

  // Connecting map: lift to the total complex by zero, apply the total
  // coboundary, read off the relative cochain.
  auto zero_rel_class = rel.canonical(std::vector<int64_t>(rel_c.n1, 0));
  auto snake = [&](const std::vector<int64_t>& x) {
    auto dy = full.c1.normal_form(matvec(full_c.delta, full.c0.representative(lift0(x))));
    for (size_t i = 0; i < in_edges.size(); ++i) {
      long src = full_c.e_offset[in_edges[i]];
      for (int j = 0; j < sub_c.e_groups[i].generators(); ++j)
        if (dy[src + j] != 0)
          throw CertificationError("snake image does not vanish on the subgraph");
    }
    return rel.canonical(restrict1_rel(dy));
  };
  for (const auto& x : subf.h0) {
    auto s = snake(x);
    im_snake.insert(s);
    if (s == zero_rel_class) ker_snake.insert(x);
  }
  report.exact_h0_sub = im_beta == ker_snake;

  auto zero_full_class = full.canonical(std::vector<int64_t>(full_c.n1, 0));
  auto zero_sub_class = subf.canonical(std::vector<int64_t>(sub_c.n1, 0));
  for (const auto& y : rel.h1_reps) {
    auto img = full.canonical(extend1(y));
    im_gamma.insert(img);
    if (img == zero_full_class) ker_gamma.insert(y);
  }
  report.exact_h1_rel = im_snake == ker_gamma;

  for (const auto& y : full.h1_reps) {
    auto img = subf.canonical(restrict1_sub(y));
    im_pi.insert(img);
    if (img == zero_sub_class) ker_pi.insert(y);
  }
  report.exact_h1_total = im_gamma == ker_pi;
  report.end_surjective = im_pi.size() == subf.h1_reps.size();
  return report;
}

std::string format_factors(const std::vector<Int>& factors) {
  if (factors.empty()) return "0";
  std::string out;
  for (size_t i = 0; i < factors.size(); ++i) {
    if (i) out += " x ";
    out += "Z/" + factors[i].str();
  }
  return out;
}

}  // namespace dilacov
