#include "dilacov/covers.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

void certify(bool ok, const std::string& axiom) {
  if (!ok) throw CertificationError("cover axiom violated: " + axiom);
}

std::vector<int> compose(const std::vector<int>& f, const std::vector<int>& g) {
  std::vector<int> out(f.size());
  for (size_t i = 0; i < f.size(); ++i) out[i] = f[g[i]];
  return out;
}

// Stabilizer derivation runs once per base cell per certification; memoize
// by the closed element set.
const Subgroup& cached_subgroup(const Group& g, const std::vector<GroupElement>& elements) {
  thread_local std::map<std::vector<int64_t>, Subgroup> cache;
  std::vector<int64_t> key = g.factors();
  key.push_back(-1);
  for (const auto& e : elements)
    for (int64_t c : e) key.push_back(c);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(std::move(key), Subgroup::from_generators(g, elements)).first;
  return it->second;
}

}  // namespace

std::vector<int> Cover::permutation_of(const GroupElement& g) const {
  std::vector<int> perm(total.cell_count());
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t j = 0; j < g.size(); ++j)
    for (int64_t r = 0; r < g[j]; ++r) perm = compose(action[j], perm);
  return perm;
}

Cover certify_cover(Graph base, Graph total, std::vector<int> projection,
                    std::vector<std::vector<int>> action, std::vector<int64_t> degrees,
                    const Group& group, std::optional<DilationDatum> expected_datum) {
  const int nt = total.cell_count();
  if (expected_datum) certify(expected_datum->group == group, "datum group matches");
  certify(static_cast<int>(projection.size()) == nt, "projection size");
  certify(static_cast<int>(degrees.size()) == nt, "degree size");

  // Projection commutes with the structure maps and preserves cell types.
  std::vector<bool> hit(base.cell_count(), false);
  for (int c = 0; c < nt; ++c) {
    int p = projection[c];
    certify(p >= 0 && p < base.cell_count(), "projection range");
    hit[p] = true;
    certify(projection[total.root(c)] == base.root(p), "projection commutes with root");
    certify(projection[total.involution(c)] == base.involution(p),
            "projection commutes with involution");
    certify(total.is_vertex(c) == base.is_vertex(p), "projection preserves vertices");
    certify(total.is_leg(c) == base.is_leg(p), "projection maps legs to legs and edges to edges");
  }
  certify(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }), "projection surjective");

  // The action: automorphisms that never flip an edge, commuting with the
  // projection, with the right orders and commutativity.
  const Group& g = group;
  certify(static_cast<int>(action.size()) == g.rank(), "action generator count");
  for (int j = 0; j < g.rank(); ++j) {
    const auto& perm = action[j];
    certify(static_cast<int>(perm.size()) == nt, "action permutation size");
    std::vector<bool> seen(nt, false);
    for (int c = 0; c < nt; ++c) {
      certify(perm[c] >= 0 && perm[c] < nt && !seen[perm[c]], "action is a permutation");
      seen[perm[c]] = true;
      certify(perm[total.root(c)] == total.root(perm[c]), "action commutes with root");
      certify(perm[total.involution(c)] == total.involution(perm[c]),
              "action commutes with involution");
      certify(projection[perm[c]] == projection[c], "action commutes with projection");
      if (!total.is_vertex(c) && total.involution(c) != c)
        certify(perm[c] != total.involution(c), "action never flips an edge");
    }
  }
  // Generator orders and pairwise commutation.
  std::vector<int> id(nt);
  std::iota(id.begin(), id.end(), 0);
  for (int j = 0; j < g.rank(); ++j) {
    std::vector<int> pow = id;
    for (int64_t r = 0; r < g.factors()[j]; ++r) pow = compose(action[j], pow);
    certify(pow == id, "generator order divides the invariant factor");
    for (int i = j + 1; i < g.rank(); ++i)
      certify(compose(action[i], action[j]) == compose(action[j], action[i]),
              "action generators commute");
  }

  Cover c;
  c.base = std::move(base);
  c.total = std::move(total);
  c.projection = std::move(projection);
  c.action = std::move(action);
  c.degrees = std::move(degrees);
  c.datum.group = g;
  c.datum.assign.assign(c.base.cell_count(), Subgroup::trivial(g));

  // Fibers: transitivity and stabilizers.
  std::vector<std::vector<int>> element_perms;
  for (const auto& e : g.elements()) element_perms.push_back(c.permutation_of(e));
  std::vector<std::vector<int>> fibers(c.base.cell_count());
  for (int t = 0; t < c.total.cell_count(); ++t) fibers[c.projection[t]].push_back(t);
  auto elements = g.elements();
  for (int x = 0; x < c.base.cell_count(); ++x) {
    const auto& fiber = fibers[x];
    std::set<int> orbit;
    std::vector<GroupElement> stab;
    for (size_t gi = 0; gi < elements.size(); ++gi) {
      int image = element_perms[gi][fiber[0]];
      orbit.insert(image);
      if (image == fiber[0]) stab.push_back(elements[gi]);
    }
    certify(orbit.size() == fiber.size(), "action transitive on fibers");
    c.datum.assign[x] = cached_subgroup(g, stab);
  }
  c.datum = validate_dilation(c.base, g, c.datum.assign);
  if (expected_datum) certify(c.datum == *expected_datum, "stabilizers realize the dilation datum");

  // Degrees and harmonicity.
  for (int t = 0; t < c.total.cell_count(); ++t)
    certify(c.degrees[t] == static_cast<int64_t>(c.datum.assign[c.projection[t]].order()),
            "local degree equals the stabilizer order");
  for (int vt : c.total.vertices()) {
    int vb = c.projection[vt];
    for (int h : c.base.tangents(vb)) {
      int64_t sum = 0;
      for (int ht : c.total.tangents(vt))
        if (c.projection[ht] == h) sum += c.degrees[ht];
      certify(sum == c.degrees[vt], "harmonicity at every vertex and direction");
    }
  }

  // Metric compatibility when both sides carry lengths.
  if (c.base.has_lengths() && c.total.has_lengths()) {
    for (size_t e = 0; e < c.total.edges().size(); ++e) {
      const Edge& ed = c.total.edges()[e];
      int be = c.base.edge_of_halfedge(c.projection[ed.hmin]);
      certify(c.base.length(be) == c.total.length(static_cast<int>(e)) * c.degrees[ed.hmin],
              "metric dilation l(phi(e')) = d(e') l'(e')");
    }
  }
  return c;
}

Cover build_cover(const Graph& base, const DilationDatum& d, const PairCochain& eta,
                  GenusMode mode, const std::function<int64_t(int)>* genus_override) {
  const Group& g = d.group;
  if (eta.pairs.size() != base.edges().size())
    throw DomainError("build_cover: cochain has wrong edge count");
  for (const auto& [a, b] : eta.pairs)
    if (static_cast<int>(a.size()) != g.rank() || static_cast<int>(b.size()) != g.rank())
      throw DomainError("build_cover: cochain entry has wrong rank");
  if (mode == GenusMode::kUnramified) {
    if (!base.has_genus()) throw DomainError("build_cover: unramified mode needs a genus map");
    if (!is_admissible(base, d))
      throw DomainError("build_cover: inadmissible dilation datum in unramified mode");
  }

  // Fibers are laid out base-cell-major in canonical coset order.
  std::vector<const QuotientPresentation*> qpv;
  std::vector<int> offset(base.cell_count() + 1, 0);
  for (int x = 0; x < base.cell_count(); ++x) {
    qpv.push_back(&cached_quotient(g, d.assign[x]));
    offset[x + 1] = offset[x] + static_cast<int>(qpv[x]->size());
  }
  auto qp = [&](int x) -> const QuotientPresentation& { return *qpv[x]; };
  const int nt = offset[base.cell_count()];

  std::vector<int> root(nt), inv(nt), projection(nt);
  std::vector<int64_t> degrees(nt);
  for (int x = 0; x < base.cell_count(); ++x)
    for (int i = 0; i < static_cast<int>(qp(x).size()); ++i) {
      projection[offset[x] + i] = x;
      degrees[offset[x] + i] = static_cast<int64_t>(d.assign[x].order());
    }

  for (int v : base.vertices())
    for (int i = 0; i < static_cast<int>(qp(v).size()); ++i) {
      root[offset[v] + i] = offset[v] + i;
      inv[offset[v] + i] = offset[v] + i;
    }
  for (int l : base.legs()) {
    int v = base.root(l);
    for (int i = 0; i < static_cast<int>(qp(l).size()); ++i) {
      int cell = offset[l] + i;
      inv[cell] = cell;
      root[cell] = offset[v] + static_cast<int>(qp(v).project_index(qp(l).canonical_lift(i)));
    }
  }
  for (size_t e = 0; e < base.edges().size(); ++e) {
    const Edge& ed = base.edges()[e];
    const GroupElement& a = eta.pairs[e].first;
    const GroupElement& b = eta.pairs[e].second;
    for (int i = 0; i < static_cast<int>(qp(ed.hmin).size()); ++i) {
      int zmin = offset[ed.hmin] + i, zmax = offset[ed.hmax] + i;
      inv[zmin] = zmax;
      inv[zmax] = zmin;
      GroupElement lift = qp(ed.hmin).canonical_lift(i);
      root[zmin] = offset[ed.source] + static_cast<int>(qp(ed.source).project_index(g.add(lift, a)));
      root[zmax] = offset[ed.target] +
                   static_cast<int>(qp(ed.target).project_index(g.add(lift, g.neg(b))));
    }
  }

  std::optional<std::map<int, int64_t>> genus;
  if (mode == GenusMode::kUnramified) {
    genus.emplace();
    for (int v : base.vertices()) {
      Rational gp = admissible_genus(base, d, v);
      int64_t gv = numerator(gp).convert_to<int64_t>();
      for (int i = 0; i < static_cast<int>(qp(v).size()); ++i) (*genus)[offset[v] + i] = gv;
    }
  } else if (base.has_genus() || genus_override) {
    genus.emplace();
    for (int v : base.vertices()) {
      int64_t gv = genus_override ? (*genus_override)(v) : base.genus(v);
      for (int i = 0; i < static_cast<int>(qp(v).size()); ++i) (*genus)[offset[v] + i] = gv;
    }
  }

  std::optional<std::map<std::pair<int, int>, Rational>> lengths;
  if (base.has_lengths()) {
    lengths.emplace();
    for (size_t e = 0; e < base.edges().size(); ++e) {
      const Edge& ed = base.edges()[e];
      Rational lifted = base.length(static_cast<int>(e)) / Rational(d.assign[ed.hmin].order());
      for (int i = 0; i < static_cast<int>(qp(ed.hmin).size()); ++i)
        (*lengths)[{offset[ed.hmin] + i, offset[ed.hmax] + i}] = lifted;
    }
  }

  std::vector<std::vector<int>> action;
  for (int j = 0; j < g.rank(); ++j) {
    std::vector<int> perm(nt);
    GroupElement gen = g.generator(j);
    for (int x = 0; x < base.cell_count(); ++x)
      for (int i = 0; i < static_cast<int>(qp(x).size()); ++i)
        perm[offset[x] + i] =
            offset[x] + static_cast<int>(qp(x).project_index(g.add(qp(x).canonical_lift(i), gen)));
    action.push_back(std::move(perm));
  }

  Graph total = validate_graph(root, inv, genus, lengths);
  return certify_cover(base, std::move(total), std::move(projection), std::move(action),
                       std::move(degrees), g, d);
}

CoverClass class_of_cover(const Cover& c, const H1Classes& classes) {
  const Group& g = c.datum.group;
  auto elements = g.elements();
  std::vector<std::vector<int>> element_perms;
  for (const auto& e : elements) element_perms.push_back(c.permutation_of(e));

  std::vector<std::vector<int>> fibers(c.base.cell_count());
  for (int t = 0; t < c.total.cell_count(); ++t) fibers[c.projection[t]].push_back(t);

  // Equivariant identifications f_x: fiber(x) -> G/D(x), anchored at the
  // least fiber cell; legs are then shifted so their root maps are plain
  // reductions.
  std::vector<const QuotientPresentation*> qpv;
  for (int x = 0; x < c.base.cell_count(); ++x) qpv.push_back(&cached_quotient(g, c.datum.assign[x]));
  auto qp = [&](int x) -> const QuotientPresentation& { return *qpv[x]; };
  std::vector<std::vector<int64_t>> f(c.base.cell_count());
  for (int x = 0; x < c.base.cell_count(); ++x) {
    f[x].assign(c.total.cell_count(), -1);
    int anchor = fibers[x][0];
    for (size_t gi = 0; gi < elements.size(); ++gi) {
      int cell = element_perms[gi][anchor];
      if (f[x][cell] < 0) f[x][cell] = qp(x).project_index(elements[gi]);
    }
  }
  auto shift_fiber = [&](int x, const GroupElement& delta) {
    for (int cell : fibers[x])
      f[x][cell] = qp(x).project_index(g.add(qp(x).canonical_lift(f[x][cell]), delta));
  };
  for (int l : c.base.legs()) {
    int v = c.base.root(l);
    int z = fibers[l][0];
    GroupElement lift_l = qp(l).canonical_lift(f[l][z]);
    GroupElement lift_v = qp(v).canonical_lift(f[v][c.total.root(z)]);
    // Want f_v(root(z)) = f_l(z) mod D(v); shift f_l by the discrepancy.
    GroupElement kappa = g.add(lift_v, g.neg(lift_l));
    if (qp(v).project_index(kappa) != qp(v).project_index(g.zero())) shift_fiber(l, kappa);
  }

  PairCochain pc;
  pc.pairs.assign(c.base.edges().size(), {g.zero(), g.zero()});
  for (size_t e = 0; e < c.base.edges().size(); ++e) {
    const Edge& ed = c.base.edges()[e];
    // Identify the edge fiber through the hmin side; the hmax side follows
    // the involution.
    int z = fibers[ed.hmin][0];
    GroupElement fe = qp(ed.hmin).canonical_lift(f[ed.hmin][z]);
    GroupElement fs = qp(ed.source).canonical_lift(f[ed.source][c.total.root(z)]);
    GroupElement ft = qp(ed.target).canonical_lift(f[ed.target][c.total.root(c.total.involution(z))]);
    pc.pairs[e].first = g.add(fs, g.neg(fe));
    pc.pairs[e].second = g.add(fe, g.neg(ft));
  }

  CoverClass out;
  out.datum = c.datum;
  out.class_index = classes.class_of(pc);
  out.representative = classes.representative(out.class_index);
  return out;
}

namespace {

// Coordinates of a subgroup H <= G as an abstract group, with maps back and
// forth. Used to restrict classes to subgroup covers.
struct SubgroupView {
  Group parent;
  Subgroup h;
  PresentedGroup pres;  // Z^k / W where basis(h) * W = diag(d)
  Group as_group;

  explicit SubgroupView(const Subgroup& sub) : parent(sub.parent()), h(sub) {
    const int k = parent.rank();
    if (k == 0) {
      pres = PresentedGroup(0, IntMatrix(0, 0));
      as_group = Group(std::vector<int64_t>{});
      return;
    }
    std::vector<Int> d(parent.factors().begin(), parent.factors().end());
    IntMatrix w = solve_lower_triangular_matrix(h.basis(), IntMatrix::diagonal(d));
    pres = PresentedGroup(k, w);
    as_group = Group(pres.invariant_factors());
  }

  GroupElement to_sub(const GroupElement& g_elt) const {
    if (parent.rank() == 0) return {};
    std::vector<Int> lift(g_elt.begin(), g_elt.end());
    auto x = solve_lower_triangular(h.basis(), lift);
    if (!x) throw DomainError("element is not in the subgroup");
    auto nf = pres.normal_form(*x);
    GroupElement out;
    for (size_t i = 0; i < nf.size(); ++i)
      if (pres.torsion()[i] > 1) out.push_back(nf[i]);
    return out;
  }

  GroupElement to_parent(const GroupElement& s_elt) const {
    if (parent.rank() == 0) return parent.zero();
    std::vector<int64_t> full(pres.torsion().size(), 0);
    size_t pos = 0;
    for (size_t i = 0; i < full.size(); ++i)
      if (pres.torsion()[i] > 1) full[i] = s_elt[pos++];
    std::vector<Int> x = pres.representative(full);
    std::vector<Int> raw(parent.rank(), 0);
    for (int i = 0; i < parent.rank(); ++i)
      for (int j = 0; j < parent.rank(); ++j) raw[i] += h.basis().at(i, j) * x[j];
    return parent.reduce(raw);
  }

  Subgroup subgroup_to_sub(const Subgroup& k) const {
    std::vector<GroupElement> gens;
    for (const auto& e : k.elements()) gens.push_back(to_sub(e));
    return Subgroup::from_generators(as_group, gens);
  }
};

}  // namespace

ConnectivityReport connectivity(const Cover& c, bool verify_membership, uint64_t class_bound) {
  ConnectivityReport out;
  out.components = c.total.component_count();
  out.connected = out.components <= 1;

  const Group& g = c.datum.group;
  Subgroup span = Subgroup::trivial(g);
  for (int v : c.base.vertices()) span = subgroup_sum(span, c.datum.assign[v]);
  out.vertex_groups_span = span.is_full();

  auto elements = g.elements();
  std::vector<std::vector<int>> element_perms;
  for (const auto& e : elements) element_perms.push_back(c.permutation_of(e));

  std::vector<int> least_total(c.base.component_count(), -1);
  for (int t = 0; t < c.total.cell_count(); ++t) {
    int bc = c.base.component_of(c.projection[t]);
    if (least_total[bc] < 0) least_total[bc] = t;
  }
  for (int bc = 0; bc < c.base.component_count(); ++bc) {
    int t0 = least_total[bc];
    std::vector<GroupElement> stab;
    for (size_t gi = 0; gi < elements.size(); ++gi)
      if (c.total.component_of(element_perms[gi][t0]) == c.total.component_of(t0))
        stab.push_back(elements[gi]);
    out.component_stabilizers.push_back(Subgroup::from_generators(g, stab));
  }

  if (verify_membership && c.base.component_count() == 1) {
    // The class must lie in the image of the subgroup cover classes for the
    // derived component stabilizer.
    const Subgroup& hstar = out.component_stabilizers[0];
    H1Classes full(c.base, c.datum, class_bound);
    uint64_t target = class_of_cover(c, full).class_index;
    SubgroupView view(hstar);
    DilationDatum dh;
    dh.group = view.as_group;
    dh.assign.reserve(c.base.cell_count());
    for (int x = 0; x < c.base.cell_count(); ++x)
      dh.assign.push_back(view.subgroup_to_sub(c.datum.assign[x]));
    dh = validate_dilation(c.base, view.as_group, dh.assign);
    H1Classes sub(c.base, dh, class_bound);
    bool found = false;
    for (uint64_t i = 0; i < sub.count() && !found; ++i) {
      PairCochain pc = sub.representative(i);
      PairCochain mapped;
      mapped.pairs.reserve(pc.pairs.size());
      for (const auto& [a, b] : pc.pairs)
        mapped.pairs.push_back({view.to_parent(a), view.to_parent(b)});
      found = full.class_of(mapped) == target;
    }
    if (!found)
      throw CertificationError("connectivity witness failed the image membership search");
    out.membership_verified = true;
  }
  return out;
}

RamificationReport verify_unramified(const Cover& c) {
  if (!c.base.has_genus() || !c.total.has_genus())
    throw DomainError("verify_unramified: genus maps required on both graphs");
  RamificationReport out;
  out.effective = true;
  out.unramified = true;
  for (int vt : c.total.vertices()) {
    int vb = c.projection[vt];
    int64_t chi_b = 2 - 2 * c.base.genus(vb) - c.base.valence(vb);
    int64_t chi_t = 2 - 2 * c.total.genus(vt) - c.total.valence(vt);
    int64_t ram = c.degrees[vt] * chi_b - chi_t;
    out.ram.push_back(ram);
    if (ram < 0) out.effective = false;
    if (ram != 0) out.unramified = false;
  }
  out.chi_base = euler_and_genus(c.base).chi_total;
  out.chi_total = euler_and_genus(c.total).chi_total;
  out.global_ok = out.chi_total == c.degree() * out.chi_base;
  return out;
}

std::map<std::pair<int, int>, Rational> lift_metric(const Cover& c) {
  if (!c.base.has_lengths()) throw DomainError("lift_metric: base has no lengths");
  std::map<std::pair<int, int>, Rational> out;
  for (const Edge& ed : c.total.edges()) {
    int be = c.base.edge_of_halfedge(c.projection[ed.hmin]);
    out[{ed.hmin, ed.hmax}] = c.base.length(be) / Rational(c.degrees[ed.hmin]);
  }
  return out;
}

CoverCatalog enumerate_covers(const Graph& base, const Group& g, const EnumerateOptions& opts) {
  DilationEnumerationOptions dopts;
  dopts.include_edge_groups = opts.expand_edge_groups || opts.mode == CoverMode::kAll;
  dopts.cyclic_edges_only = opts.cyclic_edges_only;
  dopts.admissible_only = opts.mode == CoverMode::kUnramified;
  dopts.max_group_order = opts.max_group_order;
  dopts.max_candidates = opts.max_candidates;

  CoverCatalog catalog;
  catalog.data = enumerate_admissible_dilations(base, g, dopts);

  struct DatumResult {
    uint64_t classes = 0;
    std::vector<CatalogRow> rows;
    std::vector<Cover> covers;  // retained only when a callback is installed
  };
  const bool keep_covers = static_cast<bool>(opts.on_cover);
  GenusMode gmode =
      opts.mode == CoverMode::kUnramified ? GenusMode::kUnramified : GenusMode::kPullback;

  auto run_datum = [&](int id) {
    DatumResult res;
    const DilationDatum& d = catalog.data[id];
    H1Classes classes(base, d, opts.class_bound);
    res.classes = classes.count();
    for (uint64_t i = 0; i < classes.count(); ++i) {
      Cover cover = build_cover(base, d, classes.representative(i), gmode);
      if (opts.certify) {
        // build_cover certifies; re-run the classifier as the round trip check.
        uint64_t back = class_of_cover(cover, classes).class_index;
        if (back != i)
          throw CertificationError("cover axiom violated: class round trip mismatch");
      }
      ConnectivityReport conn = connectivity(cover);
      CatalogRow row;
      row.datum_id = id;
      row.class_index = i;
      row.components = conn.components;
      row.connected = conn.connected;
      row.total_vertices = static_cast<int>(cover.total.vertices().size());
      row.total_edges = static_cast<int>(cover.total.edges().size());
      res.rows.push_back(row);
      if (keep_covers) res.covers.push_back(std::move(cover));
    }
    return res;
  };

  const int n = static_cast<int>(catalog.data.size());
  std::vector<DatumResult> results(n);
  int threads = std::max(1, opts.threads);
  if (threads <= 1 || n <= 1) {
    for (int id = 0; id < n; ++id) results[id] = run_datum(id);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(threads, n); ++w)
      futures.push_back(std::async(std::launch::async, [&] {
        for (int id = next.fetch_add(1); id < n; id = next.fetch_add(1))
          results[id] = run_datum(id);
      }));
    for (auto& f : futures) f.get();
  }

  for (int id = 0; id < n; ++id) {
    catalog.classes_per_datum.push_back(results[id].classes);
    for (size_t i = 0; i < results[id].rows.size(); ++i) {
      const CatalogRow& row = results[id].rows[i];
      catalog.rows.push_back(row);
      catalog.total_covers += 1;
      if (row.connected) catalog.connected_covers += 1;
      if (opts.on_cover) opts.on_cover(catalog.data[id], row.class_index, results[id].covers[i]);
    }
  }
  return catalog;
}

IsomorphismResult covers_isomorphic(const Cover& c1, const Cover& c2) {
  IsomorphismResult out;
  // Same base and group required; different dilation data can never be
  // isomorphic since stabilizers differ.
  if (c1.base.cell_count() != c2.base.cell_count() || c1.datum.group != c2.datum.group)
    return out;
  for (int c = 0; c < c1.base.cell_count(); ++c)
    if (c1.base.root(c) != c2.base.root(c) || c1.base.involution(c) != c2.base.involution(c))
      return out;
  if (!(c1.datum == c2.datum)) return out;
  if (c1.total.cell_count() != c2.total.cell_count()) return out;
  if (c1.total.component_count() != c2.total.component_count()) return out;

  const int nt = c1.total.cell_count();
  const Group& g = c1.datum.group;
  auto elements = g.elements();
  std::vector<std::vector<int>> perms1, perms2;
  for (const auto& e : elements) {
    perms1.push_back(c1.permutation_of(e));
    perms2.push_back(c2.permutation_of(e));
  }
  std::vector<std::vector<int>> fibers2(c1.base.cell_count());
  for (int t = 0; t < nt; ++t) fibers2[c2.projection[t]].push_back(t);

  std::vector<int> psi(nt, -1);
  std::vector<bool> used(nt, false);

  // Propagate the consequences of psi[a] = b; returns the trail for undo.
  auto propagate = [&](int a0, int b0, std::vector<int>& trail) {
    std::deque<std::pair<int, int>> queue{{a0, b0}};
    while (!queue.empty()) {
      auto [a, b] = queue.front();
      queue.pop_front();
      if (psi[a] == b) continue;
      if (psi[a] >= 0 || used[b]) return false;
      if (c1.projection[a] != c2.projection[b]) return false;
      psi[a] = b;
      used[b] = true;
      trail.push_back(a);
      queue.push_back({c1.total.root(a), c2.total.root(b)});
      queue.push_back({c1.total.involution(a), c2.total.involution(b)});
      for (size_t gi = 0; gi < perms1.size(); ++gi)
        queue.push_back({perms1[gi][a], perms2[gi][b]});
    }
    return true;
  };
  auto undo = [&](const std::vector<int>& trail) {
    for (int a : trail) {
      used[psi[a]] = false;
      psi[a] = -1;
    }
  };

  std::function<bool(int)> solve = [&](int from) {
    int seed = -1;
    for (int a = from; a < nt; ++a)
      if (psi[a] < 0) { seed = a; break; }
    if (seed < 0) return true;
    for (int b : fibers2[c1.projection[seed]]) {
      if (used[b]) continue;
      std::vector<int> trail;
      if (propagate(seed, b, trail) && solve(seed + 1)) return true;
      undo(trail);
    }
    return false;
  };
  if (!solve(0)) return out;

  // Full verification of the witness.
  for (int a = 0; a < nt; ++a) {
    if (psi[c1.total.root(a)] != c2.total.root(psi[a])) return out;
    if (psi[c1.total.involution(a)] != c2.total.involution(psi[a])) return out;
    if (c1.projection[a] != c2.projection[psi[a]]) return out;
  }
  for (size_t gi = 0; gi < perms1.size(); ++gi)
    for (int a = 0; a < nt; ++a)
      if (psi[perms1[gi][a]] != perms2[gi][psi[a]]) return out;
  out.isomorphic = true;
  out.witness = psi;
  return out;
}

Cover contract_cover(const Cover& c, const std::vector<int>& base_edge_indices) {
  // Preimage edges upstairs.
  std::set<int> s_base(base_edge_indices.begin(), base_edge_indices.end());
  std::vector<int> s_total;
  for (size_t e = 0; e < c.total.edges().size(); ++e)
    if (s_base.count(c.base.edge_of_halfedge(c.projection[c.total.edges()[e].hmin])))
      s_total.push_back(static_cast<int>(e));

  // Cells swallowed by the contraction upstairs.
  CellSet delta_t(c.total.cell_count());
  for (int e : s_total) {
    const Edge& ed = c.total.edges()[e];
    for (int cell : {ed.hmin, ed.hmax, ed.source, ed.target}) delta_t.set(cell);
  }

  ContractionResult base_r = weighted_edge_contraction(c.base, base_edge_indices);
  ContractionResult total_r = weighted_edge_contraction(c.total, s_total);

  const int nt = total_r.graph.cell_count();
  std::vector<int> projection(nt, -1);
  std::vector<int64_t> degrees(nt, 0);
  std::vector<std::vector<int>> action(c.datum.group.rank(), std::vector<int>(nt, -1));

  for (int t = 0; t < c.total.cell_count(); ++t) {
    int nt_cell = total_r.cell_map[t];
    projection[nt_cell] = base_r.cell_map[c.projection[t]];
    for (int j = 0; j < c.datum.group.rank(); ++j)
      action[j][nt_cell] = total_r.cell_map[c.action[j][t]];
    if (!delta_t.test(t)) degrees[nt_cell] = c.degrees[t];
  }

  // A contracted component's vertex gets the harmonic degree of the
  // restricted morphism: the degree sum over one base vertex's lifts in it.
  for (int nv : total_r.graph.vertices()) {
    if (degrees[nv] > 0) continue;
    int base_ref = -1;
    int64_t sum = 0;
    for (int t = 0; t < c.total.cell_count(); ++t) {
      if (total_r.cell_map[t] != nv || !delta_t.test(t) || !c.total.is_vertex(t)) continue;
      if (base_ref < 0) base_ref = c.projection[t];
      if (c.projection[t] == base_ref) sum += c.degrees[t];
    }
    degrees[nv] = sum;
  }

  return certify_cover(base_r.graph, total_r.graph, std::move(projection), std::move(action),
                       std::move(degrees), c.datum.group, std::nullopt);
}

namespace {

// Shared mutable state for the lockstep stabilization of a cover.
struct MutableCover {
  std::vector<int> broot, binv;
  std::vector<bool> balive;
  std::vector<int64_t> bgenus;
  std::map<std::pair<int, int>, Rational> blengths;
  bool has_lengths;

  std::vector<int> troot, tinv;
  std::vector<bool> talive;
  std::vector<int64_t> tgenus;
  std::vector<int> proj;
  std::vector<int64_t> deg;
  std::vector<std::vector<int>> action;

  explicit MutableCover(const Cover& c)
      : broot(c.base.cell_count()), binv(c.base.cell_count()),
        balive(c.base.cell_count(), true), bgenus(c.base.cell_count(), 0),
        has_lengths(c.base.has_lengths()), troot(c.total.cell_count()),
        tinv(c.total.cell_count()), talive(c.total.cell_count(), true),
        tgenus(c.total.cell_count(), 0), proj(c.projection), deg(c.degrees), action(c.action) {
    for (int x = 0; x < c.base.cell_count(); ++x) {
      broot[x] = c.base.root(x);
      binv[x] = c.base.involution(x);
      if (c.base.is_vertex(x)) bgenus[x] = c.base.genus(x);
    }
    if (has_lengths)
      for (size_t e = 0; e < c.base.edges().size(); ++e)
        blengths[{c.base.edges()[e].hmin, c.base.edges()[e].hmax}] = c.base.length(static_cast<int>(e));
    for (int t = 0; t < c.total.cell_count(); ++t) {
      troot[t] = c.total.root(t);
      tinv[t] = c.total.involution(t);
      if (c.total.is_vertex(t) && c.total.has_genus()) tgenus[t] = c.total.genus(t);
    }
  }

  std::vector<int> base_tangents(int v) const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(broot.size()); ++c)
      if (balive[c] && c != v && broot[c] == v) out.push_back(c);
    return out;
  }
  std::vector<int> total_tangents(int v) const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(troot.size()); ++c)
      if (talive[c] && c != v && troot[c] == v) out.push_back(c);
    return out;
  }
  std::vector<int> lifts_of(int base_cell) const {
    std::vector<int> out;
    for (int t = 0; t < static_cast<int>(troot.size()); ++t)
      if (talive[t] && proj[t] == base_cell) out.push_back(t);
    return out;
  }
  Rational take_length(int a, int b) {
    auto it = blengths.find({std::min(a, b), std::max(a, b)});
    Rational len = it == blengths.end() ? Rational(0) : it->second;
    if (it != blengths.end()) blengths.erase(it);
    return len;
  }
};

}  // namespace

Cover stabilize_cover(const Cover& c) {
  if (!c.base.connected()) throw DomainError("stabilize_cover: base is disconnected");
  if (!c.base.has_genus() || euler_and_genus(c.base).chi_total >= 0)
    throw DomainError("stabilize_cover: base Euler characteristic is nonnegative");
  RamificationReport ram = verify_unramified(c);
  if (!ram.unramified) throw DomainError("stabilize_cover: cover is not unramified");

  MutableCover m(c);
  const int nb = c.base.cell_count();

  // Phase 1: drop extremal genus-0 base vertices with their unique edge,
  // together with every lift.
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < nb && !progress; ++v) {
      if (!m.balive[v] || m.broot[v] != v || m.bgenus[v] != 0) continue;
      auto tan = m.base_tangents(v);
      if (tan.size() != 1 || m.binv[tan[0]] == tan[0]) continue;
      int h = tan[0], o = m.binv[h];
      m.take_length(h, o);
      m.balive[v] = m.balive[h] = m.balive[o] = false;
      for (int cell : {v, h, o})
        for (int t : m.lifts_of(cell)) m.talive[t] = false;
      progress = true;
    }
  }

  // Phase 2: smooth simple base vertices and their simple lifts.
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < nb && !progress; ++v) {
      if (!m.balive[v] || m.broot[v] != v || m.bgenus[v] != 0) continue;
      auto tan = m.base_tangents(v);
      if (tan.size() != 2) continue;
      int t1 = tan[0], t2 = tan[1];
      bool leg1 = m.binv[t1] == t1, leg2 = m.binv[t2] == t2;
      if (leg1 && leg2) throw DomainError("stabilize_cover: vertex with two legs has no model");
      if (!leg1 && !leg2) {
        if (m.binv[t1] == t2) continue;  // loop vertex stays
        int o1 = m.binv[t1], o2 = m.binv[t2];
        Rational len = m.take_length(t1, o1) + m.take_length(t2, o2);
        for (int vt : m.lifts_of(v)) {
          auto tt = m.total_tangents(vt);
          if (tt.size() != 2) throw CertificationError("simple vertex lift is not simple");
          int u1 = m.proj[tt[0]] == t1 ? tt[0] : tt[1];
          int u2 = m.proj[tt[0]] == t1 ? tt[1] : tt[0];
          if (m.proj[u1] != t1 || m.proj[u2] != t2)
            throw CertificationError("simple vertex lift has mismatched tangents");
          int p1 = m.tinv[u1], p2 = m.tinv[u2];
          if (m.deg[p1] != m.deg[p2])
            throw CertificationError("harmonicity broke while smoothing");
          m.talive[vt] = m.talive[u1] = m.talive[u2] = false;
          m.tinv[p1] = p2;
          m.tinv[p2] = p1;
        }
        m.balive[v] = m.balive[t1] = m.balive[t2] = false;
        m.binv[o1] = o2;
        m.binv[o2] = o1;
        if (m.has_lengths) m.blengths[{std::min(o1, o2), std::max(o1, o2)}] = len;
      } else {
        int te = leg1 ? t2 : t1;  // the edge half at v
        int tl = leg1 ? t1 : t2;  // the leg at v
        int o = m.binv[te];
        m.take_length(te, o);
        for (int vt : m.lifts_of(v)) {
          auto tt = m.total_tangents(vt);
          if (tt.size() != 2) throw CertificationError("simple vertex lift is not simple");
          int ue = m.proj[tt[0]] == te ? tt[0] : tt[1];
          int ul = m.proj[tt[0]] == te ? tt[1] : tt[0];
          if (m.proj[ue] != te || m.proj[ul] != tl)
            throw CertificationError("simple vertex lift has mismatched tangents");
          int p = m.tinv[ue];
          m.talive[vt] = m.talive[ue] = m.talive[ul] = false;
          m.tinv[p] = p;  // becomes a leg
        }
        m.balive[v] = m.balive[t1] = m.balive[t2] = false;
        m.binv[o] = o;
      }
      progress = true;
    }
  }

  // Compact both graphs and transport the structure.
  std::vector<int> bmap(nb, -1), tmap(c.total.cell_count(), -1);
  int bn = 0, tn = 0;
  for (int x = 0; x < nb; ++x)
    if (m.balive[x]) bmap[x] = bn++;
  for (int t = 0; t < c.total.cell_count(); ++t)
    if (m.talive[t]) tmap[t] = tn++;

  std::vector<int> broot(bn), binv(bn);
  std::map<int, int64_t> bgenus;
  std::map<std::pair<int, int>, Rational> blengths;
  for (int x = 0; x < nb; ++x) {
    if (!m.balive[x]) continue;
    broot[bmap[x]] = bmap[m.broot[x]];
    binv[bmap[x]] = bmap[m.binv[x]];
    if (m.broot[x] == x) bgenus[bmap[x]] = m.bgenus[x];
  }
  if (m.has_lengths)
    for (const auto& [key, len] : m.blengths) {
      int a = bmap[key.first], b = bmap[key.second];
      blengths[{std::min(a, b), std::max(a, b)}] = len;
    }
  Graph base = validate_graph(broot, binv, bgenus,
                              m.has_lengths ? std::optional(blengths) : std::nullopt);

  std::vector<int> troot(tn), tinv(tn), projection(tn);
  std::vector<int64_t> degrees(tn);
  std::map<int, int64_t> tgenus;
  std::vector<std::vector<int>> action(c.datum.group.rank(), std::vector<int>(tn));
  for (int t = 0; t < c.total.cell_count(); ++t) {
    if (!m.talive[t]) continue;
    int nt_cell = tmap[t];
    troot[nt_cell] = tmap[m.troot[t]];
    tinv[nt_cell] = tmap[m.tinv[t]];
    projection[nt_cell] = bmap[m.proj[t]];
    degrees[nt_cell] = m.deg[t];
    if (m.troot[t] == t) tgenus[nt_cell] = m.tgenus[t];
    for (int j = 0; j < c.datum.group.rank(); ++j) action[j][nt_cell] = tmap[m.action[j][t]];
  }
  std::optional<std::map<std::pair<int, int>, Rational>> tlengths;
  if (m.has_lengths) {
    tlengths.emplace();
    Graph probe = validate_graph(troot, tinv);
    for (const Edge& ed : probe.edges()) {
      int be = base.edge_of_halfedge(projection[ed.hmin]);
      (*tlengths)[{ed.hmin, ed.hmax}] = base.length(be) / Rational(degrees[ed.hmin]);
    }
  }
  Graph total = validate_graph(troot, tinv, tgenus, tlengths);
  return certify_cover(std::move(base), std::move(total), std::move(projection),
                       std::move(action), std::move(degrees), c.datum.group, std::nullopt);
}

}  // namespace dilacov
