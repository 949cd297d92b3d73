#include "dilacov/dilation.hpp"

#include <algorithm>
#include <sstream>

#include "dilacov/errors.hpp"

namespace dilacov {

Subgroup DilationDatum::edge_vertex_group(const Graph& g, int edge_index) const {
  const Edge& e = g.edges()[edge_index];
  return subgroup_sum(assign[e.source], assign[e.target]);
}

bool DilationDatum::operator==(const DilationDatum& rhs) const {
  return group == rhs.group && assign == rhs.assign;
}

DilationDatum validate_dilation(const Graph& g, const Group& group,
                                const std::vector<Subgroup>& assign) {
  if (static_cast<int>(assign.size()) != g.cell_count())
    throw DomainError("dilation: assignment size does not match the cell count");
  std::vector<std::string> violations;
  for (int c = 0; c < g.cell_count(); ++c) {
    if (assign[c].parent() != group) {
      violations.push_back("foreign subgroup at cell " + std::to_string(c));
      continue;
    }
    if (!g.is_vertex(c)) {
      if (!assign[g.root(c)].contains_subgroup(assign[c]))
        violations.push_back("D(h) not contained in D(r(h)) at cell " + std::to_string(c));
      if (assign[g.involution(c)] != assign[c])
        violations.push_back("edge halves carry different groups at cell " + std::to_string(c));
    }
  }
  if (!violations.empty()) {
    std::string msg = "invalid dilation datum:";
    for (const auto& v : violations) msg += " [" + v + "]";
    throw DomainError(msg);
  }
  DilationDatum d;
  d.group = group;
  d.assign = assign;
  return d;
}

DilationDatum trivial_dilation(const Graph& g, const Group& group) {
  DilationDatum d;
  d.group = group;
  d.assign.assign(g.cell_count(), Subgroup::trivial(group));
  return d;
}

Stratification datum_to_stratification(const Graph& g, const DilationDatum& d,
                                       const std::vector<Subgroup>& all_subgroups) {
  Stratification s;
  for (const Subgroup& h : all_subgroups) {
    CellSet cells(g.cell_count());
    for (int c = 0; c < g.cell_count(); ++c)
      if (d.assign[c].contains_subgroup(h)) cells.set(c);
    s[h] = cells;
  }
  return s;
}

DilationDatum datum_from_stratification(const Graph& g, const Group& group,
                                        const Stratification& s) {
  // Axioms: the 0-stratum is everything, monotone, intersections match joins.
  for (const auto& [h, cells] : s) {
    if (cells.size() != g.cell_count())
      throw DomainError("stratification: stratum has wrong cell count");
    if (!is_subgraph(g, cells))
      throw DomainError("stratification: stratum not closed under root/involution");
    if (h.is_trivial() && cells.count() != g.cell_count())
      throw DomainError("stratification: trivial stratum must be the whole graph");
  }
  for (const auto& [h, hcells] : s)
    for (const auto& [k, kcells] : s) {
      if (h.contains_subgroup(k) && !hcells.subset_of(kcells))
        throw DomainError("stratification: monotonicity violated");
      auto it = s.find(subgroup_sum(h, k));
      if (it != s.end() && !(hcells.intersect(kcells) == it->second))
        throw DomainError("stratification: intersection axiom violated");
    }

  DilationDatum d;
  d.group = group;
  d.assign.assign(g.cell_count(), Subgroup::trivial(group));
  for (int c = 0; c < g.cell_count(); ++c) {
    Subgroup acc = Subgroup::trivial(group);
    for (const auto& [h, cells] : s)
      if (cells.test(c)) acc = subgroup_sum(acc, h);
    d.assign[c] = acc;
  }
  return validate_dilation(g, group, d.assign);
}

std::map<Subgroup, CellSet> dual_stratification(const Graph& g, const DilationDatum& d,
                                                const std::vector<Subgroup>& all_subgroups) {
  std::map<Subgroup, CellSet> out;
  for (const Subgroup& h : all_subgroups) {
    CellSet cells(g.cell_count());
    for (int v : g.vertices())
      if (h.contains_subgroup(d.assign[v])) cells.set(v);
    for (int l : g.legs())
      if (cells.test(g.root(l))) cells.set(l);
    for (size_t e = 0; e < g.edges().size(); ++e) {
      const Edge& ed = g.edges()[e];
      if (cells.test(ed.source) && cells.test(ed.target) &&
          h.contains_subgroup(d.edge_vertex_group(g, static_cast<int>(e)))) {
        cells.set(ed.hmin);
        cells.set(ed.hmax);
      }
    }
    out[h] = cells;
  }
  return out;
}

CellSet dilated_subgraph(const Graph& g, const DilationDatum& d) {
  CellSet cells(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c)
    if (!d.assign[c].is_trivial()) cells.set(c);
  return cells;
}

IndexFunction::IndexFunction(const Graph& g, const DilationDatum& d) : graph_(&g) {
  rows_.resize(g.vertices().size());
  for (size_t i = 0; i < g.vertices().size(); ++i)
    for (int h : g.tangents(g.vertices()[i])) rows_[i][d.assign[h]] += 1;
}

int64_t IndexFunction::at(int vertex, const Subgroup& h) const {
  const auto& row = rows_[graph_->vertex_position(vertex)];
  auto it = row.find(h);
  return it == row.end() ? 0 : it->second;
}

const std::map<Subgroup, int64_t>& IndexFunction::row(int vertex) const {
  return rows_[graph_->vertex_position(vertex)];
}

Rational admissible_genus(const Graph& g, const DilationDatum& d, int vertex) {
  if (!g.has_genus()) throw DomainError("admissible_genus: genus map missing");
  const Subgroup& dv = d.assign[vertex];
  const int64_t dn = static_cast<int64_t>(dv.order());
  Rational sum = 0;
  for (int h : g.tangents(vertex)) {
    // [D(v) : D(h)] via the element counts; D(h) <= D(v) by validity.
    int64_t idx = dn / static_cast<int64_t>(d.assign[h].order());
    sum += Rational(dn - idx);
  }
  return Rational(dn) * (g.genus(vertex) - 1) + 1 + sum / 2;
}

bool is_admissible(const Graph& g, const DilationDatum& d) {
  for (int v : g.vertices()) {
    Rational gp = admissible_genus(g, d, v);
    if (denominator(gp) != 1 || gp < 0) return false;
  }
  return true;
}

namespace {

// Odometer over per-slot candidate lists, visiting assignments in
// lexicographic order of candidate indices.
class Odometer {
 public:
  explicit Odometer(std::vector<size_t> sizes) : sizes_(std::move(sizes)), pos_(sizes_.size(), 0) {
    done_ = std::any_of(sizes_.begin(), sizes_.end(), [](size_t s) { return s == 0; });
  }
  bool done() const { return done_; }
  const std::vector<size_t>& positions() const { return pos_; }
  void advance() {
    int i = static_cast<int>(pos_.size()) - 1;
    while (i >= 0 && ++pos_[i] == sizes_[i]) pos_[i--] = 0;
    if (i < 0) done_ = true;
  }

 private:
  std::vector<size_t> sizes_;
  std::vector<size_t> pos_;
  bool done_ = false;
};

}  // namespace

std::vector<DilationDatum> enumerate_admissible_dilations(const Graph& g, const Group& group,
                                                          const DilationEnumerationOptions& opts) {
  const auto subgroups = enumerate_subgroups(group, opts.max_group_order);
  const auto& verts = g.vertices();
  std::vector<DilationDatum> out;
  uint64_t examined = 0;
  auto charge = [&](uint64_t k = 1) {
    examined += k;
    if (examined > opts.max_candidates) {
      std::ostringstream os;
      os << "dilation enumeration bound exceeded after " << examined << " candidates";
      throw ResourceError(os.str());
    }
  };

  Odometer vodo(std::vector<size_t>(verts.size(), subgroups.size()));
  for (; !vodo.done(); vodo.advance()) {
    charge();
    DilationDatum d;
    d.group = group;
    d.assign.assign(g.cell_count(), Subgroup::trivial(group));
    for (size_t i = 0; i < verts.size(); ++i) d.assign[verts[i]] = subgroups[vodo.positions()[i]];

    if (!opts.include_edge_groups) {
      for (const Edge& e : g.edges()) {
        Subgroup rep = subgroup_intersection(d.assign[e.source], d.assign[e.target]);
        d.assign[e.hmin] = rep;
        d.assign[e.hmax] = rep;
      }
      for (int l : g.legs()) d.assign[l] = d.assign[g.root(l)];
      if (!opts.admissible_only || is_admissible(g, d)) out.push_back(d);
      continue;
    }

    // Candidate lists per edge and per leg, in subgroup order.
    std::vector<std::vector<Subgroup>> edge_choices, leg_choices;
    for (const Edge& e : g.edges()) {
      Subgroup cap = subgroup_intersection(d.assign[e.source], d.assign[e.target]);
      std::vector<Subgroup> cands;
      for (const Subgroup& h : subgroups)
        if (cap.contains_subgroup(h) && (!opts.cyclic_edges_only || h.is_cyclic()))
          cands.push_back(h);
      edge_choices.push_back(std::move(cands));
    }
    for (int l : g.legs()) {
      std::vector<Subgroup> cands;
      for (const Subgroup& h : subgroups)
        if (d.assign[g.root(l)].contains_subgroup(h) && (!opts.cyclic_edges_only || h.is_cyclic()))
          cands.push_back(h);
      leg_choices.push_back(std::move(cands));
    }

    std::vector<size_t> sizes;
    for (const auto& c : edge_choices) sizes.push_back(c.size());
    for (const auto& c : leg_choices) sizes.push_back(c.size());
    for (Odometer eodo(sizes); !eodo.done(); eodo.advance()) {
      charge();
      DilationDatum full = d;
      const auto& pos = eodo.positions();
      for (size_t e = 0; e < edge_choices.size(); ++e) {
        const Edge& ed = g.edges()[e];
        full.assign[ed.hmin] = edge_choices[e][pos[e]];
        full.assign[ed.hmax] = edge_choices[e][pos[e]];
      }
      for (size_t l = 0; l < leg_choices.size(); ++l)
        full.assign[g.legs()[l]] = leg_choices[l][pos[edge_choices.size() + l]];
      if (!opts.admissible_only || is_admissible(g, full)) out.push_back(full);
    }
  }
  return out;
}

}  // namespace dilacov
