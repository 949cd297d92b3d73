#include "dilacov/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

std::string cell_str(int c) { return "cell " + std::to_string(c); }

}  // namespace

void Graph::build_derived() {
  const int n = cell_count();
  vertices_.clear();
  legs_.clear();
  edges_.clear();
  edge_of_half_.assign(n, -1);
  vertex_pos_.assign(n, -1);
  for (int c = 0; c < n; ++c) {
    if (is_vertex(c)) {
      vertex_pos_[c] = static_cast<int>(vertices_.size());
      vertices_.push_back(c);
    } else if (inv_[c] == c) {
      legs_.push_back(c);
    } else if (c < inv_[c]) {
      Edge e;
      e.hmin = c;
      e.hmax = inv_[c];
      e.source = root_[e.hmin];
      e.target = root_[e.hmax];
      edges_.push_back(e);
    }
  }
  for (size_t i = 0; i < edges_.size(); ++i) {
    edge_of_half_[edges_[i].hmin] = static_cast<int>(i);
    edge_of_half_[edges_[i].hmax] = static_cast<int>(i);
  }
  tangents_.assign(vertices_.size(), {});
  for (int c = 0; c < n; ++c)
    if (!is_vertex(c)) tangents_[vertex_pos_[root_[c]]].push_back(c);

  component_.assign(n, -1);
  component_count_ = 0;
  for (int start = 0; start < n; ++start) {
    if (component_[start] >= 0) continue;
    int id = component_count_++;
    std::deque<int> q{start};
    component_[start] = id;
    while (!q.empty()) {
      int c = q.front();
      q.pop_front();
      for (int nb : {root_[c], inv_[c]}) {
        if (component_[nb] < 0) {
          component_[nb] = id;
          q.push_back(nb);
        }
      }
      if (is_vertex(c))
        for (int t : tangents_[vertex_pos_[c]])
          if (component_[t] < 0) {
            component_[t] = id;
            q.push_back(t);
          }
    }
  }
}

const std::vector<int>& Graph::tangents(int vertex) const {
  return tangents_[vertex_pos_[vertex]];
}

Graph validate_graph(const std::vector<int>& root, const std::vector<int>& involution,
                     const std::optional<std::map<int, int64_t>>& genus,
                     const std::optional<std::map<std::pair<int, int>, Rational>>& lengths) {
  const int n = static_cast<int>(root.size());
  std::vector<std::string> violations;
  if (involution.size() != root.size())
    throw DomainError("graph: root and involution have different sizes");
  for (int c = 0; c < n; ++c) {
    if (root[c] < 0 || root[c] >= n || involution[c] < 0 || involution[c] >= n) {
      violations.push_back("map out of range at " + cell_str(c));
      continue;
    }
    if (root[root[c]] != root[c]) violations.push_back("root not idempotent at " + cell_str(c));
    if (involution[involution[c]] != c)
      violations.push_back("involution not involutive at " + cell_str(c));
    if (root[c] == c && involution[c] != c)
      violations.push_back("involution moves vertex at " + cell_str(c));
  }
  if (!violations.empty()) {
    std::string msg = "invalid graph:";
    for (const auto& v : violations) msg += " [" + v + "]";
    throw DomainError(msg);
  }

  Graph g;
  g.root_ = root;
  g.inv_ = involution;
  g.build_derived();

  if (genus) {
    g.has_genus_ = true;
    g.genus_.assign(n, 0);
    for (const auto& [cell, gv] : *genus) {
      if (cell < 0 || cell >= n || !g.is_vertex(cell))
        throw DomainError("genus assigned to non-vertex at " + cell_str(cell));
      if (gv < 0) throw DomainError("negative genus at " + cell_str(cell));
      g.genus_[cell] = gv;
    }
  }
  if (lengths) {
    g.has_lengths_ = true;
    g.lengths_.assign(g.edges_.size(), Rational(1));
    std::vector<bool> seen(g.edges_.size(), false);
    for (const auto& [key, len] : *lengths) {
      auto [a, b] = key;
      if (a < 0 || a >= n || g.edge_of_half_[a] < 0 || g.inv_[a] != b)
        throw DomainError("length key is not an edge: " + std::to_string(a) + "-" + std::to_string(b));
      if (len <= 0)
        throw DomainError("nonpositive length on edge " + std::to_string(a) + "-" + std::to_string(b));
      int e = g.edge_of_half_[a];
      g.lengths_[e] = len;
      seen[e] = true;
    }
    for (size_t e = 0; e < seen.size(); ++e)
      if (!seen[e])
        throw DomainError("missing length on edge " + std::to_string(g.edges_[e].hmin) + "-" +
                          std::to_string(g.edges_[e].hmax));
  }
  return g;
}

EulerData euler_and_genus(const Graph& g) {
  if (!g.has_genus()) throw DomainError("euler_and_genus: genus map missing");
  EulerData out;
  out.chi_vertex.reserve(g.vertices().size());
  for (int v : g.vertices()) {
    int64_t chi = 2 - 2 * g.genus(v) - g.valence(v);
    out.chi_vertex.push_back(chi);
    out.chi_total += chi;
  }
  out.genus_component.assign(g.component_count(), 0);
  std::vector<int64_t> e_count(g.component_count(), 0), v_count(g.component_count(), 0),
      l_count(g.component_count(), 0), chi_comp(g.component_count(), 0);
  for (const Edge& e : g.edges()) e_count[g.component_of(e.hmin)] += 1;
  for (int l : g.legs()) l_count[g.component_of(l)] += 1;
  for (size_t i = 0; i < g.vertices().size(); ++i) {
    int v = g.vertices()[i];
    v_count[g.component_of(v)] += 1;
    out.genus_component[g.component_of(v)] += g.genus(v);
    chi_comp[g.component_of(v)] += out.chi_vertex[i];
  }
  for (int c = 0; c < g.component_count(); ++c) {
    out.genus_component[c] += e_count[c] - v_count[c] + 1;
    if (chi_comp[c] != 2 - 2 * out.genus_component[c] - l_count[c])
      throw CertificationError("euler_and_genus: chi identity failed on a component");
  }
  return out;
}

int64_t first_betti(const Graph& g) {
  return static_cast<int64_t>(g.edges().size()) - static_cast<int64_t>(g.vertices().size()) +
         g.component_count();
}

int CellSet::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), true));
}

CellSet CellSet::intersect(const CellSet& rhs) const {
  CellSet out(size());
  for (int i = 0; i < size(); ++i) out.set(i, bits_[i] && rhs.bits_[i]);
  return out;
}

bool CellSet::subset_of(const CellSet& rhs) const {
  for (int i = 0; i < size(); ++i)
    if (bits_[i] && !rhs.bits_[i]) return false;
  return true;
}

std::vector<int> CellSet::cells() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

bool is_subgraph(const Graph& g, const CellSet& cells) {
  for (int c = 0; c < g.cell_count(); ++c)
    if (cells.test(c) && (!cells.test(g.root(c)) || !cells.test(g.involution(c)))) return false;
  return true;
}

int subgraph_valence(const Graph& g, const CellSet& cells, int vertex) {
  int val = 0;
  for (int t : g.tangents(vertex))
    if (cells.test(t)) ++val;
  return val;
}

ContractionResult weighted_edge_contraction(const Graph& g, const std::vector<int>& edge_indices) {
  if (!g.has_genus()) throw DomainError("weighted_edge_contraction: genus map missing");
  const int n = g.cell_count();
  for (int e : edge_indices)
    if (e < 0 || e >= static_cast<int>(g.edges().size()))
      throw DomainError("weighted_edge_contraction: not an edge index: " + std::to_string(e));

  // Minimal subgraph spanning S: the chosen edges and their root vertices.
  CellSet delta(n);
  for (int e : edge_indices) {
    const Edge& ed = g.edges()[e];
    for (int c : {ed.hmin, ed.hmax, ed.source, ed.target}) delta.set(c);
  }

  // Union-find over delta cells.
  std::vector<int> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  auto unite = [&](int a, int b) { uf[find(a)] = find(b); };
  for (int c = 0; c < n; ++c)
    if (delta.test(c)) {
      unite(c, g.root(c));
      unite(c, g.involution(c));
    }

  // Component representative = smallest member cell; it becomes the new vertex.
  std::vector<int> rep(n, -1);
  for (int c = 0; c < n; ++c)
    if (delta.test(c)) {
      int r = find(c);
      if (rep[r] < 0 || c < rep[r]) rep[r] = c;
    }

  std::vector<int> cell_map(n, -1);
  int next = 0;
  for (int c = 0; c < n; ++c) {
    if (!delta.test(c)) {
      cell_map[c] = next++;
    } else if (rep[find(c)] == c) {
      cell_map[c] = next++;  // becomes the component's vertex
    }
  }
  for (int c = 0; c < n; ++c)
    if (cell_map[c] < 0) cell_map[c] = cell_map[rep[find(c)]];

  // Genus of each contracted component: E - V + 1 + sum g(v).
  std::map<int, int64_t> comp_genus;  // keyed by representative cell
  {
    std::map<int, int64_t> e_cnt, v_cnt;
    for (int c = 0; c < n; ++c)
      if (delta.test(c) && g.is_vertex(c)) {
        int r = rep[find(c)];
        v_cnt[r] += 1;
        comp_genus[r] += g.genus(c);
      }
    for (const Edge& ed : g.edges())
      if (delta.test(ed.hmin)) e_cnt[rep[find(ed.hmin)]] += 1;
    for (auto& [r, gv] : comp_genus) gv += e_cnt[r] - v_cnt[r] + 1;
  }

  std::vector<int> root(next), inv(next);
  std::map<int, int64_t> genus;
  std::map<std::pair<int, int>, Rational> lengths;
  for (int c = 0; c < n; ++c) {
    int nc = cell_map[c];
    if (delta.test(c)) {
      if (rep[find(c)] != c) continue;
      root[nc] = nc;
      inv[nc] = nc;
      genus[nc] = comp_genus[c];
    } else {
      root[nc] = cell_map[g.root(c)];
      inv[nc] = cell_map[g.involution(c)];
      if (g.is_vertex(c)) genus[nc] = g.genus(c);
    }
  }
  if (g.has_lengths()) {
    for (size_t e = 0; e < g.edges().size(); ++e) {
      const Edge& ed = g.edges()[e];
      if (delta.test(ed.hmin)) continue;
      int a = cell_map[ed.hmin], b = cell_map[ed.hmax];
      lengths[{std::min(a, b), std::max(a, b)}] = g.length(static_cast<int>(e));
    }
  }
  ContractionResult out;
  out.graph = validate_graph(root, inv, genus,
                             g.has_lengths() ? std::optional(lengths) : std::nullopt);
  out.cell_map = cell_map;
  return out;
}

namespace {

// Working copy used by stabilize: alive flags plus mutable maps.
struct Mutable {
  std::vector<int> root, inv;
  std::vector<bool> alive;
  std::vector<int64_t> genus;
  std::map<std::pair<int, int>, Rational> lengths;  // keyed by half-edge pair, min first
  bool has_lengths;

  explicit Mutable(const Graph& g)
      : root(g.cell_count()), inv(g.cell_count()), alive(g.cell_count(), true),
        genus(g.cell_count(), 0), has_lengths(g.has_lengths()) {
    for (int c = 0; c < g.cell_count(); ++c) {
      root[c] = g.root(c);
      inv[c] = g.involution(c);
      if (g.is_vertex(c) && g.has_genus()) genus[c] = g.genus(c);
    }
    if (g.has_lengths())
      for (size_t e = 0; e < g.edges().size(); ++e)
        lengths[{g.edges()[e].hmin, g.edges()[e].hmax}] = g.length(static_cast<int>(e));
  }

  std::vector<int> tangents(int v) const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(root.size()); ++c)
      if (alive[c] && c != v && root[c] == v) out.push_back(c);
    return out;
  }

  Rational take_length(int a, int b) {
    auto it = lengths.find({std::min(a, b), std::max(a, b)});
    Rational len = it == lengths.end() ? Rational(0) : it->second;
    if (it != lengths.end()) lengths.erase(it);
    return len;
  }
};

}  // namespace

StabilizationResult stabilize(const Graph& g) {
  if (!g.has_genus()) throw DomainError("stabilize: genus map missing");
  if (!g.connected()) throw DomainError("stabilize: input graph is disconnected");
  if (euler_and_genus(g).chi_total >= 0) throw DomainError("stabilize: Euler characteristic is nonnegative");

  Mutable m(g);
  const int n = g.cell_count();

  // Phase 1: repeatedly drop extremal genus-0 vertices together with their
  // unique edge (legs are kept).
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < n && !progress; ++v) {
      if (!m.alive[v] || m.root[v] != v || m.genus[v] != 0) continue;
      auto tan = m.tangents(v);
      if (tan.size() != 1) continue;
      int h = tan[0];
      if (m.inv[h] == h) continue;  // a leg, not an extremal edge
      int other = m.inv[h];
      m.take_length(h, other);
      m.alive[v] = m.alive[h] = m.alive[other] = false;
      progress = true;
    }
  }

  // Phase 2: smooth simple vertices (genus 0, valence 2), ascending index.
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < n && !progress; ++v) {
      if (!m.alive[v] || m.root[v] != v || m.genus[v] != 0) continue;
      auto tan = m.tangents(v);
      if (tan.size() != 2) continue;
      int t1 = tan[0], t2 = tan[1];
      bool leg1 = m.inv[t1] == t1, leg2 = m.inv[t2] == t2;
      if (leg1 && leg2) throw DomainError("stabilize: vertex with two legs has no model");
      if (!leg1 && !leg2) {
        if (m.inv[t1] == t2) continue;  // a loop vertex; cannot be smoothed
        int o1 = m.inv[t1], o2 = m.inv[t2];
        Rational len = m.take_length(t1, o1) + m.take_length(t2, o2);
        m.alive[v] = m.alive[t1] = m.alive[t2] = false;
        m.inv[o1] = o2;
        m.inv[o2] = o1;
        if (m.has_lengths) m.lengths[{std::min(o1, o2), std::max(o1, o2)}] = len;
      } else {
        // One edge and one leg: the far half-edge becomes a leg.
        int eh = leg1 ? t2 : t1;
        int o = m.inv[eh];
        m.take_length(eh, o);
        m.alive[v] = m.alive[t1] = m.alive[t2] = false;
        m.alive[o] = true;
        m.inv[o] = o;
      }
      progress = true;
    }
  }

  StabilizationResult out;
  out.cell_map.assign(n, -1);
  int next = 0;
  for (int c = 0; c < n; ++c)
    if (m.alive[c]) out.cell_map[c] = next++;
  std::vector<int> root(next), inv(next);
  std::map<int, int64_t> genus;
  std::map<std::pair<int, int>, Rational> lengths;
  for (int c = 0; c < n; ++c) {
    if (!m.alive[c]) continue;
    int nc = out.cell_map[c];
    root[nc] = out.cell_map[m.root[c]];
    inv[nc] = out.cell_map[m.inv[c]];
    if (m.root[c] == c) genus[nc] = m.genus[c];
  }
  if (m.has_lengths)
    for (const auto& [key, len] : m.lengths) {
      int a = out.cell_map[key.first], b = out.cell_map[key.second];
      lengths[{std::min(a, b), std::max(a, b)}] = len;
    }
  out.graph = validate_graph(root, inv, genus, m.has_lengths ? std::optional(lengths) : std::nullopt);
  return out;
}

SpanningForest spanning_forest(const Graph& g) {
  SpanningForest out;
  const int n = g.cell_count();
  out.bfs_parent_halfedge.assign(n, -1);
  std::vector<bool> visited(n, false), edge_in_tree(g.edges().size(), false);
  for (int start : g.vertices()) {
    if (visited[start]) continue;
    visited[start] = true;
    std::deque<int> q{start};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int h : g.tangents(v)) {
        int partner = g.involution(h);
        if (partner == h) continue;  // leg
        int w = g.root(partner);
        if (visited[w]) continue;
        visited[w] = true;
        edge_in_tree[g.edge_of_halfedge(h)] = true;
        out.bfs_parent_halfedge[w] = partner;
        q.push_back(w);
      }
    }
  }
  for (int e = 0; e < static_cast<int>(g.edges().size()); ++e)
    (edge_in_tree[e] ? out.tree_edges : out.cotree_edges).push_back(e);
  return out;
}

}  // namespace dilacov
