#include "random_instances.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace dilacov::testsupport {

namespace {

// Assemble a graph from an edge list (pairs of vertices), loop entries
// allowed, plus legs per vertex.
Graph from_edge_list(int nv, const std::vector<std::pair<int, int>>& edge_list,
                     const std::vector<int>& legs_at, const std::vector<int64_t>& genus) {
  std::vector<int> root, inv;
  for (int v = 0; v < nv; ++v) {
    root.push_back(v);
    inv.push_back(v);
  }
  auto add_cell = [&](int r) {
    root.push_back(r);
    inv.push_back(static_cast<int>(root.size()) - 1);
    return static_cast<int>(root.size()) - 1;
  };
  for (auto [a, b] : edge_list) {
    int h1 = add_cell(a), h2 = add_cell(b);
    inv[h1] = h2;
    inv[h2] = h1;
  }
  for (int v = 0; v < nv; ++v)
    for (int i = 0; i < legs_at[v]; ++i) add_cell(v);
  std::map<int, int64_t> gmap;
  for (int v = 0; v < nv; ++v) gmap[v] = genus.empty() ? 0 : genus[v];
  return validate_graph(root, inv, gmap);
}

}  // namespace

Graph theta_graph(int n) {
  std::vector<std::pair<int, int>> edges(n, {0, 1});
  return from_edge_list(2, edges, {0, 0}, {0, 0});
}

Graph dumbbell_with_leg() {
  return from_edge_list(3, {{0, 0}, {0, 1}, {1, 2}, {2, 2}}, {0, 1, 0}, {0, 0, 0});
}

Graph rose(int64_t genus, int loops, int legs) {
  std::vector<std::pair<int, int>> edges(loops, {0, 0});
  return from_edge_list(1, edges, {legs}, {genus});
}

Graph random_tree(std::mt19937_64& rng, int max_edges) {
  int ne = static_cast<int>(rng() % (max_edges + 1));
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v <= ne; ++v) edges.push_back({static_cast<int>(rng() % v), v});
  std::vector<int> legs(ne + 1, 0);
  std::vector<int64_t> genus(ne + 1, 0);
  for (int v = 0; v <= ne; ++v) genus[v] = rng() % 3;
  return from_edge_list(ne + 1, edges, legs, genus);
}

Graph random_connected_graph(std::mt19937_64& rng, int max_edges, int64_t max_genus,
                             int max_legs) {
  int ne = 1 + static_cast<int>(rng() % max_edges);
  int nv = 1 + static_cast<int>(rng() % ne);
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < nv; ++v) edges.push_back({static_cast<int>(rng() % v), v});
  while (static_cast<int>(edges.size()) < ne)
    edges.push_back({static_cast<int>(rng() % nv), static_cast<int>(rng() % nv)});
  std::vector<int> legs(nv, 0);
  for (int i = 0, total = static_cast<int>(rng() % (max_legs + 1)); i < total; ++i)
    legs[rng() % nv] += 1;
  std::vector<int64_t> genus(nv, 0);
  for (int v = 0; v < nv; ++v) genus[v] = rng() % (max_genus + 1);
  return from_edge_list(nv, edges, legs, genus);
}

Group random_group(std::mt19937_64& rng, uint64_t max_order) {
  static const std::vector<std::vector<int64_t>> pool = {
      {2},    {3},    {4},    {5},    {6},    {7},     {8},       {9},
      {10},   {11},   {12},   {13},   {14},   {15},    {16},      {2, 2},
      {2, 4}, {2, 6}, {3, 3}, {2, 8}, {4, 4}, {2, 2, 2}, {2, 2, 4}, {2, 10}};
  for (;;) {
    const auto& f = pool[rng() % pool.size()];
    Group g = make_group(f);
    if (g.order() <= max_order) return g;
  }
}

DilationDatum random_dilation(std::mt19937_64& rng, const Graph& g, const Group& group) {
  auto subs = enumerate_subgroups(group);
  DilationDatum d = trivial_dilation(g, group);
  for (int v : g.vertices()) d.assign[v] = subs[rng() % subs.size()];
  for (const Edge& e : g.edges()) {
    Subgroup cap = subgroup_intersection(d.assign[e.source], d.assign[e.target]);
    std::vector<Subgroup> ok;
    for (const auto& h : subs)
      if (cap.contains_subgroup(h)) ok.push_back(h);
    const Subgroup& pick = ok[rng() % ok.size()];
    d.assign[e.hmin] = pick;
    d.assign[e.hmax] = pick;
  }
  for (int l : g.legs()) {
    std::vector<Subgroup> ok;
    for (const auto& h : subs)
      if (d.assign[g.root(l)].contains_subgroup(h)) ok.push_back(h);
    d.assign[l] = ok[rng() % ok.size()];
  }
  return validate_dilation(g, group, d.assign);
}

CellSet random_subgraph(std::mt19937_64& rng, const Graph& g) {
  CellSet cells(g.cell_count());
  for (int v : g.vertices())
    if (rng() % 2) cells.set(v);
  for (const Edge& e : g.edges())
    if (cells.test(e.source) && cells.test(e.target) && rng() % 2) {
      cells.set(e.hmin);
      cells.set(e.hmax);
    }
  for (int l : g.legs())
    if (cells.test(g.root(l)) && rng() % 2) cells.set(l);
  return cells;
}

std::vector<Graph> all_small_connected_graphs(int max_vertices, int max_edges) {
  std::vector<Graph> out;
  std::set<std::vector<std::pair<int, int>>> seen;  // canonical forms
  for (int nv = 1; nv <= max_vertices; ++nv) {
    // Edge slots: unordered vertex pairs including loops.
    std::vector<std::pair<int, int>> slots;
    for (int a = 0; a < nv; ++a)
      for (int b = a; b < nv; ++b) slots.push_back({a, b});
    // Multisets of size 0..max_edges over the slots, via counts.
    std::vector<int> counts(slots.size(), 0);
    std::vector<int> perm(nv);
    std::function<void(size_t, int)> rec = [&](size_t slot, int remaining) {
      if (slot == slots.size()) {
        std::vector<std::pair<int, int>> edges;
        for (size_t s = 0; s < slots.size(); ++s)
          for (int c = 0; c < counts[s]; ++c) edges.push_back(slots[s]);
        if (static_cast<int>(edges.size()) + 1 < nv) return;
        // Canonical form under vertex relabeling.
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<std::pair<int, int>> best;
        do {
          std::vector<std::pair<int, int>> relabeled;
          for (auto [a, b] : edges) {
            int x = perm[a], y = perm[b];
            relabeled.push_back({std::min(x, y), std::max(x, y)});
          }
          std::sort(relabeled.begin(), relabeled.end());
          if (best.empty() || relabeled < best) best = relabeled;
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (!seen.insert(best).second) return;
        Graph g = from_edge_list(nv, edges, std::vector<int>(nv, 0),
                                 std::vector<int64_t>(nv, 0));
        if (g.connected()) out.push_back(g);
        return;
      }
      for (int c = 0; c <= remaining; ++c) {
        counts[slot] = c;
        rec(slot + 1, remaining - c);
      }
      counts[slot] = 0;
    };
    rec(0, max_edges);
  }
  return out;
}

}  // namespace dilacov::testsupport
