#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dilacov/matrix.hpp"

namespace dilacov {

// One edge of a half-edge graph in its canonical orientation: the half-edge
// with the smaller index is the source side.
struct Edge {
  int hmin = 0, hmax = 0;  // the two half-edge cells
  int source = 0, target = 0;
};

// Graph with legs: a finite cell set with an idempotent root map and an
// involution whose fixed set contains every vertex. Legs are the half-edges
// fixed by the involution; edges are the 2-orbits. Optional vertex genus and
// exact rational edge lengths ride along.
class Graph {
 public:
  Graph() = default;

  int cell_count() const { return static_cast<int>(root_.size()); }
  int root(int cell) const { return root_[cell]; }
  int involution(int cell) const { return inv_[cell]; }
  bool is_vertex(int cell) const { return root_[cell] == cell; }
  bool is_leg(int cell) const { return !is_vertex(cell) && inv_[cell] == cell; }

  const std::vector<int>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& legs() const { return legs_; }
  // Tangent half-edges of a vertex, ascending.
  const std::vector<int>& tangents(int vertex) const;
  int valence(int vertex) const { return static_cast<int>(tangents(vertex).size()); }
  // Index of the edge owning a half-edge, -1 for vertices and legs.
  int edge_of_halfedge(int cell) const { return edge_of_half_[cell]; }
  int vertex_position(int vertex) const { return vertex_pos_[vertex]; }

  bool has_genus() const { return has_genus_; }
  int64_t genus(int vertex) const { return genus_[vertex]; }
  bool has_lengths() const { return has_lengths_; }
  const Rational& length(int edge_index) const { return lengths_[edge_index]; }

  int component_count() const { return component_count_; }
  int component_of(int cell) const { return component_[cell]; }
  bool connected() const { return component_count_ <= 1; }

  friend Graph validate_graph(const std::vector<int>& root, const std::vector<int>& involution,
                              const std::optional<std::map<int, int64_t>>& genus,
                              const std::optional<std::map<std::pair<int, int>, Rational>>& lengths);

 private:
  std::vector<int> root_, inv_;
  bool has_genus_ = false;
  std::vector<int64_t> genus_;
  bool has_lengths_ = false;
  std::vector<Rational> lengths_;  // per edge index

  std::vector<int> vertices_, legs_;
  std::vector<Edge> edges_;
  std::vector<int> edge_of_half_;
  std::vector<int> vertex_pos_;
  std::vector<std::vector<int>> tangents_;
  std::vector<int> component_;
  int component_count_ = 0;

  void build_derived();
};

// Validates the axioms and returns the graph; throws DomainError naming the
// offending cell otherwise. Genus keys must be vertices; length keys are
// (hmin, hmax) pairs of an edge and values must be positive.
Graph validate_graph(const std::vector<int>& root, const std::vector<int>& involution,
                     const std::optional<std::map<int, int64_t>>& genus = std::nullopt,
                     const std::optional<std::map<std::pair<int, int>, Rational>>& lengths = std::nullopt);

struct EulerData {
  std::vector<int64_t> chi_vertex;        // parallel to vertices()
  int64_t chi_total = 0;
  std::vector<int64_t> genus_component;   // per connected component
};

// chi(v) = 2 - 2 g(v) - val(v); g per component = E - V + 1 + sum g(v).
// For a connected graph the identity chi = 2 - 2g - #legs is certified.
EulerData euler_and_genus(const Graph& g);

int64_t first_betti(const Graph& g);  // summed over components

// Subgraphs are cell subsets closed under root and involution.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(int n) : bits_(n, false) {}
  int size() const { return static_cast<int>(bits_.size()); }
  bool test(int i) const { return bits_[i]; }
  void set(int i, bool v = true) { bits_[i] = v; }
  int count() const;
  bool operator==(const CellSet&) const = default;
  CellSet intersect(const CellSet& rhs) const;
  bool subset_of(const CellSet& rhs) const;
  bool empty() const { return count() == 0; }
  std::vector<int> cells() const;

 private:
  std::vector<bool> bits_;
};

bool is_subgraph(const Graph& g, const CellSet& cells);

// Valence of a vertex inside a subgraph.
int subgraph_valence(const Graph& g, const CellSet& cells, int vertex);

// Weighted edge contraction: every connected component of the minimal
// subgraph spanning S collapses to a vertex carrying that component's genus.
// Surviving cells are renumbered by ascending old index; the new vertex takes
// the slot of the smallest old cell in its component.
struct ContractionResult {
  Graph graph;
  std::vector<int> cell_map;  // old cell -> new cell (component cells -> new vertex)
};
ContractionResult weighted_edge_contraction(const Graph& g, const std::vector<int>& edge_indices);

// Stabilization: prune extremal genus-0 tails, then smooth genus-0 valence-2
// vertices, merging lengths additively. Requires a connected graph with
// negative Euler characteristic.
struct StabilizationResult {
  Graph graph;
  std::vector<int> cell_map;  // old cell -> new cell, -1 for removed cells
};
StabilizationResult stabilize(const Graph& g);

struct SpanningForest {
  std::vector<int> tree_edges;    // ascending edge indices
  std::vector<int> cotree_edges;  // ascending edge indices
  std::vector<int> bfs_parent_halfedge;  // per vertex: tangent half-edge toward parent, -1 at roots
};

// BFS from the least vertex of each component, scanning tangents ascending.
SpanningForest spanning_forest(const Graph& g);

}  // namespace dilacov
