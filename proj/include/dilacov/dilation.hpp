#pragma once

#include <functional>
#include <map>
#include <vector>

#include "dilacov/abelian.hpp"
#include "dilacov/graph.hpp"

namespace dilacov {

// Assignment of a stabilizer subgroup to every cell, with D(h) contained in
// D(r(h)) and equal groups on the two halves of each edge.
struct DilationDatum {
  Group group;
  std::vector<Subgroup> assign;  // per cell

  const Subgroup& at(int cell) const { return assign[cell]; }
  // Vertex dilation group C(e) = D(s(e)) + D(t(e)).
  Subgroup edge_vertex_group(const Graph& g, int edge_index) const;
  bool operator==(const DilationDatum& rhs) const;
};

// Validates containment and edge-half agreement; reports every violation.
DilationDatum validate_dilation(const Graph& g, const Group& group,
                                const std::vector<Subgroup>& assign);

// The trivial datum D = 0.
DilationDatum trivial_dilation(const Graph& g, const Group& group);

// Stratification: per subgroup H, the subgraph of cells with H <= D(x).
using Stratification = std::map<Subgroup, CellSet>;

Stratification datum_to_stratification(const Graph& g, const DilationDatum& d,
                                       const std::vector<Subgroup>& all_subgroups);
// Inverse: recovers D(x) as the largest H with x in the H-stratum. Checks the
// stratification axioms first.
DilationDatum datum_from_stratification(const Graph& g, const Group& group,
                                        const Stratification& s);

// Dual stratification: per H, the edge-maximal subgraph on the vertices with
// D(v) <= H. A leg belongs iff its root does; an edge iff C(e) <= H.
std::map<Subgroup, CellSet> dual_stratification(const Graph& g, const DilationDatum& d,
                                                const std::vector<Subgroup>& all_subgroups);

// Union of the strata over nontrivial H.
CellSet dilated_subgraph(const Graph& g, const DilationDatum& d);

// a(v; H) = number of tangent half-edges (legs included) with D(h) = H.
class IndexFunction {
 public:
  IndexFunction(const Graph& g, const DilationDatum& d);
  int64_t at(int vertex, const Subgroup& h) const;
  const std::map<Subgroup, int64_t>& row(int vertex) const;

 private:
  std::vector<std::map<Subgroup, int64_t>> rows_;  // parallel to vertices()
  const Graph* graph_;
};

// Forced cover genus at a vertex:
//   g'(v) = #D(v) (g(v) - 1) + 1 + (1/2) sum_K a(v;K) (#D(v) - [D(v):K]).
Rational admissible_genus(const Graph& g, const DilationDatum& d, int vertex);

// True iff g'(v) is a nonnegative integer at every vertex.
bool is_admissible(const Graph& g, const DilationDatum& d);

struct DilationEnumerationOptions {
  bool include_edge_groups = false;  // expand all half-edge group choices
  bool cyclic_edges_only = false;    // restrict half-edge groups to cyclic ones
  bool admissible_only = true;
  uint64_t max_group_order = 64;
  uint64_t max_candidates = 5'000'000;  // assignments examined before giving up
};

// All dilation data in deterministic order: vertex assignments expand over
// the subgroup list lexicographically; when include_edge_groups is unset each
// half-edge gets the full intersection D(s) ∩ D(t) (D(r(l)) for legs) as the
// representative choice and admissibility is evaluated against it.
std::vector<DilationDatum> enumerate_admissible_dilations(const Graph& g, const Group& group,
                                                          const DilationEnumerationOptions& opts = {});

}  // namespace dilacov
