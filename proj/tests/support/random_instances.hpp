#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dilacov/abelian.hpp"
#include "dilacov/dilation.hpp"
#include "dilacov/graph.hpp"

namespace dilacov::testsupport {

// Two vertices joined by n parallel edges, all genus 0.
Graph theta_graph(int n = 2);

// Loop at vertex 0, chain 0-1-2, leg at 1, loop at 2; all genus 0.
// Genus-2 graph with one leg and Euler characteristic -3.
Graph dumbbell_with_leg();

// Single vertex of the given genus with `loops` loops and `legs` legs.
Graph rose(int64_t genus, int loops, int legs);

// Random connected tree with up to max_edges edges.
Graph random_tree(std::mt19937_64& rng, int max_edges);

// Random connected graph with up to max_edges edges (loops, multi-edges and
// legs allowed), random genus bounded by max_genus.
Graph random_connected_graph(std::mt19937_64& rng, int max_edges, int64_t max_genus = 2,
                             int max_legs = 2);

// Random group of order <= max_order.
Group random_group(std::mt19937_64& rng, uint64_t max_order = 16);

// Random valid dilation datum (arbitrary vertex groups, edge groups random
// within the containment constraints).
DilationDatum random_dilation(std::mt19937_64& rng, const Graph& g, const Group& group);

// Random cell subset of g closed under root and involution.
CellSet random_subgraph(std::mt19937_64& rng, const Graph& g);

// All connected graphs with at most max_vertices vertices and max_edges
// edges (no legs), one per isomorphism class, deterministically ordered.
std::vector<Graph> all_small_connected_graphs(int max_vertices, int max_edges);

}  // namespace dilacov::testsupport
