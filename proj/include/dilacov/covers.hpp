#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dilacov/cohomology.hpp"
#include "dilacov/dilation.hpp"
#include "dilacov/graph.hpp"

namespace dilacov {

// A G-cover: a surjective graph morphism with a fiber-transitive G-action
// whose cell stabilizers realize the dilation datum, promoted to a harmonic
// morphism by d(x') = #D(x). Certified on construction.
struct Cover {
  Graph base;
  Graph total;
  std::vector<int> projection;              // total cell -> base cell
  std::vector<std::vector<int>> action;     // permutation per generator of G
  std::vector<int64_t> degrees;             // per total cell
  DilationDatum datum;                      // on the base

  // Permutation of the total cells realized by a group element.
  std::vector<int> permutation_of(const GroupElement& g) const;
  int64_t degree() const { return static_cast<int64_t>(datum.group.order()); }
};

struct CoverClass {
  DilationDatum datum;
  uint64_t class_index = 0;
  PairCochain representative;
};

// Checks every cover axiom (projection equivariance, no-flip action, fiber
// transitivity, stabilizers = D, degrees, harmonicity) and returns the
// certified cover. Throws CertificationError naming the violated axiom.
// When expected_datum is absent the datum is derived from the stabilizers.
Cover certify_cover(Graph base, Graph total, std::vector<int> projection,
                    std::vector<std::vector<int>> action, std::vector<int64_t> degrees,
                    const Group& group,
                    std::optional<DilationDatum> expected_datum = std::nullopt);

enum class GenusMode {
  kUnramified,  // genus forced by the local Riemann-Hurwitz condition
  kPullback,    // genus copied from the base
};

// Builds the cover determined by a dilation datum and a pair cochain: vertex,
// edge and leg fibers are the cosets of the dilation groups in canonical
// order, and the cochain twists the attachment over each edge. Lengths lift
// by l' = l / d when the base is metric.
Cover build_cover(const Graph& base, const DilationDatum& d, const PairCochain& eta,
                  GenusMode mode = GenusMode::kUnramified,
                  const std::function<int64_t(int)>* genus_override = nullptr);

// Reads the attachment cochain back off a certified cover through
// G-equivariant fiber identifications and reduces it to a class index.
CoverClass class_of_cover(const Cover& c, const H1Classes& classes);

struct ConnectivityReport {
  int components = 0;
  bool connected = false;
  bool vertex_groups_span = false;
  // Stabilizer of the component over the base component's least cell: the
  // minimal subgroup H with D(v) <= H such that the class comes from an
  // H-cover. One entry per base component.
  std::vector<Subgroup> component_stabilizers;
  bool membership_verified = false;  // image membership re-checked by element search
};

ConnectivityReport connectivity(const Cover& c, bool verify_membership = false,
                                uint64_t class_bound = 1'000'000);

struct RamificationReport {
  std::vector<int64_t> ram;  // per total vertex, parallel to total.vertices()
  bool effective = false;
  bool unramified = false;
  int64_t chi_base = 0, chi_total = 0;
  bool global_ok = false;  // chi(total) = deg * chi(base)
};

RamificationReport verify_unramified(const Cover& c);

// Unique metric lift l'(e') = l(phi(e')) / d(e').
std::map<std::pair<int, int>, Rational> lift_metric(const Cover& c);

enum class CoverMode { kAll, kUnramified };

struct CatalogRow {
  int datum_id = 0;
  uint64_t class_index = 0;
  int components = 0;
  bool connected = false;
  int total_vertices = 0;
  int total_edges = 0;
};

struct CoverCatalog {
  std::vector<DilationDatum> data;
  std::vector<uint64_t> classes_per_datum;
  std::vector<CatalogRow> rows;
  uint64_t total_covers = 0;
  uint64_t connected_covers = 0;
};

struct EnumerateOptions {
  CoverMode mode = CoverMode::kUnramified;
  bool expand_edge_groups = false;
  bool cyclic_edges_only = false;
  uint64_t max_group_order = 64;
  uint64_t class_bound = 1'000'000;
  uint64_t max_candidates = 5'000'000;
  int threads = 1;
  // Re-certify every emitted cover (projection/action/harmonicity axioms).
  bool certify = true;
  // Callback per built cover, in deterministic order.
  std::function<void(const DilationDatum&, uint64_t, const Cover&)> on_cover;
};

// Iterates dilation data (edge/leg groups expanded when requested or in
// all-covers mode), filters by admissibility in unramified mode, and emits
// |H1| covers per datum.
CoverCatalog enumerate_covers(const Graph& base, const Group& g, const EnumerateOptions& opts = {});

struct IsomorphismResult {
  bool isomorphic = false;
  std::vector<int> witness;  // total1 cell -> total2 cell when isomorphic
};

// G-equivariant isomorphism over the identity of the base: backtracking over
// fiber identifications with propagation along roots and the action.
IsomorphismResult covers_isomorphic(const Cover& c1, const Cover& c2);

// Transport along weighted edge contraction of the base: contracts S downstairs
// and its preimage upstairs, recomputing degrees and the action.
Cover contract_cover(const Cover& c, const std::vector<int>& base_edge_indices);

// Stabilization transport: prunes unstable trees and smooths simple fibers in
// lockstep with the base. Requires an unramified cover of a connected base
// with negative Euler characteristic.
Cover stabilize_cover(const Cover& c);

}  // namespace dilacov
