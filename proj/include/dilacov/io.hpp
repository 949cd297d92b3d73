#pragma once

#include <string>

#include "dilacov/covers.hpp"

namespace dilacov {

// Graph file format:
//   {"cells": n, "root": [...], "involution": [...],
//    "genus": {"0": 1, ...},              // optional, keyed by vertex cell
//    "lengths": {"1-2": "3/2", ...}}      // optional, keyed hmin-hmax
Graph graph_from_json(const std::string& text);
std::string graph_to_json(const Graph& g);
Graph load_graph(const std::string& path);

// Dilation file format:
//   {"group": "2,2", "vertices": {"0": "<10>"}, "halfedges": {"3": "<10>"}}
// Omitted cells default to the trivial subgroup; either half of an edge may
// be given.
DilationDatum dilation_from_json(const Graph& g, const std::string& text);
std::string dilation_to_json(const Graph& g, const DilationDatum& d);
DilationDatum load_dilation(const Graph& g, const std::string& path);

// Stratification export mirrors the dilation schema per subgroup.
std::string stratification_to_json(const Graph& g, const Stratification& s);

// Cover file format:
//   {"base": <graph>, "total": <graph>, "projection": [...],
//    "action": {"gen0": [perm], ...}, "degrees": [...]}
Cover cover_from_json(const Group& g, const std::string& text);
std::string cover_to_json(const Cover& c);
Cover load_cover(const Group& g, const std::string& path);

Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& q);

// DOT export. Vertices are labeled "v{i} (g={g})"; edges carry the length
// and, for covers, the local degree. Cover fibers are clustered per base cell.
std::string graph_to_dot(const Graph& g, const std::string& name = "graph");
std::string cover_to_dot(const Cover& c, const std::string& name = "cover");

}  // namespace dilacov
