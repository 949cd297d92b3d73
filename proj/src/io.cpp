#include "dilacov/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError(std::string("malformed JSON in ") + what);
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::pair<int, int> parse_edge_key(const std::string& key) {
  auto dash = key.find('-');
  if (dash == std::string::npos) throw FormatError("bad edge key: " + key);
  return {std::stoi(key.substr(0, dash)), std::stoi(key.substr(dash + 1))};
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(Int(text));
    Int num(text.substr(0, slash)), den(text.substr(slash + 1));
    if (den == 0) throw FormatError("zero denominator: " + text);
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw FormatError("bad rational literal: " + text);
  }
}

std::string format_rational(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

Graph graph_from_json(const std::string& text) {
  json j = parse_json(text, "graph");
  if (!j.contains("cells") || !j.contains("root") || !j.contains("involution"))
    throw FormatError("graph file needs cells, root, and involution");
  int n = j["cells"].get<int>();
  std::vector<int> root = j["root"].get<std::vector<int>>();
  std::vector<int> inv = j["involution"].get<std::vector<int>>();
  if (static_cast<int>(root.size()) != n || static_cast<int>(inv.size()) != n)
    throw FormatError("graph maps do not match the cell count");
  std::optional<std::map<int, int64_t>> genus;
  if (j.contains("genus")) {
    genus.emplace();
    for (auto& [key, value] : j["genus"].items())
      (*genus)[std::stoi(key)] = value.get<int64_t>();
  }
  std::optional<std::map<std::pair<int, int>, Rational>> lengths;
  if (j.contains("lengths")) {
    lengths.emplace();
    for (auto& [key, value] : j["lengths"].items())
      (*lengths)[parse_edge_key(key)] = parse_rational(value.get<std::string>());
  }
  return validate_graph(root, inv, genus, lengths);
}

std::string graph_to_json(const Graph& g) {
  json j;
  j["cells"] = g.cell_count();
  std::vector<int> root, inv;
  for (int c = 0; c < g.cell_count(); ++c) {
    root.push_back(g.root(c));
    inv.push_back(g.involution(c));
  }
  j["root"] = root;
  j["involution"] = inv;
  if (g.has_genus()) {
    json genus = json::object();
    for (int v : g.vertices()) genus[std::to_string(v)] = g.genus(v);
    j["genus"] = genus;
  }
  if (g.has_lengths()) {
    json lengths = json::object();
    for (size_t e = 0; e < g.edges().size(); ++e) {
      const Edge& ed = g.edges()[e];
      lengths[std::to_string(ed.hmin) + "-" + std::to_string(ed.hmax)] =
          format_rational(g.length(static_cast<int>(e)));
    }
    j["lengths"] = lengths;
  }
  return j.dump(2);
}

Graph load_graph(const std::string& path) { return graph_from_json(read_file(path)); }

DilationDatum dilation_from_json(const Graph& g, const std::string& text) {
  json j = parse_json(text, "dilation");
  if (!j.contains("group")) throw FormatError("dilation file needs a group");
  Group grp = parse_group_literal(j["group"].get<std::string>());
  DilationDatum d = trivial_dilation(g, grp);
  if (j.contains("vertices"))
    for (auto& [key, value] : j["vertices"].items()) {
      int cell = std::stoi(key);
      if (cell < 0 || cell >= g.cell_count() || !g.is_vertex(cell))
        throw FormatError("dilation vertex key is not a vertex: " + key);
      d.assign[cell] = parse_subgroup_literal(grp, value.get<std::string>());
    }
  if (j.contains("halfedges"))
    for (auto& [key, value] : j["halfedges"].items()) {
      int cell = std::stoi(key);
      if (cell < 0 || cell >= g.cell_count() || g.is_vertex(cell))
        throw FormatError("dilation halfedge key is not a half-edge: " + key);
      Subgroup h = parse_subgroup_literal(grp, value.get<std::string>());
      d.assign[cell] = h;
      d.assign[g.involution(cell)] = h;
    }
  return validate_dilation(g, grp, d.assign);
}

std::string dilation_to_json(const Graph& g, const DilationDatum& d) {
  json j;
  std::string group_literal;
  for (int i = 0; i < d.group.rank(); ++i) {
    if (i) group_literal += ",";
    group_literal += std::to_string(d.group.factors()[i]);
  }
  j["group"] = group_literal;
  json vertices = json::object(), halfedges = json::object();
  for (int v : g.vertices())
    if (!d.assign[v].is_trivial()) vertices[std::to_string(v)] = format_subgroup(d.assign[v]);
  for (const Edge& e : g.edges())
    if (!d.assign[e.hmin].is_trivial())
      halfedges[std::to_string(e.hmin)] = format_subgroup(d.assign[e.hmin]);
  for (int l : g.legs())
    if (!d.assign[l].is_trivial()) halfedges[std::to_string(l)] = format_subgroup(d.assign[l]);
  j["vertices"] = vertices;
  j["halfedges"] = halfedges;
  return j.dump(2);
}

DilationDatum load_dilation(const Graph& g, const std::string& path) {
  return dilation_from_json(g, read_file(path));
}

std::string stratification_to_json(const Graph& g, const Stratification& s) {
  json j = json::object();
  for (const auto& [h, cells] : s) {
    json stratum = json::array();
    for (int c = 0; c < g.cell_count(); ++c)
      if (cells.test(c)) stratum.push_back(c);
    j[format_subgroup(h)] = stratum;
  }
  return j.dump(2);
}

Cover cover_from_json(const Group& g, const std::string& text) {
  json j = parse_json(text, "cover");
  for (const char* key : {"base", "total", "projection", "action", "degrees"})
    if (!j.contains(key)) throw FormatError(std::string("cover file needs ") + key);
  Graph base = graph_from_json(j["base"].dump());
  Graph total = graph_from_json(j["total"].dump());
  std::vector<int> projection = j["projection"].get<std::vector<int>>();
  std::vector<int64_t> degrees = j["degrees"].get<std::vector<int64_t>>();
  std::vector<std::vector<int>> action(g.rank());
  for (int i = 0; i < g.rank(); ++i) {
    std::string key = "gen" + std::to_string(i);
    if (!j["action"].contains(key)) throw FormatError("cover action is missing " + key);
    action[i] = j["action"][key].get<std::vector<int>>();
  }
  return certify_cover(std::move(base), std::move(total), std::move(projection),
                       std::move(action), std::move(degrees), g);
}

std::string cover_to_json(const Cover& c) {
  json j;
  j["base"] = json::parse(graph_to_json(c.base));
  j["total"] = json::parse(graph_to_json(c.total));
  j["projection"] = c.projection;
  j["degrees"] = c.degrees;
  json action = json::object();
  for (size_t i = 0; i < c.action.size(); ++i) action["gen" + std::to_string(i)] = c.action[i];
  j["action"] = action;
  return j.dump(2);
}

Cover load_cover(const Group& g, const std::string& path) {
  return cover_from_json(g, read_file(path));
}

namespace {

std::string vertex_label(const Graph& g, int v) {
  std::string label = "v" + std::to_string(v);
  if (g.has_genus()) label += " (g=" + std::to_string(g.genus(v)) + ")";
  return label;
}

}  // namespace

std::string graph_to_dot(const Graph& g, const std::string& name) {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (int v : g.vertices())
    os << "  n" << v << " [label=\"" << vertex_label(g, v) << "\"];\n";
  for (size_t e = 0; e < g.edges().size(); ++e) {
    const Edge& ed = g.edges()[e];
    os << "  n" << ed.source << " -- n" << ed.target;
    if (g.has_lengths()) os << " [label=\"l=" << format_rational(g.length(static_cast<int>(e))) << "\"]";
    os << ";\n";
  }
  for (int l : g.legs()) {
    os << "  leg" << l << " [shape=none, label=\"\"];\n";
    os << "  n" << g.root(l) << " -- leg" << l << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

std::string cover_to_dot(const Cover& c, const std::string& name) {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  // Fibers grouped by base cell.
  for (int x : c.base.vertices()) {
    os << "  subgraph cluster_fiber" << x << " {\n";
    os << "    label=\"fiber of v" << x << "\";\n";
    for (int t : c.total.vertices())
      if (c.projection[t] == x)
        os << "    n" << t << " [label=\"" << vertex_label(c.total, t) << "\"];\n";
    os << "  }\n";
  }
  for (size_t e = 0; e < c.total.edges().size(); ++e) {
    const Edge& ed = c.total.edges()[e];
    os << "  n" << ed.source << " -- n" << ed.target << " [label=\"d=" << c.degrees[ed.hmin];
    if (c.total.has_lengths()) os << " l=" << format_rational(c.total.length(static_cast<int>(e)));
    os << "\"];\n";
  }
  for (int l : c.total.legs()) {
    os << "  leg" << l << " [shape=none, label=\"\"];\n";
    os << "  n" << c.total.root(l) << " -- leg" << l << " [style=dashed, label=\"d="
       << c.degrees[l] << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace dilacov
