// Command-line front end: classify and construct G-covers of graphs with
// legs, weighted graphs, and metric graphs via dilated cohomology.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "dilacov/covers.hpp"
#include "dilacov/errors.hpp"
#include "dilacov/io.hpp"

using namespace dilacov;

namespace {

constexpr const char* kVersion = "dilacov 0.1.0";

struct CommonOptions {
  std::string graph_path, group_literal, dilation_path, cover_path;
  std::string format = "human";
  std::string dot_dir;
  std::string mode = "unramified";
  bool expand_edge_groups = false;
  bool cyclic_edges_only = false;
  uint64_t max_group_order = 64;
  uint64_t max_classes = 1'000'000;
  uint64_t max_candidates = 5'000'000;
  int max_edges = 3;
  std::string edges_arg;
  std::string covers_dir;
  int threads = 0;
};

bool records(const CommonOptions& o) { return o.format == "records"; }

int env_threads() {
  const char* env = std::getenv("DILACOV_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n > 0 ? n : 1;
}

std::string element_str(const GroupElement& e) { return format_element(e); }

void write_dot(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name);
  out << content;
}

int run_subgroups(const CommonOptions& o) {
  Group g = parse_group_literal(o.group_literal);
  auto subs = enumerate_subgroups(g, o.max_group_order);
  if (!records(o)) std::cout << "group = " << format_group(g) << " (order " << g.order() << ")\n";
  for (size_t i = 0; i < subs.size(); ++i) {
    if (records(o))
      std::cout << "subgroup id=" << i << " order=" << subs[i].order()
                << " index=" << subs[i].index() << " gens=" << format_subgroup(subs[i]) << "\n";
    else
      std::cout << "  " << i << ": order " << subs[i].order() << ", "
                << format_subgroup(subs[i]) << "\n";
  }
  std::cout << "subgroups=" << subs.size() << "\n";
  return 0;
}

DilationDatum read_datum(const Graph& graph, const CommonOptions& o, const Group& g) {
  if (o.dilation_path.empty()) return trivial_dilation(graph, g);
  DilationDatum d = load_dilation(graph, o.dilation_path);
  if (d.group != g) throw DomainError("dilation file group does not match --group");
  return d;
}

int run_cohomology(const CommonOptions& o) {
  Graph graph = load_graph(o.graph_path);
  Group g = parse_group_literal(o.group_literal);
  DilationDatum d = read_datum(graph, o, g);
  CohomologyResult r = cohomology_of_dilation(graph, d);
  std::cout << "H0 = " << format_factors(r.h0_factors) << "\n";
  std::cout << "H1 = " << format_factors(r.h1_factors) << "\n";
  if (records(o)) std::cout << "h0_order=" << r.h0_order << " h1_order=" << r.h1_order << "\n";
  return 0;
}

int run_classes(const CommonOptions& o) {
  Graph graph = load_graph(o.graph_path);
  Group g = parse_group_literal(o.group_literal);
  DilationDatum d = read_datum(graph, o, g);
  H1Classes cls(graph, d, o.max_classes);
  if (!records(o)) std::cout << "class_index, edge, eta_s, eta_t\n";
  for (uint64_t i = 0; i < cls.count(); ++i) {
    PairCochain pc = cls.representative(i);
    for (size_t e = 0; e < pc.pairs.size(); ++e) {
      if (records(o))
        std::cout << "class=" << i << " edge=" << e << " eta_s=" << element_str(pc.pairs[e].first)
                  << " eta_t=" << element_str(pc.pairs[e].second) << "\n";
      else
        std::cout << "  " << i << ", " << e << ", " << element_str(pc.pairs[e].first) << ", "
                  << element_str(pc.pairs[e].second) << "\n";
    }
  }
  std::cout << "classes=" << cls.count() << "\n";
  return 0;
}

std::string datum_summary(const Graph& graph, const DilationDatum& d) {
  std::string out;
  for (int v : graph.vertices()) {
    if (!out.empty()) out += " ";
    out += "D(v" + std::to_string(v) + ")=" + format_subgroup(d.assign[v]);
  }
  for (const Edge& e : graph.edges())
    if (!d.assign[e.hmin].is_trivial())
      out += " D(e" + std::to_string(e.hmin) + "-" + std::to_string(e.hmax) + ")=" +
             format_subgroup(d.assign[e.hmin]);
  for (int l : graph.legs())
    if (!d.assign[l].is_trivial())
      out += " D(l" + std::to_string(l) + ")=" + format_subgroup(d.assign[l]);
  return out;
}

int run_enumerate(const CommonOptions& o) {
  Graph graph = load_graph(o.graph_path);
  Group g = parse_group_literal(o.group_literal);
  EnumerateOptions opts;
  opts.mode = o.mode == "all" ? CoverMode::kAll : CoverMode::kUnramified;
  opts.expand_edge_groups = o.expand_edge_groups;
  opts.cyclic_edges_only = o.cyclic_edges_only;
  opts.max_group_order = o.max_group_order;
  opts.class_bound = o.max_classes;
  opts.max_candidates = o.max_candidates;
  opts.threads = o.threads > 0 ? o.threads : env_threads();
  if (opts.mode == CoverMode::kUnramified && !opts.expand_edge_groups)
    std::cerr << "note: edge groups fixed to the full intersections; admissibility can differ "
                 "across edge-group choices, rerun with --expand-edge-groups for the "
                 "authoritative stratification list\n";
  if (!o.dot_dir.empty() || !o.covers_dir.empty()) {
    opts.threads = 1;
    int datum_id = -1;
    opts.on_cover = [&, datum_id](const DilationDatum&, uint64_t idx, const Cover& c) mutable {
      if (idx == 0) ++datum_id;  // covers arrive in (datum, class) order
      std::string stem = "cover_" + std::to_string(datum_id) + "_" + std::to_string(idx);
      if (!o.dot_dir.empty()) write_dot(o.dot_dir, stem + ".dot", cover_to_dot(c));
      if (!o.covers_dir.empty()) {
        std::filesystem::create_directories(o.covers_dir);
        std::ofstream out(std::filesystem::path(o.covers_dir) / (stem + ".cover"));
        out << cover_to_json(c) << "\n";
      }
    };
  }
  CoverCatalog cat = enumerate_covers(graph, g, opts);

  if (records(o)) {
    for (size_t i = 0; i < cat.data.size(); ++i)
      std::cout << "datum id=" << i << " classes=" << cat.classes_per_datum[i] << " "
                << datum_summary(graph, cat.data[i]) << "\n";
    for (const CatalogRow& row : cat.rows)
      std::cout << "cover datum=" << row.datum_id << " class=" << row.class_index
                << " components=" << row.components << " connected=" << (row.connected ? 1 : 0)
                << " total_vertices=" << row.total_vertices
                << " total_edges=" << row.total_edges << "\n";
  } else {
    std::cout << "stratifications (" << cat.data.size() << "):\n";
    for (size_t i = 0; i < cat.data.size(); ++i)
      std::cout << "  " << i << ": classes=" << cat.classes_per_datum[i] << "  "
                << datum_summary(graph, cat.data[i]) << "\n";
  }
  std::cout << "covers=" << cat.total_covers << " connected=" << cat.connected_covers
            << " data=" << cat.data.size() << "\n";
  return 0;
}

int run_verify_cover(const CommonOptions& o) {
  Group g = parse_group_literal(o.group_literal);
  Cover c = load_cover(g, o.cover_path);
  std::cout << "certified=1 components=" << c.total.component_count() << "\n";
  if (c.base.has_genus() && c.total.has_genus()) {
    RamificationReport r = verify_unramified(c);
    std::cout << "effective=" << (r.effective ? 1 : 0) << " unramified=" << (r.unramified ? 1 : 0)
              << " global_rh=" << (r.global_ok ? 1 : 0) << "\n";
    if (!records(o)) {
      for (size_t i = 0; i < r.ram.size(); ++i)
        std::cout << "  Ram(v" << c.total.vertices()[i] << ") = " << r.ram[i] << "\n";
    }
  }
  if (!o.dot_dir.empty()) write_dot(o.dot_dir, "cover.dot", cover_to_dot(c));
  return 0;
}

std::vector<int> parse_edges(const Graph& graph, const std::string& arg) {
  std::vector<int> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto dash = tok.find('-');
    int found = -1;
    for (size_t e = 0; e < graph.edges().size(); ++e) {
      const Edge& ed = graph.edges()[e];
      if (dash != std::string::npos) {
        if (ed.hmin == std::stoi(tok.substr(0, dash)) &&
            ed.hmax == std::stoi(tok.substr(dash + 1)))
          found = static_cast<int>(e);
      } else if (static_cast<int>(e) == std::stoi(tok)) {
        found = static_cast<int>(e);
      }
    }
    if (found < 0) throw DomainError("not an edge: " + tok);
    out.push_back(found);
  }
  return out;
}

int run_contract(const CommonOptions& o) {
  if (!o.cover_path.empty()) {
    Group g = parse_group_literal(o.group_literal);
    Cover c = load_cover(g, o.cover_path);
    Cover contracted = contract_cover(c, parse_edges(c.base, o.edges_arg));
    std::cout << cover_to_json(contracted) << "\n";
    if (!o.dot_dir.empty()) write_dot(o.dot_dir, "contracted.dot", cover_to_dot(contracted));
    return 0;
  }
  Graph graph = load_graph(o.graph_path);
  ContractionResult r = weighted_edge_contraction(graph, parse_edges(graph, o.edges_arg));
  std::cout << graph_to_json(r.graph) << "\n";
  if (!o.dot_dir.empty()) write_dot(o.dot_dir, "contracted.dot", graph_to_dot(r.graph));
  return 0;
}

int run_stabilize(const CommonOptions& o) {
  if (!o.cover_path.empty()) {
    Group g = parse_group_literal(o.group_literal);
    Cover c = load_cover(g, o.cover_path);
    Cover st = stabilize_cover(c);
    std::cout << cover_to_json(st) << "\n";
    if (!o.dot_dir.empty()) write_dot(o.dot_dir, "stabilized.dot", cover_to_dot(st));
    return 0;
  }
  Graph graph = load_graph(o.graph_path);
  StabilizationResult r = stabilize(graph);
  std::cout << graph_to_json(r.graph) << "\n";
  if (!o.dot_dir.empty()) write_dot(o.dot_dir, "stabilized.dot", graph_to_dot(r.graph));
  return 0;
}

int run_oracle(const CommonOptions& o) {
  Graph graph = load_graph(o.graph_path);
  Group g = parse_group_literal(o.group_literal);
  if (static_cast<int>(graph.edges().size()) > o.max_edges)
    throw ResourceError("oracle limited to " + std::to_string(o.max_edges) +
                        " edges; raise --max-edges to override");

  DilationEnumerationOptions dopts;
  dopts.include_edge_groups = true;
  dopts.admissible_only = false;
  dopts.max_group_order = o.max_group_order;
  uint64_t data_checked = 0, covers_built = 0;
  for (const DilationDatum& d : enumerate_admissible_dilations(graph, g, dopts)) {
    H1Classes cls(graph, d, o.max_classes);
    std::vector<Cover> reps;
    std::vector<uint64_t> rep_class;
    std::vector<std::pair<const QuotientPresentation*, const QuotientPresentation*>> sides;
    std::vector<size_t> sizes;
    for (const Edge& e : graph.edges()) {
      sides.push_back({&cached_quotient(g, d.assign[e.source]),
                       &cached_quotient(g, d.assign[e.target])});
      sizes.push_back(sides.back().first->size() * sides.back().second->size());
    }
    std::vector<size_t> pos(sizes.size(), 0);
    for (bool done = false; !done;) {
      PairCochain pc;
      for (size_t e = 0; e < pos.size(); ++e) {
        size_t ts = sides[e].second->size();
        pc.pairs.push_back({sides[e].first->canonical_lift(pos[e] / ts),
                            sides[e].second->canonical_lift(pos[e] % ts)});
      }
      Cover c = build_cover(graph, d, pc, GenusMode::kPullback);
      ++covers_built;
      uint64_t idx = class_of_cover(c, cls).class_index;
      bool found = false;
      for (size_t r = 0; r < reps.size() && !found; ++r) {
        bool iso = covers_isomorphic(reps[r], c).isomorphic;
        if (iso != (rep_class[r] == idx))
          throw CertificationError("oracle: isomorphism and class index disagree");
        found = iso;
      }
      if (!found) {
        reps.push_back(std::move(c));
        rep_class.push_back(idx);
      }
      int i = static_cast<int>(pos.size()) - 1;
      while (i >= 0 && ++pos[i] == sizes[i]) pos[i--] = 0;
      if (i < 0) done = true;
    }
    if (reps.size() != cls.count())
      throw CertificationError("oracle: distinct covers do not match |H1|");
    std::set<uint64_t> hit(rep_class.begin(), rep_class.end());
    if (hit.size() != cls.count())
      throw CertificationError("oracle: classifier is not a bijection onto the class indices");
    ++data_checked;
  }
  std::cout << "oracle=OK classes_match=all data=" << data_checked
            << " covers_built=" << covers_built << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"G-covers of graphs with legs via dilated cohomology"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions o;
  auto add_common = [&](CLI::App* cmd, bool needs_graph, bool needs_group) {
    if (needs_graph) cmd->add_option("--graph", o.graph_path, "graph file")->required();
    if (needs_group) cmd->add_option("--group", o.group_literal, "group literal, e.g. 2,2 or Z6")->required();
    cmd->add_option("--format", o.format, "human or records")
        ->check(CLI::IsMember({"human", "records"}));
    cmd->add_option("--dot", o.dot_dir, "write DOT exports into this directory");
    cmd->add_option("--max-group-order", o.max_group_order, "subgroup enumeration bound");
    cmd->add_option("--max-classes", o.max_classes, "class enumeration bound");
    cmd->add_option("--max-candidates", o.max_candidates, "dilation enumeration bound");
  };

  auto* subgroups = app.add_subcommand("subgroups", "list the subgroups of a group");
  add_common(subgroups, false, true);

  auto* cohomology = app.add_subcommand("cohomology", "dilated cohomology groups");
  add_common(cohomology, true, true);
  cohomology->add_option("--dilation", o.dilation_path, "dilation datum file");

  auto* classes = app.add_subcommand("classes", "enumerate the H1 classes of a datum");
  add_common(classes, true, true);
  classes->add_option("--dilation", o.dilation_path, "dilation datum file");

  auto* enumerate = app.add_subcommand("enumerate", "enumerate G-covers");
  add_common(enumerate, true, true);
  enumerate->add_option("--mode", o.mode, "all or unramified")
      ->check(CLI::IsMember({"all", "unramified"}));
  enumerate->add_flag("--expand-edge-groups", o.expand_edge_groups,
                      "expand all half-edge group choices");
  enumerate->add_flag("--cyclic-edges-only", o.cyclic_edges_only,
                      "restrict half-edge groups to cyclic subgroups");
  enumerate->add_option("--threads", o.threads, "worker threads (default DILACOV_THREADS or 1)");
  enumerate->add_option("--covers-dir", o.covers_dir, "write each cover as a JSON file");

  auto* verify = app.add_subcommand("verify-cover", "certify a cover file");
  add_common(verify, false, true);
  verify->add_option("--cover", o.cover_path, "cover file")->required();

  auto* contract = app.add_subcommand("contract", "weighted edge contraction");
  add_common(contract, false, false);
  contract->add_option("--graph", o.graph_path, "graph file");
  contract->add_option("--group", o.group_literal, "group literal (with --cover)");
  contract->add_option("--cover", o.cover_path, "cover file to transport");
  contract->add_option("--edges", o.edges_arg, "edges to contract, e.g. 3-4,8-9")->required();

  auto* stabilize_cmd = app.add_subcommand("stabilize", "stabilize a graph or a cover");
  add_common(stabilize_cmd, false, false);
  stabilize_cmd->add_option("--graph", o.graph_path, "graph file");
  stabilize_cmd->add_option("--group", o.group_literal, "group literal (with --cover)");
  stabilize_cmd->add_option("--cover", o.cover_path, "cover file to transport");

  auto* oracle = app.add_subcommand("oracle", "brute-force bijection cross-check");
  add_common(oracle, true, true);
  oracle->add_option("--max-edges", o.max_edges, "edge-count guard (default 3)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (subgroups->parsed()) return run_subgroups(o);
    if (cohomology->parsed()) return run_cohomology(o);
    if (classes->parsed()) return run_classes(o);
    if (enumerate->parsed()) return run_enumerate(o);
    if (verify->parsed()) return run_verify_cover(o);
    if (contract->parsed()) return run_contract(o);
    if (stabilize_cmd->parsed()) return run_stabilize(o);
    if (oracle->parsed()) return run_oracle(o);
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 2;
  } catch (const CertificationError& e) {
    std::cerr << "certification failure: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
