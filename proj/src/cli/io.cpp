#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qgraph/errors.hpp"

namespace qgraph::cli {

namespace {

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InputError(what + ": '" + s + "' is not a number");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LoadedGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw InputError("graph file '" + path + "': " + e.what());
  }
  LoadedGraph lg;
  try {
    lg.graph = graph_from_json(j);
  } catch (const json::exception& e) {
    throw InputError("graph file '" + path + "': schema: " + e.what());
  }
  lg.path = path;
  lg.digest = fnv1a_hex(bytes);
  return lg;
}

EdgePotential parse_edge_potential(const std::string& spec) {
  if (spec.empty() || spec == "zero") return EdgePotential::zero();
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const auto args = colon == std::string::npos ? std::vector<std::string>{}
                                               : split(spec.substr(colon + 1), ',');
  if (kind == "constant" && args.size() == 1)
    return EdgePotential::constant(to_double(args[0], "potential"));
  if (kind == "cos" && args.size() == 2) {
    const double a = to_double(args[0], "potential");
    const double k = to_double(args[1], "potential");
    return EdgePotential::function(
        [a, k](double x) { return a * std::cos(2.0 * std::numbers::pi * k * x); }, std::abs(a));
  }
  throw InputError("potential '" + spec + "': expected zero, constant:v0 or cos:a,k");
}

GraphFunction potential_on_graph(const MetricGraph& g, const EdgePotential& V) {
  std::vector<double> len(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) len[e] = g.length(e);
  return [V, len](int e, double xi) { return V(xi / len[e]); };
}

GraphFunction parse_field(const MetricGraph& g, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (kind == "constant" && colon != std::string::npos) {
    const double c = to_double(spec.substr(colon + 1), "field");
    return [c](int, double) { return c; };
  }
  if (kind == "gaussian" && colon != std::string::npos) {
    const std::string rest = spec.substr(colon + 1);
    const auto last = rest.rfind(':');
    if (last == std::string::npos) throw InputError("field '" + spec + "': expected gaussian:edge:xi:width");
    const GraphPoint centre = parse_point(g, rest.substr(0, last));
    const double w = to_double(rest.substr(last + 1), "field width");
    if (!(w > 0)) throw InputError("field '" + spec + "': width must be positive");
    auto vd = vertex_distances(g);
    const MetricGraph* gp = &g;
    return [gp, vd = std::move(vd), centre, w](int e, double xi) {
      const double d = point_distance(*gp, vd, centre, GraphPoint{e, xi});
      return std::exp(-0.5 * d * d / (w * w));
    };
  }
  throw InputError("field '" + spec + "': expected constant:c or gaussian:edge:xi:width");
}

std::complex<double> parse_complex(const std::string& spec) {
  const auto parts = split(spec, ',');
  if (parts.size() == 1) return {to_double(parts[0], "z"), 0.0};
  if (parts.size() == 2) return {to_double(parts[0], "z"), to_double(parts[1], "z")};
  throw InputError("complex '" + spec + "': expected re or re,im");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string point_label(const MetricGraph& g, const GraphPoint& p) {
  return g.edge(p.edge).id + ":" + json(p.xi).dump();
}

json manifest(const std::string& command, const std::vector<std::string>& args,
              const LoadedGraph* graph, const json& parameters) {
  json m;
  m["tool"] = "qgraph";
  m["version"] = kVersion;
  m["command"] = command;
  m["args"] = args;
  if (graph) {
    m["graph"] = {{"path", graph->path},
                  {"fnv1a64", graph->digest},
                  {"vertices", graph->graph.num_vertices()},
                  {"edges", graph->graph.num_edges()}};
  }
  m["parameters"] = parameters;
  return m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << content;
  if (!f) throw InputError("write failed for '" + path + "'");
}

void write_manifest_sidecar(const std::string& path, const json& manifest) {
  write_file(path + ".manifest.json", manifest.dump(2) + "\n");
}

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  write_file(path, text);
  if (doc.contains("manifest")) write_manifest_sidecar(path, doc["manifest"]);
}

std::string edge_function_csv(const MetricGraph& g, const EdgeFunction& f) {
  std::string s = "edge,xi,value\n";
  for (int e = 0; e < f.num_edges(); ++e)
    for (int j = 0; j <= f.intervals(e); ++j)
      s += g.edge(e).id + "," + fmt(f.xi(e, j)) + "," + fmt(f.values[e][j]) + "\n";
  return s;
}

std::string edge_function_csv(const MetricGraph& g, const ComplexEdgeFunction& f) {
  std::string s = "edge,xi,re,im\n";
  for (int e = 0; e < f.num_edges(); ++e)
    for (int j = 0; j <= f.intervals(e); ++j)
      s += g.edge(e).id + "," + fmt(f.xi(e, j)) + "," + fmt(f.values[e][j].real()) + "," +
           fmt(f.values[e][j].imag()) + "\n";
  return s;
}

}  // namespace qgraph::cli
