#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/spectral.hpp"
#include "qgraph/stochastic.hpp"

namespace qgraph::cli {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct LoadedGraph {
  MetricGraph graph;
  std::string path;
  std::string digest;  // FNV-1a 64 of the file bytes
};

LoadedGraph load_graph_file(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

/// "zero", "constant:v0" or "cos:a,k" (a cos(2 pi k x) on the unit edge).
EdgePotential parse_edge_potential(const std::string& spec);
/// The same potential on the graph: V(e, xi) = V(xi / |e|).
GraphFunction potential_on_graph(const MetricGraph& g, const EdgePotential& V);

/// "constant:c" or "gaussian:<edge>:<xi>:<width>" (geodesic Gaussian bump).
GraphFunction parse_field(const MetricGraph& g, const std::string& spec);

std::complex<double> parse_complex(const std::string& spec);

/// Shortest round-trip representation, as in the JSON output.
std::string fmt(double x);
std::string point_label(const MetricGraph& g, const GraphPoint& p);

json manifest(const std::string& command, const std::vector<std::string>& args,
              const LoadedGraph* graph, const json& parameters);

/// JSON to `path`, or to `out` when path is empty; a sidecar <path>.manifest.json
/// accompanies every file written.
void emit_json(const json& doc, const std::string& path, std::ostream& out);
void write_file(const std::string& path, const std::string& content);
void write_manifest_sidecar(const std::string& path, const json& manifest);

/// edge,xi,value rows.
std::string edge_function_csv(const MetricGraph& g, const EdgeFunction& f);
std::string edge_function_csv(const MetricGraph& g, const ComplexEdgeFunction& f);

}  // namespace qgraph::cli
