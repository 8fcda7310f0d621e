#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace qgraph {

struct Edge {
  std::string id;
  int source = 0;
  int target = 0;
  double length = 1.0;
  double conductivity = 1.0;
};

/// One orientation of an edge; +e runs source -> target, -e the other way.
struct DirectedEdge {
  int edge = 0;
  bool reversed = false;

  [[nodiscard]] int index() const { return 2 * edge + (reversed ? 1 : 0); }
  [[nodiscard]] DirectedEdge reverse() const { return {edge, !reversed}; }
  static DirectedEdge from_index(int i) { return {i / 2, (i % 2) != 0}; }

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

/// Point (e, xi) with xi in [0, |e|] measured from the source of e.
struct GraphPoint {
  int edge = 0;
  double xi = 0.0;
};

class MetricGraph {
 public:
  MetricGraph() = default;
  /// Validates: no self-loops, positive lengths and conductivities, connected.
  MetricGraph(std::vector<std::string> vertex_ids, std::vector<Edge> edges);

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertex_ids_.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
  [[nodiscard]] int num_directed() const { return 2 * num_edges(); }

  [[nodiscard]] const std::string& vertex_id(int v) const { return vertex_ids_.at(v); }
  [[nodiscard]] int vertex_index(const std::string& id) const;
  [[nodiscard]] const Edge& edge(int e) const { return edges_.at(e); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] int edge_index(const std::string& id) const;

  [[nodiscard]] int initial(DirectedEdge d) const {
    const Edge& e = edges_[d.edge];
    return d.reversed ? e.target : e.source;
  }
  [[nodiscard]] int terminal(DirectedEdge d) const {
    const Edge& e = edges_[d.edge];
    return d.reversed ? e.source : e.target;
  }
  [[nodiscard]] double length(int e) const { return edges_[e].length; }
  [[nodiscard]] double length(DirectedEdge d) const { return edges_[d.edge].length; }
  [[nodiscard]] double conductivity(int e) const { return edges_[e].conductivity; }
  [[nodiscard]] double conductivity(DirectedEdge d) const { return edges_[d.edge].conductivity; }

  [[nodiscard]] double vertex_conductivity(int v) const { return cv_[v]; }
  [[nodiscard]] int degree(int v) const { return static_cast<int>(out_[v].size()); }
  /// Directed edges d with i(d) = v.
  [[nodiscard]] const std::vector<DirectedEdge>& outgoing(int v) const { return out_[v]; }

  [[nodiscard]] double min_length() const { return lmin_; }
  [[nodiscard]] double max_length() const { return lmax_; }
  [[nodiscard]] double min_conductivity() const { return cmin_; }
  [[nodiscard]] int max_degree() const { return dmax_; }
  [[nodiscard]] double total_length() const;
  [[nodiscard]] bool is_equilateral(double rel_tol = 1e-12) const {
    return lmax_ - lmin_ <= rel_tol * lmax_;
  }

  /// Vertex at a point if xi sits on an endpoint (within tol), else -1.
  [[nodiscard]] int vertex_at(const GraphPoint& p, double tol = 1e-12) const;
  /// Equality that treats endpoints reached through different edges as the same vertex.
  [[nodiscard]] bool same_point(const GraphPoint& a, const GraphPoint& b, double tol = 1e-12) const;

  [[nodiscard]] nlohmann::json to_json() const;

 private:
  std::vector<std::string> vertex_ids_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, int> vindex_;
  std::unordered_map<std::string, int> eindex_;
  std::vector<std::vector<DirectedEdge>> out_;
  std::vector<double> cv_;
  double lmin_ = 0, lmax_ = 0, cmin_ = 0;
  int dmax_ = 0;
};

/// T_{e,e'} = 2c(e)/c(t(e)) - delta_{e,-e'} if t(e) = i(e'), else 0.
double transfer_coefficient(const MetricGraph& g, DirectedEdge e, DirectedEdge ep);

/// All-pairs shortest-path distances between vertices.
std::vector<std::vector<double>> vertex_distances(const MetricGraph& g);
/// Geodesic distance between two points given the vertex distance table.
double point_distance(const MetricGraph& g, const std::vector<std::vector<double>>& vd,
                      const GraphPoint& x, const GraphPoint& y);

/// Parse the graph schema; a "periodic" block is unrolled into a finite torus.
MetricGraph graph_from_json(const nlohmann::json& j);
MetricGraph load_graph(const std::string& path);

/// "e0:0.5" -> GraphPoint; edge given by id.
GraphPoint parse_point(const MetricGraph& g, const std::string& spec);

namespace build {

MetricGraph segment(int n_edges, double length = 1.0);
MetricGraph star(int degree, double length, const std::vector<double>& conductivities = {});
MetricGraph cycle(int n, double length = 1.0);
MetricGraph interval(double length = 1.0);
/// Homogeneous tree: root of degree q, every interior vertex of degree q.
MetricGraph tree(int q, int depth, double length = 1.0);
/// Unit cubic lattice torus (Z/nZ)^dim with unit conductivities.
MetricGraph lattice_torus(int n, int dim = 3, double length = 1.0);
/// Connected random graph: a random spanning tree plus extra edges.
MetricGraph random(std::uint64_t seed, int n_vertices, int n_edges, double lmin, double lmax,
                   double cmin, double cmax);

}  // namespace build

}  // namespace qgraph
