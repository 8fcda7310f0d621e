#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "qgraph/errors.hpp"

namespace qgraph {

MetricGraph::MetricGraph(std::vector<std::string> vertex_ids, std::vector<Edge> edges)
    : vertex_ids_(std::move(vertex_ids)), edges_(std::move(edges)) {
  const int nv = num_vertices();
  if (nv == 0) throw InputError("graph has no vertices");
  if (edges_.empty()) throw InputError("graph has no edges");
  for (int v = 0; v < nv; ++v) {
    if (!vindex_.emplace(vertex_ids_[v], v).second)
      throw InputError("duplicate vertex id '" + vertex_ids_[v] + "'");
  }
  out_.assign(nv, {});
  cv_.assign(nv, 0.0);
  lmin_ = INFINITY;
  lmax_ = 0.0;
  cmin_ = INFINITY;
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[e];
    if (!eindex_.emplace(ed.id, e).second) throw InputError("duplicate edge id '" + ed.id + "'");
    if (ed.source < 0 || ed.source >= nv || ed.target < 0 || ed.target >= nv)
      throw InputError("edge '" + ed.id + "' references an unknown vertex");
    if (ed.source == ed.target) throw InputError("edge '" + ed.id + "' is a self-loop");
    if (!(ed.length > 0.0) || !std::isfinite(ed.length))
      throw InputError("edge '" + ed.id + "' has non-positive length");
    if (!(ed.conductivity > 0.0) || !std::isfinite(ed.conductivity))
      throw InputError("edge '" + ed.id + "' has non-positive conductivity");
    out_[ed.source].push_back({e, false});
    out_[ed.target].push_back({e, true});
    cv_[ed.source] += ed.conductivity;
    cv_[ed.target] += ed.conductivity;
    lmin_ = std::min(lmin_, ed.length);
    lmax_ = std::max(lmax_, ed.length);
    cmin_ = std::min(cmin_, ed.conductivity);
  }
  for (int v = 0; v < nv; ++v) {
    if (out_[v].empty()) throw InputError("vertex '" + vertex_ids_[v] + "' is isolated");
    dmax_ = std::max(dmax_, degree(v));
  }

  std::vector<char> seen(nv, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (DirectedEdge d : out_[v]) {
      const int w = terminal(d);
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  if (count != nv) throw InputError("graph is disconnected");
}

int MetricGraph::vertex_index(const std::string& id) const {
  auto it = vindex_.find(id);
  if (it == vindex_.end()) throw InputError("unknown vertex id '" + id + "'");
  return it->second;
}

int MetricGraph::edge_index(const std::string& id) const {
  auto it = eindex_.find(id);
  if (it == eindex_.end()) throw InputError("unknown edge id '" + id + "'");
  return it->second;
}

double MetricGraph::total_length() const {
  double s = 0.0;
  for (const Edge& e : edges_) s += e.length;
  return s;
}

int MetricGraph::vertex_at(const GraphPoint& p, double tol) const {
  const Edge& e = edges_.at(p.edge);
  if (std::fabs(p.xi) <= tol * e.length) return e.source;
  if (std::fabs(p.xi - e.length) <= tol * e.length) return e.target;
  return -1;
}

bool MetricGraph::same_point(const GraphPoint& a, const GraphPoint& b, double tol) const {
  const int va = vertex_at(a, tol);
  const int vb = vertex_at(b, tol);
  if (va >= 0 || vb >= 0) return va == vb;
  return a.edge == b.edge && std::fabs(a.xi - b.xi) <= tol * edges_[a.edge].length;
}

nlohmann::json MetricGraph::to_json() const {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& id : vertex_ids_) j["vertices"].push_back({{"id", id}});
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : edges_) {
    j["edges"].push_back({{"id", e.id},
                          {"source", vertex_ids_[e.source]},
                          {"target", vertex_ids_[e.target]},
                          {"length", e.length},
                          {"conductivity", e.conductivity}});
  }
  return j;
}

double transfer_coefficient(const MetricGraph& g, DirectedEdge e, DirectedEdge ep) {
  if (e.edge < 0 || e.edge >= g.num_edges() || ep.edge < 0 || ep.edge >= g.num_edges())
    throw InputError("unknown edge in transfer coefficient");
  const int v = g.terminal(e);
  if (v != g.initial(ep)) return 0.0;
  const double t = 2.0 * g.conductivity(e) / g.vertex_conductivity(v);
  return (ep == e.reverse()) ? t - 1.0 : t;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw InputError(where + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

double require_positive(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) throw InputError(where + ": field '" + std::string(key) + "' must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x))
    throw InputError(where + ": field '" + std::string(key) + "' must be positive");
  return x;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

MetricGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("graph: top level must be an object");
  const auto& jv = require(j, "vertices", "graph");
  const auto& je = require(j, "edges", "graph");
  if (!jv.is_array() || !je.is_array()) throw InputError("graph: vertices and edges must be arrays");

  std::vector<std::string> vids;
  std::unordered_map<std::string, int> vmap;
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    std::string id = require_string(jv[i], "id", where);
    if (!vmap.emplace(id, static_cast<int>(vids.size())).second)
      throw InputError(where + ": duplicate vertex id '" + id + "'");
    vids.push_back(std::move(id));
  }
  std::vector<Edge> base;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    Edge e;
    e.id = require_string(je[i], "id", where);
    const std::string s = require_string(je[i], "source", where);
    const std::string t = require_string(je[i], "target", where);
    if (!vmap.count(s)) throw InputError(where + ": unknown source vertex '" + s + "'");
    if (!vmap.count(t)) throw InputError(where + ": unknown target vertex '" + t + "'");
    e.source = vmap[s];
    e.target = vmap[t];
    e.length = require_positive(je[i], "length", where);
    e.conductivity = require_positive(je[i], "conductivity", where);
    base.push_back(std::move(e));
  }

  if (!j.contains("periodic")) return MetricGraph(std::move(vids), std::move(base));

  const auto& jp = j.at("periodic");
  const auto& jc = require(jp, "copies", "periodic");
  if (!jc.is_number_integer() || jc.get<long>() < 1)
    throw InputError("periodic: copies must be an integer >= 1");
  const int copies = jc.get<int>();
  const int nv = static_cast<int>(vids.size());
  std::vector<std::pair<int, int>> glue;
  if (jp.contains("glue")) {
    for (const auto& pair : jp.at("glue")) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        throw InputError("periodic: glue entries must be [vertex id, vertex id]");
      const auto u = pair[0].get<std::string>();
      const auto w = pair[1].get<std::string>();
      if (!vmap.count(u) || !vmap.count(w))
        throw InputError("periodic: glue references unknown vertex");
      glue.emplace_back(vmap[u], vmap[w]);
    }
  }

  const int total = nv * copies;
  std::vector<int> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  for (int k = 0; k < copies; ++k) {
    for (auto [u, w] : glue) {
      const int a = find_root(parent, k * nv + u);
      const int b = find_root(parent, ((k + 1) % copies) * nv + w);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  auto copy_name = [copies](const std::string& id, int k) {
    return copies == 1 ? id : id + "#" + std::to_string(k);
  };
  std::vector<int> renum(total, -1);
  std::vector<std::string> out_ids;
  for (int x = 0; x < total; ++x) {
    const int r = find_root(parent, x);
    if (renum[r] < 0) {
      renum[r] = static_cast<int>(out_ids.size());
      out_ids.push_back(copy_name(vids[r % nv], r / nv));
    }
  }
  std::vector<Edge> edges;
  for (int k = 0; k < copies; ++k) {
    for (const Edge& e : base) {
      Edge c = e;
      c.id = copy_name(e.id, k);
      c.source = renum[find_root(parent, k * nv + e.source)];
      c.target = renum[find_root(parent, k * nv + e.target)];
      edges.push_back(std::move(c));
    }
  }
  return MetricGraph(std::move(out_ids), std::move(edges));
}

MetricGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("graph file '" + path + "': " + e.what());
  }
  return graph_from_json(j);
}

GraphPoint parse_point(const MetricGraph& g, const std::string& spec) {
  const auto pos = spec.rfind(':');
  if (pos == std::string::npos) throw InputError("point '" + spec + "' must look like edge:xi");
  GraphPoint p;
  p.edge = g.edge_index(spec.substr(0, pos));
  try {
    std::size_t used = 0;
    p.xi = std::stod(spec.substr(pos + 1), &used);
    if (used != spec.size() - pos - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InputError("point '" + spec + "': bad coordinate");
  }
  if (p.xi < 0.0 || p.xi > g.length(p.edge))
    throw InputError("point '" + spec + "': coordinate outside [0, length]");
  return p;
}

std::vector<std::vector<double>> vertex_distances(const MetricGraph& g) {
  const int n = g.num_vertices();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int v = 0; v < n; ++v) d[v][v] = 0.0;
  for (const Edge& e : g.edges()) {
    d[e.source][e.target] = std::min(d[e.source][e.target], e.length);
    d[e.target][e.source] = d[e.source][e.target];
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

double point_distance(const MetricGraph& g, const std::vector<std::vector<double>>& vd,
                      const GraphPoint& x, const GraphPoint& y) {
  const Edge& a = g.edge(x.edge);
  const Edge& b = g.edge(y.edge);
  const double ax[2] = {x.xi, a.length - x.xi};
  const double by[2] = {y.xi, b.length - y.xi};
  const int av[2] = {a.source, a.target};
  const int bv[2] = {b.source, b.target};
  double best = x.edge == y.edge ? std::fabs(x.xi - y.xi) : std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) best = std::min(best, ax[i] + vd[av[i]][bv[j]] + by[j]);
  return best;
}

namespace build {

namespace {
std::vector<std::string> numbered(const char* prefix, int n) {
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = prefix + std::to_string(i);
  return ids;
}
}  // namespace

MetricGraph segment(int n_edges, double length) {
  std::vector<Edge> edges;
  for (int i = 0; i < n_edges; ++i) edges.push_back({"e" + std::to_string(i), i, i + 1, length, 1.0});
  return MetricGraph(numbered("v", n_edges + 1), std::move(edges));
}

MetricGraph star(int degree, double length, const std::vector<double>& conductivities) {
  std::vector<Edge> edges;
  for (int i = 0; i < degree; ++i) {
    const double c = conductivities.empty() ? 1.0 : conductivities.at(i);
    edges.push_back({"e" + std::to_string(i), 0, i + 1, length, c});
  }
  auto ids = numbered("v", degree + 1);
  ids[0] = "center";
  return MetricGraph(std::move(ids), std::move(edges));
}

MetricGraph cycle(int n, double length) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({"e" + std::to_string(i), i, (i + 1) % n, length, 1.0});
  return MetricGraph(numbered("v", n), std::move(edges));
}

MetricGraph interval(double length) { return segment(1, length); }

MetricGraph tree(int q, int depth, double length) {
  std::vector<Edge> edges;
  std::vector<int> frontier{0};
  int nv = 1;
  for (int level = 0; level < depth; ++level) {
    std::vector<int> next;
    for (int v : frontier) {
      const int children = (level == 0) ? q : q - 1;
      for (int c = 0; c < children; ++c) {
        edges.push_back({"e" + std::to_string(edges.size()), v, nv, length, 1.0});
        next.push_back(nv++);
      }
    }
    frontier = std::move(next);
  }
  return MetricGraph(numbered("v", nv), std::move(edges));
}

MetricGraph lattice_torus(int n, int dim, double length) {
  if (n < 3) throw InputError("lattice torus needs at least 3 vertices per side");
  int nv = 1;
  for (int k = 0; k < dim; ++k) nv *= n;
  std::vector<Edge> edges;
  for (int v = 0; v < nv; ++v) {
    int stride = 1;
    for (int k = 0; k < dim; ++k) {
      const int coord = (v / stride) % n;
      const int w = v + (((coord + 1) % n) - coord) * stride;
      edges.push_back({"a" + std::to_string(k) + ":" + std::to_string(v), v, w, length, 1.0});
      stride *= n;
    }
  }
  return MetricGraph(numbered("v", nv), std::move(edges));
}

MetricGraph random(std::uint64_t seed, int n_vertices, int n_edges, double lmin, double lmax,
                   double cmin, double cmax) {
  if (n_vertices < 2 || n_edges < n_vertices - 1)
    throw InputError("random graph needs >= 2 vertices and >= n-1 edges");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ulen(lmin, lmax), ucond(cmin, cmax);
  std::vector<Edge> edges;
  auto add = [&](int a, int b) {
    edges.push_back({"e" + std::to_string(edges.size()), a, b, ulen(rng), ucond(rng)});
  };
  for (int v = 1; v < n_vertices; ++v) {
    add(std::uniform_int_distribution<int>(0, v - 1)(rng), v);
  }
  std::uniform_int_distribution<int> uv(0, n_vertices - 1);
  while (static_cast<int>(edges.size()) < n_edges) {
    const int a = uv(rng), b = uv(rng);
    if (a != b) add(a, b);
  }
  return MetricGraph(numbered("v", n_vertices), std::move(edges));
}

}  // namespace build

}  // namespace qgraph
