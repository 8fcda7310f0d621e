#pragma once

// Walsh Brownian motion on a metric graph: 1-D Brownian motion along edges,
// re-entry into edge e with probability c(e)/c(v) at a vertex.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

enum class GeneratorScale {
  delta,       // generator Delta: variance 2 per unit time
  half_delta,  // generator Delta / 2: variance 1 per unit time
};

struct WalkConfig {
  double t = 1.0;
  double dt = 1e-3;
  GeneratorScale scale = GeneratorScale::delta;
  std::uint64_t seed = 0;
  int n = 1;
  int workers = 0;
  /// Resample the edge when the bridge between two in-edge positions touched a vertex.
  bool touch_correction = true;

  void validate() const;
  [[nodiscard]] double variance_rate() const { return scale == GeneratorScale::delta ? 2.0 : 1.0; }
};

struct TrajectoryPoint {
  double time = 0;
  GraphPoint point;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double potential_integral = 0;  // trapezoid along steps
};

/// Per-trajectory stream derived from (seed, index) only.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index);

/// Called for every straight piece of motion: along `edge` from xi0 to xi1.
using SegmentObserver = std::function<void(int edge, double xi0, double xi1)>;

class Walker {
 public:
  Walker(const MetricGraph& g, GraphPoint start);

  [[nodiscard]] const GraphPoint& position() const { return pos_; }
  /// One step of length dt with the given variance rate.
  void step(double dt, double variance_rate, std::mt19937_64& rng, bool touch_correction,
            const SegmentObserver& observe = {});
  /// Count of vertex passages so far.
  [[nodiscard]] std::uint64_t passages() const { return passages_; }

 private:
  void move(double signed_distance, std::mt19937_64& rng, const SegmentObserver& observe);
  DirectedEdge scatter(int v, std::mt19937_64& rng);
  /// Vertex at the given end (0: source, 1: target) if xi sits exactly there.
  const MetricGraph* g_;
  GraphPoint pos_;
  std::uint64_t passages_ = 0;
};

/// Potential as a function on the graph.
using GraphFunction = std::function<double(int edge, double xi)>;

/// Simulates cfg.n trajectories; `record` keeps every step.
std::vector<Trajectory> simulate_bm(const MetricGraph& g, const GraphPoint& start, const WalkConfig& cfg,
                                    bool record = true, const GraphFunction& V = {});

struct MonteCarloEstimate {
  double estimate = 0;
  double se = 0;
  int n = 0;
};

/// E^x[f(X_t) exp(-int_0^t V(X_s) ds)] with its standard error.
MonteCarloEstimate feynman_kac(const MetricGraph& g, const GraphPoint& start, const GraphFunction& V,
                               const GraphFunction& f, const WalkConfig& cfg);
MonteCarloEstimate feynman_kac(const MetricGraph& g, const GraphPoint& start, const EdgeFunction& V,
                               const EdgeFunction& f, const WalkConfig& cfg);

struct ScatteringReport {
  int vertex = 0;
  std::vector<int> edges;
  std::vector<double> expected;   // c(e)/c(v)
  std::vector<double> observed;   // empirical frequencies
  std::vector<double> se;         // binomial standard errors under the expected law
  double chi2 = 0;
  double p_value = 1;
  double max_z = 0;               // max |observed - expected| / se
};

/// First edge chosen by n walkers started at vertex v (one short step each).
ScatteringReport vertex_scattering(const MetricGraph& g, int v, int n, std::uint64_t seed);

struct MartingaleReport {
  double t = 0;
  std::vector<double> mean_displacement;  // E[B_t - B_0] per axis
  std::vector<double> se_displacement;
  double compensated = 0;                 // E[|B_t|^2 - k t], k = variance rate
  double compensated_se = 0;
  double start_norm2 = 0;                 // |B_0|^2
  bool pass = false;                      // all within 3 SE
};

/// Martingale checks for B_t and |B_t|^2 - k t on the unit lattice torus (as built by
/// build::lattice_torus); positions are unwrapped to R^dim.
MartingaleReport martingale_audit(const MetricGraph& lattice, int start_vertex, const WalkConfig& cfg);

struct EnvelopeFit {
  double log_c = 0, c2 = 0, c3 = 0;
  double exponent = 0;  // q in d^q / t^{q - 1}
  double rms = 0;
};

struct KernelEstimateReport {
  int m = 1;
  EnvelopeFit fit;                 // on the fitting graph, q = 2m/(2m-1)
  EnvelopeFit linear_fit;          // same data, q = 1
  double worst_margin_fit = 0;     // min over fit data of log envelope - log |K| (>= 0)
  double worst_margin_check = 0;   // same on the check graph with c2/2
  bool envelope_holds = false;
  double schrodinger_ratio = 0;    // max |e^{-tH}(x,y)| / (|e^{t Delta}(x,y)|^{1/2} t^{-1/4} e^{t V+})
};

/// Fits C t^{-1/(2m)} exp(-c2 d^q / t^{q-1} + c3 t) as an upper envelope of the kernel
/// on `fit_graph` and verifies it (with c2/2) on `check_graph`.
KernelEstimateReport kernel_estimate_audit(const MetricGraph& fit_graph, const MetricGraph& check_graph,
                                           int m, const std::vector<double>& t_grid,
                                           const GraphFunction& V = {});

}  // namespace qgraph
