#pragma once

// Empirical connectivity and nesting measures accumulated over Monte Carlo
// samples, plus the statistics derived from them.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nodal/nodal_topology.hpp"

namespace nodal {

/// Atom -> count map with total mass.
template <class Key>
class EmpiricalMeasure {
public:
  using key_type = Key;

  void add(const Key& key, std::uint64_t count = 1) {
    if (count == 0) return;
    atoms_[key] += count;
    total_ += count;
  }

  void merge(const EmpiricalMeasure& other) {
    for (const auto& [k, c] : other.atoms_) add(k, c);
  }

  std::uint64_t count(const Key& key) const {
    const auto it = atoms_.find(key);
    return it == atoms_.end() ? 0 : it->second;
  }

  double probability(const Key& key) const {
    return total_ ? static_cast<double>(count(key)) / static_cast<double>(total_) : 0.0;
  }

  const std::map<Key, std::uint64_t>& atoms() const { return atoms_; }
  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

private:
  std::map<Key, std::uint64_t> atoms_;
  std::uint64_t total_ = 0;
};

using ConnectivityMeasure = EmpiricalMeasure<int>;
using TreeMeasure = EmpiricalMeasure<std::string>;

/// Per-sample counts.
struct CountReport {
  std::uint64_t sample_index = 0;
  std::uint64_t seed = 0;
  int dim = 2;
  double window_radius = 0.0;
  double volume = 0.0;                 // Vol(B(R)), or the sphere area
  std::uint64_t n_components = 0;      // closed curves lying entirely in B(R) with countable inside
  std::uint64_t n_components_star = 0; // curves intersecting B(R)
  std::uint64_t n_domains = 0;         // all domains of the sample
  std::uint64_t n_curves = 0;          // all curves, clipped included
  std::uint64_t n_edges = 0;           // non-clipped curves
  std::uint64_t n_counted_domains = 0; // domains entering the connectivity measure
  std::uint64_t connectivity_sum = 0;  // sum of m over those domains
  std::uint64_t degree_sum = 0;        // sum over all domains of forest degree
  bool handshake_ok = true;            // degree_sum == 2 * n_edges and sum m == 2 * n_curves
  bool tree_identity_ok = true;        // boundary-free only: n_domains == n_edges + 1
  std::map<int, double> corrected;       // edge-corrected connectivity weights, full window
  std::map<int, double> corrected_half;  // same over the four half-width quadrants

  friend bool operator==(const CountReport&, const CountReport&) = default;
};

struct SampleMeasures {
  ConnectivityMeasure mu_gamma;
  TreeMeasure mu_x;
  CountReport report;
};

/// Planar window: connectivity of interior domains whose boundary curves all
/// lie in B(R), and tree ends of closed curves lying in B(R) with countable
/// inside. Boundary-free forests count every domain and every curve.
SampleMeasures accumulate(const NestingForest& forest, double window_radius);

/// Largest distance from the origin to the curve, and the smallest.
double curve_max_radius(const NodalCurve& curve);
double curve_min_radius(const NodalCurve& curve);

/// Edge-corrected connectivity weights of the interior domains of a planar
/// forest extracted on a square window of side `window_width`: each domain is
/// weighted by the inverse fraction of translations that keep the bounding box
/// of its outer curve inside the window.
std::map<int, double> edge_corrected_connectivity(const NestingForest& forest, double window_width);

/// Normalized weights summed over reports in sample order.
struct WeightedMeasure {
  std::map<int, double> weight;
  double total = 0.0;

  double probability(int key) const;
};

WeightedMeasure corrected_measure(const std::vector<CountReport>& reports, bool half_window = false);

/// 2 p(W) - p(W/2) atomwise, negative atoms clipped to 0 and renormalized.
WeightedMeasure extrapolated_measure(const std::vector<CountReport>& reports);

struct ConstantEstimate {
  double estimate = 0.0;   // mean of N_C / Vol(B(R))
  double std_error = 0.0;
  double beta_hat = 0.0;   // estimate * (2 pi)^n / omega_n
  double beta_std_error = 0.0;
  std::size_t samples = 0;
};

/// Requires at least two reports sharing one window radius.
ConstantEstimate ns_constant_estimate(const std::vector<CountReport>& reports);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean connectivity over counted domains with a per-sample ratio-estimator
/// standard error.
MeanEstimate mean_connectivity(const std::vector<CountReport>& reports);

/// Half the L1 distance of the normalized measures.
template <class Key>
double discrepancy(const EmpiricalMeasure<Key>& mu, const EmpiricalMeasure<Key>& nu);
double discrepancy(const WeightedMeasure& mu, const WeightedMeasure& nu);

WeightedMeasure to_weighted(const ConnectivityMeasure& mu);

struct TailFit {
  double gamma_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t tail_count = 0;
  int m_min = 0;
};

/// Hurwitz zeta sum_{k >= 0} (q + k)^{-s} for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

/// Discrete power-law maximum likelihood on atoms m >= m_min with a bootstrap
/// standard error. Throws PreconditionError with fewer than 50 tail draws.
TailFit tail_exponent(const ConnectivityMeasure& mu, int m_min, int bootstrap_rounds = 200,
                      std::uint64_t seed = 0);

/// Same fit on a weighted measure; the tail size is the unweighted count
/// `tail_draws` used for the 50-observation floor and for bootstrap draws.
TailFit tail_exponent(const WeightedMeasure& mu, int m_min, std::uint64_t tail_draws, int bootstrap_rounds = 200,
                      std::uint64_t seed = 0);

struct SandwichReport {
  double lower = 0.0;
  double mid = 0.0;
  double upper = 0.0;
  double tolerance = 0.0;
  double lattice_spacing = 0.0;
  bool violated = false;
};

/// Lattice-sum version of the shifted-ball bracketing of N(R). `spacing` is
/// capped at r / 8. The forest's grid should cover B(R + 2r).
SandwichReport sandwich_check(const NestingForest& forest, double r, double R, double spacing);

struct SmallLongReport {
  std::uint64_t countable = 0;
  std::uint64_t n_xi_small = 0;
  std::uint64_t n_D_long = 0;
  double fraction_xi_small = 0.0;
  double fraction_D_long = 0.0;
};

/// Among closed curves lying in B(R) with countable inside: those adjacent to
/// a domain of area < xi, and those of diameter > D.
SmallLongReport small_long_diagnostics(const NestingForest& forest, double xi, double D, double window_radius);

/// Identifies a campaign configuration; accumulators merge only when equal.
struct AccumulatorConfig {
  std::string mode = "plane";
  int dim = 2;
  double alpha = 1.0;
  double window_radius = 0.0;
  double spacing = 0.0;
  double band_edge = 0.0;  // sphere T

  friend bool operator==(const AccumulatorConfig&, const AccumulatorConfig&) = default;
};

struct Accumulator {
  AccumulatorConfig config;
  ConnectivityMeasure mu_gamma;
  TreeMeasure mu_x;
  std::map<std::uint64_t, CountReport> reports;  // by sample index
  std::uint64_t n_xi_small = 0;
  std::uint64_t n_D_long = 0;

  void add(const SampleMeasures& sample);
  std::vector<CountReport> report_list() const;
  friend bool operator==(const Accumulator&, const Accumulator&) = default;
};

/// Atomwise sum. Throws ConfigError on differing configurations or when a
/// sample index appears in both.
Accumulator merge(const Accumulator& a, const Accumulator& b);

/// `key,count,probability` lines under the given header.
template <class Key>
std::string measure_csv(const EmpiricalMeasure<Key>& mu, const std::string& key_column);

}  // namespace nodal
