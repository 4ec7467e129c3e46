#include "nodal/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "geometry.hpp"
#include "nodal/error.hpp"
#include "nodal/rng.hpp"

namespace nodal {

namespace {

double ball_volume(int dim, double r) { return dim == 1 ? 2.0 * r : std::numbers::pi * r * r; }

// Maximizes the concave function f on [lo, hi] by golden-section search.
template <class F>
double golden_max(F&& f, double lo, double hi, double tol = 1e-9) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double power_law_mle(double mean_log, int m_min) {
  auto loglik = [&](double s) { return -s * mean_log - std::log(hurwitz_zeta(s, m_min)); };
  return golden_max(loglik, 1.0001, 10.0);
}

}  // namespace

double curve_max_radius(const NodalCurve& curve) {
  const auto& pts = curve.hull.empty() ? curve.polyline : curve.hull;
  return detail::farthest_distance({0.0, 0.0}, pts);
}

double curve_min_radius(const NodalCurve& curve) {
  return detail::polyline_distance({0.0, 0.0}, curve.polyline, !curve.clipped);
}

SampleMeasures accumulate(const NestingForest& forest, double window_radius) {
  SampleMeasures out;
  auto& rep = out.report;
  rep.n_domains = forest.domain_count();
  rep.n_curves = forest.curves.size();
  rep.n_edges = forest.edges.size();
  const bool closed_surface = !forest.planar;
  rep.dim = 2;
  rep.window_radius = closed_surface ? 0.0 : window_radius;
  rep.volume = closed_surface ? 4.0 * std::numbers::pi : ball_volume(2, window_radius);

  const auto codes = subtree_codes(forest);
  std::vector<std::uint8_t> in_ball(forest.curves.size(), 0);
  for (const auto& c : forest.curves) {
    if (closed_surface) {
      in_ball[c.id] = 1;
      ++rep.n_components_star;
    } else {
      if (curve_min_radius(c) <= window_radius) ++rep.n_components_star;
      in_ball[c.id] = !c.clipped && curve_max_radius(c) < window_radius;
    }
  }
  for (const auto& c : forest.curves) {
    if (!in_ball[c.id] || !is_countable(forest, c.id)) continue;
    ++rep.n_components;
    out.mu_x.add(codes[c.inside]);
  }
  std::uint64_t m_total = 0;
  for (const auto& v : forest.vertices) {
    m_total += static_cast<std::uint64_t>(v.connectivity);
    int degree = 0;
    for (int c : v.curves) degree += forest.curves[c].clipped ? 0 : 1;
    rep.degree_sum += static_cast<std::uint64_t>(degree);
    bool counted = closed_surface || v.interior;
    for (int c : v.curves) counted = counted && in_ball[c];
    if (!counted) continue;
    ++rep.n_counted_domains;
    rep.connectivity_sum += static_cast<std::uint64_t>(v.connectivity);
    out.mu_gamma.add(v.connectivity);
  }
  rep.handshake_ok = rep.degree_sum == 2 * rep.n_edges && m_total == 2 * rep.n_curves;
  rep.tree_identity_ok = !forest.boundary_free || rep.n_domains == rep.n_edges + 1;
  if (rep.n_components == 0 && rep.n_counted_domains == 0) {
    std::fprintf(stderr, "note: sample contributes no countable components\n");
  }
  return out;
}

ConstantEstimate ns_constant_estimate(const std::vector<CountReport>& reports) {
  if (reports.size() < 2) throw PreconditionError("ns_constant_estimate needs at least two reports");
  const double radius = reports.front().window_radius;
  const int dim = reports.front().dim;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& r : reports) {
    if (r.window_radius != radius || r.dim != dim) {
      throw ConfigError("ns_constant_estimate: reports mix window radii or dimensions");
    }
    const double x = static_cast<double>(r.n_components) / r.volume;
    sum += x;
    sum_sq += x * x;
  }
  const double n = static_cast<double>(reports.size());
  ConstantEstimate out;
  out.samples = reports.size();
  out.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  const double omega = dim == 1 ? 2.0 : std::numbers::pi;
  const double scale = std::pow(2.0 * std::numbers::pi, dim) / omega;
  out.beta_hat = out.estimate * scale;
  out.beta_std_error = out.std_error * scale;
  return out;
}

MeanEstimate mean_connectivity(const std::vector<CountReport>& reports) {
  MeanEstimate out;
  double s_total = 0.0, n_total = 0.0;
  for (const auto& r : reports) {
    s_total += static_cast<double>(r.connectivity_sum);
    n_total += static_cast<double>(r.n_counted_domains);
  }
  if (n_total == 0.0) return out;
  out.mean = s_total / n_total;
  const double k = static_cast<double>(reports.size());
  if (k < 2) return out;
  double ss = 0.0;
  for (const auto& r : reports) {
    const double d = static_cast<double>(r.connectivity_sum) - out.mean * static_cast<double>(r.n_counted_domains);
    ss += d * d;
  }
  const double n_bar = n_total / k;
  out.std_error = std::sqrt(ss / (k * (k - 1.0))) / n_bar;
  return out;
}

template <class Key>
double discrepancy(const EmpiricalMeasure<Key>& mu, const EmpiricalMeasure<Key>& nu) {
  if (mu.empty() || nu.empty()) throw PreconditionError("discrepancy of a zero-mass measure");
  std::set<Key> keys;
  for (const auto& [k, c] : mu.atoms()) keys.insert(k);
  for (const auto& [k, c] : nu.atoms()) keys.insert(k);
  double sum = 0.0;
  for (const auto& k : keys) sum += std::abs(mu.probability(k) - nu.probability(k));
  return 0.5 * sum;
}

template double discrepancy(const ConnectivityMeasure&, const ConnectivityMeasure&);
template double discrepancy(const TreeMeasure&, const TreeMeasure&);

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw PreconditionError("hurwitz_zeta requires s > 1 and q > 0");
  // Euler-Maclaurin with N direct terms and Bernoulli corrections.
  constexpr int kDirect = 12;
  static constexpr double kBernoulli[] = {1.0 / 6.0,  -1.0 / 30.0, 1.0 / 42.0,
                                          -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0};
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -s);
  const double a = q + kDirect;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = s;          // s (s+1) ... (s+2j-2)
  double factorial = 2.0;     // (2j)!
  double power = std::pow(a, -s - 1.0);
  for (int j = 1; j <= 6; ++j) {
    sum += kBernoulli[j - 1] / factorial * rising * power;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    power /= a * a;
  }
  return sum;
}

namespace {

// Tail atoms (m, weight); bootstrap resamples `draws` observations from the
// normalized weights.
TailFit fit_tail(const std::vector<std::pair<int, double>>& tail, std::uint64_t draws, int m_min,
                 int bootstrap_rounds, std::uint64_t seed) {
  if (draws < 50) {
    throw PreconditionError("tail_exponent: only " + std::to_string(draws) + " observations with m >= " +
                            std::to_string(m_min) + " (need 50)");
  }
  double mass = 0.0, sum_log = 0.0;
  std::vector<double> cumulative;
  for (const auto& [m, w] : tail) {
    mass += w;
    sum_log += w * std::log(static_cast<double>(m));
    cumulative.push_back(mass);
  }
  TailFit out;
  out.m_min = m_min;
  out.tail_count = draws;
  out.gamma_hat = power_law_mle(sum_log / mass, m_min);
  if (bootstrap_rounds < 2) return out;
  RandomStream stream(seed, 0, StreamTag::kBootstrap);
  double s1 = 0.0, s2 = 0.0;
  for (int b = 0; b < bootstrap_rounds; ++b) {
    double resampled = 0.0;
    for (std::uint64_t i = 0; i < draws; ++i) {
      const double u = stream.uniform() * mass;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      resampled += std::log(static_cast<double>(tail[static_cast<std::size_t>(it - cumulative.begin())].first));
    }
    const double g = power_law_mle(resampled / static_cast<double>(draws), m_min);
    s1 += g;
    s2 += g * g;
  }
  const double rounds = static_cast<double>(bootstrap_rounds);
  const double mean = s1 / rounds;
  out.std_error = std::sqrt(std::max(0.0, (s2 - rounds * mean * mean) / (rounds - 1.0)));
  return out;
}

}  // namespace

TailFit tail_exponent(const ConnectivityMeasure& mu, int m_min, int bootstrap_rounds, std::uint64_t seed) {
  if (m_min < 1) throw PreconditionError("tail_exponent requires m_min >= 1");
  std::vector<std::pair<int, double>> tail;
  std::uint64_t n = 0;
  for (const auto& [m, c] : mu.atoms()) {
    if (m < m_min) continue;
    tail.emplace_back(m, static_cast<double>(c));
    n += c;
  }
  return fit_tail(tail, n, m_min, bootstrap_rounds, seed);
}

TailFit tail_exponent(const WeightedMeasure& mu, int m_min, std::uint64_t tail_draws, int bootstrap_rounds,
                      std::uint64_t seed) {
  if (m_min < 1) throw PreconditionError("tail_exponent requires m_min >= 1");
  std::vector<std::pair<int, double>> tail;
  for (const auto& [m, w] : mu.weight) {
    if (m >= m_min && w > 0.0) tail.emplace_back(m, w);
  }
  if (tail.empty()) tail_draws = 0;
  return fit_tail(tail, tail_draws, m_min, bootstrap_rounds, seed);
}

std::map<int, double> edge_corrected_connectivity(const NestingForest& forest, double window_width) {
  std::map<int, double> out;
  if (!forest.planar) return out;
  for (const auto& v : forest.vertices) {
    if (!v.interior || v.parent_curve < 0) continue;
    const auto& c = forest.curves[v.parent_curve];
    const double free_x = window_width - (c.bbox_max[0] - c.bbox_min[0]);
    const double free_y = window_width - (c.bbox_max[1] - c.bbox_min[1]);
    if (!(free_x > 0.0) || !(free_y > 0.0)) continue;
    out[v.connectivity] += window_width * window_width / (free_x * free_y);
  }
  return out;
}

double WeightedMeasure::probability(int key) const {
  const auto it = weight.find(key);
  return it == weight.end() || total <= 0.0 ? 0.0 : it->second / total;
}

WeightedMeasure corrected_measure(const std::vector<CountReport>& reports, bool half_window) {
  WeightedMeasure out;
  for (const auto& r : reports) {
    for (const auto& [k, w] : half_window ? r.corrected_half : r.corrected) {
      out.weight[k] += w;
      out.total += w;
    }
  }
  return out;
}

WeightedMeasure extrapolated_measure(const std::vector<CountReport>& reports) {
  const auto full = corrected_measure(reports, false);
  const auto half = corrected_measure(reports, true);
  WeightedMeasure out;
  if (full.total <= 0.0) return out;
  if (half.total <= 0.0) return full;
  std::set<int> keys;
  for (const auto& [k, w] : full.weight) keys.insert(k);
  for (const auto& [k, w] : half.weight) keys.insert(k);
  for (int k : keys) {
    const double p = std::max(0.0, 2.0 * full.probability(k) - half.probability(k));
    if (p > 0.0) {
      out.weight[k] = p;
      out.total += p;
    }
  }
  for (auto& [k, w] : out.weight) w /= out.total;
  out.total = 1.0;
  return out;
}

WeightedMeasure to_weighted(const ConnectivityMeasure& mu) {
  WeightedMeasure out;
  for (const auto& [k, c] : mu.atoms()) {
    out.weight[k] = static_cast<double>(c);
    out.total += static_cast<double>(c);
  }
  return out;
}

double discrepancy(const WeightedMeasure& mu, const WeightedMeasure& nu) {
  if (!(mu.total > 0.0) || !(nu.total > 0.0)) throw PreconditionError("discrepancy of a zero-mass measure");
  std::set<int> keys;
  for (const auto& [k, w] : mu.weight) keys.insert(k);
  for (const auto& [k, w] : nu.weight) keys.insert(k);
  double sum = 0.0;
  for (int k : keys) sum += std::abs(mu.probability(k) - nu.probability(k));
  return 0.5 * sum;
}

SandwichReport sandwich_check(const NestingForest& forest, double r, double R, double spacing) {
  if (!(r > 0.0) || !(r < R)) throw PreconditionError("sandwich_check requires 0 < r < R");
  SandwichReport out;
  const double s = std::min(spacing > 0.0 ? spacing : r / 8.0, r / 8.0);
  out.lattice_spacing = s;
  const auto k_max = static_cast<long>(std::floor((R + r) / s));
  const long side = 2 * k_max + 1;
  std::vector<std::uint32_t> inside_count(static_cast<std::size_t>(side * side), 0);
  std::vector<std::uint32_t> touch_count(static_cast<std::size_t>(side * side), 0);
  const double r2 = r * r;
  for (const auto& c : forest.curves) {
    if (c.polyline.empty()) continue;
    const bool countable = !c.clipped && is_countable(forest, c.id);
    if (countable && curve_max_radius(c) < R) out.mid += 1.0;
    const auto& hull = c.hull.empty() ? c.polyline : c.hull;
    const long i0 = std::max(-k_max, static_cast<long>(std::floor((c.bbox_min[0] - r) / s)));
    const long i1 = std::min(k_max, static_cast<long>(std::ceil((c.bbox_max[0] + r) / s)));
    const long j0 = std::max(-k_max, static_cast<long>(std::floor((c.bbox_min[1] - r) / s)));
    const long j1 = std::min(k_max, static_cast<long>(std::ceil((c.bbox_max[1] + r) / s)));
    for (long j = j0; j <= j1; ++j) {
      for (long i = i0; i <= i1; ++i) {
        const Vec2 u{static_cast<double>(i) * s, static_cast<double>(j) * s};
        const double dx = std::max({c.bbox_min[0] - u[0], 0.0, u[0] - c.bbox_max[0]});
        const double dy = std::max({c.bbox_min[1] - u[1], 0.0, u[1] - c.bbox_max[1]});
        if (dx * dx + dy * dy > r2) continue;
        const std::size_t cell = static_cast<std::size_t>((j + k_max) * side + (i + k_max));
        const double far = detail::farthest_distance(u, hull);
        if (far < r) {
          ++touch_count[cell];
          if (countable) ++inside_count[cell];
        } else if (detail::polyline_distance(u, c.polyline, !c.clipped) <= r) {
          ++touch_count[cell];
        }
      }
    }
  }
  const double weight = s * s / ball_volume(2, r);
  std::uint32_t max_count = 1;
  for (long j = -k_max; j <= k_max; ++j) {
    for (long i = -k_max; i <= k_max; ++i) {
      const double rad = std::hypot(static_cast<double>(i) * s, static_cast<double>(j) * s);
      const std::size_t cell = static_cast<std::size_t>((j + k_max) * side + (i + k_max));
      if (rad <= R - r) out.lower += weight * inside_count[cell];
      if (rad <= R + r) out.upper += weight * touch_count[cell];
      max_count = std::max(max_count, touch_count[cell]);
    }
  }
  out.tolerance = weight * max_count;
  out.violated = out.lower > out.mid + out.tolerance || out.mid > out.upper + out.tolerance;
  return out;
}

SmallLongReport small_long_diagnostics(const NestingForest& forest, double xi, double D, double window_radius) {
  SmallLongReport out;
  for (const auto& c : forest.curves) {
    if (c.clipped || !is_countable(forest, c.id)) continue;
    if (forest.planar && curve_max_radius(c) >= window_radius) continue;
    ++out.countable;
    const double a_in = forest.vertices[c.inside].area;
    const double a_out = forest.vertices[c.outside].area;
    if (std::min(a_in, a_out) < xi) ++out.n_xi_small;
    if (c.diameter > D) ++out.n_D_long;
  }
  if (out.countable) {
    out.fraction_xi_small = static_cast<double>(out.n_xi_small) / static_cast<double>(out.countable);
    out.fraction_D_long = static_cast<double>(out.n_D_long) / static_cast<double>(out.countable);
  }
  return out;
}

void Accumulator::add(const SampleMeasures& sample) {
  if (!reports.emplace(sample.report.sample_index, sample.report).second) {
    throw ConfigError("sample " + std::to_string(sample.report.sample_index) + " accumulated twice");
  }
  mu_gamma.merge(sample.mu_gamma);
  mu_x.merge(sample.mu_x);
}

std::vector<CountReport> Accumulator::report_list() const {
  std::vector<CountReport> out;
  out.reserve(reports.size());
  for (const auto& [k, r] : reports) out.push_back(r);
  return out;
}

Accumulator merge(const Accumulator& a, const Accumulator& b) {
  if (!(a.config == b.config)) throw ConfigError("cannot merge accumulators with different configurations");
  Accumulator out = a;
  for (const auto& [k, r] : b.reports) {
    if (!out.reports.emplace(k, r).second) {
      throw ConfigError("sample " + std::to_string(k) + " present in both accumulators");
    }
  }
  out.mu_gamma.merge(b.mu_gamma);
  out.mu_x.merge(b.mu_x);
  out.n_xi_small += b.n_xi_small;
  out.n_D_long += b.n_D_long;
  return out;
}

namespace {

std::string key_text(int k) { return std::to_string(k); }
const std::string& key_text(const std::string& k) { return k; }

}  // namespace

template <class Key>
std::string measure_csv(const EmpiricalMeasure<Key>& mu, const std::string& key_column) {
  std::string out = key_column + ",count,probability\n";
  char buf[64];
  for (const auto& [k, c] : mu.atoms()) {
    std::snprintf(buf, sizeof buf, ",%llu,%.12g\n", static_cast<unsigned long long>(c), mu.probability(k));
    out += key_text(k);
    out += buf;
  }
  return out;
}

template std::string measure_csv(const ConnectivityMeasure&, const std::string&);
template std::string measure_csv(const TreeMeasure&, const std::string&);

}  // namespace nodal
