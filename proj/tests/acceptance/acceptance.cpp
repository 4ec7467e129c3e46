// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.
//
//   acceptance [--criterion N]... [--cache DIR] [--threads N]
//
// The two large planar campaigns are stored under the cache directory and
// reused by later criteria when their configuration hash matches.
#include <boost/math/quadrature/gauss.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nodal/campaign.hpp"
#include "nodal/error.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/rng.hpp"
#include "nodal/sign_mesh.hpp"
#include "nodal/sphere_ensemble.hpp"
#include "nodal/tree_constructor.hpp"

namespace fs = std::filesystem;
using namespace nodal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::string cache = "acceptance_cache";
  unsigned threads = 1;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Published connectivity table values.
constexpr double kAlpha1Atom1 = 0.91171;
constexpr double kAlpha1Atom2 = 0.05143;
constexpr double kAlpha0Atom1 = 0.94473;

RunConfig table_config(double alpha, const Context& ctx) {
  RunConfig c;
  c.mode = "plane";
  c.alpha = alpha;
  c.R = 60.0;
  c.h = 0.15;
  c.seed = alpha == 1.0 ? 101 : 100;
  c.samples = alpha == 1.0 ? 2300 : 3700;
  c.threads = ctx.threads;
  c.out = ctx.cache + (alpha == 1.0 ? "/plane_alpha1" : "/plane_alpha0");
  return c;
}

// Runs the campaign unless the cache already holds it.
Accumulator cached_campaign(const RunConfig& config) {
  try {
    const Json manifest = Json::parse(read_file(config.out + "/manifest.json"));
    if (manifest.at("config_hash").get<std::string>() == config.hash()) {
      return accumulator_from_json(Json::parse(read_file(config.out + "/state.json")));
    }
  } catch (const std::exception&) {
  }
  const auto result = run_campaign(config);
  write_campaign(result);
  return result.accumulator;
}

// ---------------------------------------------------------------------------

Outcome criterion1(const Context& ctx) {
  const auto t0 = Clock::now();
  Outcome out{true, ""};
  for (double alpha : {0.0, 0.5, 1.0}) {
    SpectralParams p;
    p.dim = 1;
    p.alpha = alpha;
    p.seed = 1;
    EvalOptions eo;
    eo.threads = ctx.threads;
    eo.single_precision = true;
    const auto d = empirical_zero_density(p, 1000.0, 0.05, 1000, eo);
    const double exact = (1.0 / std::sqrt(3.0)) * std::sqrt(1.0 + alpha + alpha * alpha) / std::numbers::pi;
    const double rel = std::abs(d.estimate - exact) / exact;
    out.pass = out.pass && rel < 0.01 && d.total_measure >= 1e6;
    out.detail += "alpha=" + fmt("%.1f", alpha) + " rel.err=" + fmt("%.4f%%", 100 * rel) + " ";
  }
  const double secs = since(t0);
  out.pass = out.pass && secs < 60.0;
  out.detail += "runtime " + fmt("%.1fs", secs);
  return out;
}

Outcome table_criterion(double alpha, const Context& ctx) {
  const auto t0 = Clock::now();
  const RunConfig config = table_config(alpha, ctx);
  const Accumulator acc = cached_campaign(config);
  const auto reports = acc.report_list();
  std::uint64_t domains = 0;
  for (const auto& r : reports) domains += r.n_counted_domains;
  const WeightedMeasure mu = extrapolated_measure(reports);
  const double p1 = mu.probability(1), p2 = mu.probability(2);
  Outcome out;
  out.detail = "p(1)=" + fmt("%.5f", p1) + " p(2)=" + fmt("%.5f", p2) + " raw p(1)=" +
               fmt("%.5f", acc.mu_gamma.probability(1)) + " interior domains=" + std::to_string(domains) +
               " samples=" + std::to_string(reports.size()) + " " + fmt("%.0fs", since(t0));
  if (alpha == 1.0) {
    out.pass = std::abs(p1 - kAlpha1Atom1) < 0.01 && std::abs(p2 - kAlpha1Atom2) < 0.01;
  } else {
    out.pass = std::abs(p1 - kAlpha0Atom1) < 0.01;
  }
  out.pass = out.pass && domains >= 100000;
  return out;
}

Outcome criterion4(const Context& ctx) {
  Outcome out{true, ""};
  for (double alpha : {1.0, 0.0}) {
    const Accumulator acc = cached_campaign(table_config(alpha, ctx));
    const auto reports = acc.report_list();
    const WeightedMeasure mu = extrapolated_measure(reports);
    std::uint64_t draws = 0;
    for (const auto& [m, c] : acc.mu_gamma.atoms()) draws += m >= 3 ? c : 0;
    const TailFit fit = tail_exponent(mu, 3, draws, 200, 7);
    const double lo = alpha == 1.0 ? 2.0 : 1.9, hi = alpha == 1.0 ? 2.3 : 2.2;
    out.pass = out.pass && fit.gamma_hat >= lo && fit.gamma_hat <= hi;
    const TailFit raw = tail_exponent(acc.mu_gamma, 3, 0);
    // Same estimator applied to the published table, for context.
    WeightedMeasure table;
    const std::string path = std::string(NODAL_SOURCE_DIR) + "/data/reference/mu_gamma_alpha" +
                             (alpha == 1.0 ? "1" : "0") + ".csv";
    for (const auto& [k, p] : load_reference(path).probability) {
      table.weight[k] = p;
      table.total += p;
    }
    const TailFit ref = tail_exponent(table, 3, 100000, 0);
    out.detail += "alpha=" + fmt("%.0f", alpha) + " gamma=" + fmt("%.3f", fit.gamma_hat) + "+-" +
                  fmt("%.3f", fit.std_error) + " in [" + fmt("%.1f", lo) + "," + fmt("%.1f", hi) + "] (raw " +
                  fmt("%.3f", raw.gamma_hat) + ", tail n=" + std::to_string(draws) + ", largest m=" +
                  std::to_string(acc.mu_gamma.atoms().rbegin()->first) + ", table atoms 1-26 give " +
                  fmt("%.3f", ref.gamma_hat) + ") ";
  }
  return out;
}

Outcome criterion5(const Context& ctx) {
  Outcome out{true, ""};
  std::uint64_t checked = 0, failures = 0;
  for (double alpha : {1.0, 0.0}) {
    const auto reports = cached_campaign(table_config(alpha, ctx)).report_list();
    for (const auto& r : reports) {
      ++checked;
      failures += r.handshake_ok ? 0 : 1;
    }
    const MeanEstimate m = mean_connectivity(reports);
    out.pass = out.pass && m.mean <= 2.0 + 2.0 * m.std_error;
    out.detail += "plane alpha=" + fmt("%.0f", alpha) + " mean m=" + fmt("%.4f", m.mean) + " ";
  }
  RunConfig sphere;
  sphere.mode = "sphere";
  sphere.T = 30.0;
  sphere.samples = 200;
  sphere.seed = 5;
  sphere.threads = ctx.threads;
  const auto s = run_campaign(sphere);
  std::uint64_t tree_failures = 0;
  for (const auto& [k, r] : s.accumulator.reports) {
    ++checked;
    failures += r.handshake_ok ? 0 : 1;
    tree_failures += r.tree_identity_ok && r.n_domains == r.n_edges + 1 ? 0 : 1;
  }
  const MeanEstimate m = mean_connectivity(s.accumulator.report_list());
  out.pass = out.pass && m.mean <= 2.0 + 2.0 * m.std_error && failures == 0 && tree_failures == 0;
  out.detail += "sphere mean m=" + fmt("%.4f", m.mean) + " samples checked=" + std::to_string(checked) +
                " handshake failures=" + std::to_string(failures) +
                " tree identity failures=" + std::to_string(tree_failures);
  return out;
}

Outcome criterion6(const Context& ctx) {
  SpectralParams p;
  p.alpha = 1.0;
  p.seed = 6;
  EvalOptions eo;
  eo.threads = ctx.threads;
  const auto d = empirical_length_density(p, 30.0, 0.1, 100, eo);
  const double exact = 1.0 / (2.0 * std::numbers::sqrt2);
  const double rel = std::abs(d.estimate - exact) / exact;
  return {rel < 0.02, "length/area=" + fmt("%.5f", d.estimate) + " analytic=" + fmt("%.5f", exact) +
                          " rel.err=" + fmt("%.3f%%", 100 * rel)};
}

Outcome criterion7(const Context& ctx) {
  const double R = 20.0, r = R / 4.0;
  SpectralParams p;
  p.seed = 7;
  EvalOptions eo;
  eo.threads = ctx.threads;
  eo.single_precision = true;
  const auto spec = GridSpec::covering_ball(R + 2.0 * r, 0.15, 2);
  int held = 0;
  const int n = 200;
  double worst = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto grid = eval_field(draw_plane_waves(p, static_cast<std::uint64_t>(s)), spec, false, eo, R);
    const auto forest = extract_forest(mesh_from_grid(grid));
    const auto rep = sandwich_check(forest, r, R, r / 8.0);
    held += rep.violated ? 0 : 1;
    const double excess = std::max(rep.lower - rep.mid, rep.mid - rep.upper) / std::max(rep.tolerance, 1e-12);
    worst = std::max(worst, excess);
  }
  return {held >= 198, std::to_string(held) + "/" + std::to_string(n) + " samples bracketed (R=" + fmt("%.0f", R) +
                           ", r=" + fmt("%.0f", r) + "), worst excess/tolerance=" + fmt("%.2f", worst)};
}

Outcome criterion8(const Context& ctx) {
  const auto t0 = Clock::now();
  RunConfig s60;
  s60.mode = "sphere";
  s60.alpha = 1.0;
  s60.T = 60.0;
  s60.samples = 400;
  s60.seed = 8;
  s60.threads = ctx.threads;
  RunConfig s30 = s60;
  s30.T = 30.0;
  const auto a60 = run_campaign(s60).accumulator;
  const auto a30 = run_campaign(s30).accumulator;
  const WeightedMeasure plane = extrapolated_measure(cached_campaign(table_config(1.0, ctx)).report_list());
  const double d = discrepancy(to_weighted(a60.mu_gamma), plane);
  double n60 = 0.0, n30 = 0.0;
  for (const auto& [k, r] : a60.reports) n60 += static_cast<double>(r.n_domains);
  for (const auto& [k, r] : a30.reports) n30 += static_cast<double>(r.n_domains);
  const double ratio = n60 / n30;
  return {d < 0.03 && ratio >= 3.6 && ratio <= 4.4,
          "D(sphere T=60, plane)=" + fmt("%.4f", d) + " count ratio T=60/T=30=" + fmt("%.3f", ratio) +
              " sphere domains=" + std::to_string(a60.mu_gamma.total()) + " " + fmt("%.0fs", since(t0))};
}

Outcome criterion9(const Context&) {
  const auto t0 = Clock::now();
  std::vector<std::string> targets;
  for (int n = 1; n <= 6; ++n) {
    for (const auto& t : all_rooted_trees(n)) targets.push_back(t);
  }
  const std::size_t exhaustive = targets.size();
  std::vector<std::string> pool = all_rooted_trees(7);
  for (const auto& t : all_rooted_trees(8)) pool.push_back(t);
  RandomStream rng(9, 0, StreamTag::kTreeSampling);
  std::set<std::size_t> picked;
  while (picked.size() < 20) picked.insert(static_cast<std::size_t>(rng.below(pool.size())));
  for (auto i : picked) targets.push_back(pool[i]);
  std::size_t matched = 0;
  std::string missed;
  for (const auto& t : targets) {
    bool ok = false;
    try {
      ok = realize_and_verify(t).matched;
    } catch (const Error& e) {
      missed += " " + t + "(" + e.what() + ")";
    }
    matched += ok ? 1 : 0;
    if (!ok) missed += " " + t;
  }
  const double secs = since(t0);
  return {matched == targets.size() && secs < 600.0,
          std::to_string(matched) + "/" + std::to_string(targets.size()) + " trees realized (" +
              std::to_string(exhaustive) + " exhaustive with <= 6 vertices, 20 random with 7-8) " +
              fmt("%.1fs", secs) + (missed.empty() ? "" : " missed:" + missed)};
}

Outcome criterion10(const Context& ctx) {
  const std::string base = ctx.cache + "/determinism";
  fs::remove_all(base);
  auto plane = [&](const std::string& name, unsigned threads, std::uint64_t first, std::uint64_t n) {
    RunConfig c;
    c.mode = "plane";
    c.R = 25.0;
    c.samples = n;
    c.first_sample = first;
    c.seed = 10;
    c.threads = threads;
    c.out = base + "/" + name;
    write_campaign(run_campaign(c));
    return c.out;
  };
  const std::string mono = plane("mono", 1, 0, 8);
  const std::string multi = plane("multi", 4, 0, 8);
  const std::string again = plane("again", 1, 0, 8);
  const std::string a = plane("shard_a", 2, 0, 3);
  const std::string b = plane("shard_b", 1, 3, 5);
  write_campaign(merge_runs({a, b}, base + "/merged"));
  std::string bad;
  int files = 0;
  for (const std::string f : {"mu_gamma.csv", "mu_x.csv", "samples.csv", "summary.json", "state.json", "manifest.json"}) {
    const std::string ref = read_file(mono + "/" + f);
    for (const auto& other : {multi, again, base + "/merged"}) {
      ++files;
      if (read_file(other + "/" + f) != ref) bad += " " + other + "/" + f;
    }
  }
  return {bad.empty(), std::to_string(files) + " file comparisons (1 vs 4 threads, rerun, 2-shard merge)" +
                           (bad.empty() ? ", all byte-identical" : "; differing:" + bad)};
}

// Composite Gauss-Legendre of order 30 in equal panels.
template <class F>
double quad(F f, double a, double b, int panels) {
  double s = 0.0;
  const double w = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    s += boost::math::quadrature::gauss<double, 30>::integrate(f, a + i * w, a + (i + 1) * w);
  }
  return s;
}

double covariance_oracle(double alpha, double r) {
  const double pi = std::numbers::pi;
  auto ring = [&](double rho) {
    return quad([&](double t) { return std::cos(r * rho * std::cos(t)); }, 0.0, 2.0 * pi, 16) / (2.0 * pi);
  };
  if (alpha == 1.0) return ring(1.0);
  return quad([&](double rho) { return rho * ring(rho); }, alpha, 1.0, 8) * 2.0 / (1.0 - alpha * alpha);
}

Outcome criterion11(const Context&) {
  double cov_err = 0.0;
  for (double alpha : {0.0, 0.5, 1.0}) {
    SpectralParams p;
    p.alpha = alpha;
    for (int i = 0; i < 100; ++i) {
      const double r = 0.25 * i;
      cov_err = std::max(cov_err, std::abs(covariance_exact(p, r) - covariance_oracle(alpha, r)));
    }
  }

  SpectralParams p;
  p.wave_count = 128;
  const auto waves = draw_plane_waves(p, 11);
  GridSpec spec;
  spec.origin = {-4.0, -4.0};
  spec.spacing = 0.4;
  spec.dims = {21, 21};
  const auto grid = eval_field(waves, spec, true);
  double grad_err = 0.0;
  const double h = 1e-5;
  for (std::size_t iy = 0; iy < 21; ++iy) {
    for (std::size_t ix = 0; ix < 21; ++ix) {
      const Vec2 x = grid.position(ix, iy);
      const double fx = (eval_point(waves, {x[0] + h, x[1]}) - eval_point(waves, {x[0] - h, x[1]})) / (2 * h);
      const double fy = (eval_point(waves, {x[0], x[1] + h}) - eval_point(waves, {x[0], x[1] - h})) / (2 * h);
      const std::size_t i = grid.index(ix, iy);
      grad_err = std::max(grad_err, std::hypot(grid.grad_x[i] - fx, grid.grad_y[i] - fy) /
                                        std::max(1.0, std::hypot(fx, fy)));
    }
  }

  RandomStream rng(11, 0, StreamTag::kTest);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    ConnectivityMeasure mu, nu;
    for (int i = 0; i < 6; ++i) {
      mu.add(1 + static_cast<int>(rng.below(10)), 1 + rng.below(50));
      nu.add(1 + static_cast<int>(rng.below(10)), 1 + rng.below(50));
    }
    std::vector<int> keys;
    for (int k = 1; k <= 10; ++k) {
      if (mu.count(k) || nu.count(k)) keys.push_back(k);
    }
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << keys.size()); ++mask) {
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (mask >> i & 1u) {
          a += mu.probability(keys[i]);
          b += nu.probability(keys[i]);
        }
      }
      best = std::max(best, std::abs(a - b));
    }
    mismatches += std::abs(discrepancy(mu, nu) - best) < 1e-15 ? 0 : 1;
  }
  return {cov_err < 1e-8 && grad_err < 1e-3 && mismatches == 0,
          "covariance max err=" + fmt("%.2e", cov_err) + " gradient rel err=" + fmt("%.2e", grad_err) +
              " discrepancy mismatches=" + std::to_string(mismatches) + "/500"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  Context ctx;
  ctx.threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--cache", ctx.cache, "directory for cached campaigns");
  app.add_option("--threads", ctx.threads, "worker threads");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int i = 1; i <= 11; ++i) selected.push_back(i);
  }
  fs::create_directories(ctx.cache);

  const std::map<int, std::function<Outcome(const Context&)>> criteria{
      {1, criterion1},
      {2, [](const Context& c) { return table_criterion(1.0, c); }},
      {3, [](const Context& c) { return table_criterion(0.0, c); }},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, criterion10},
      {11, criterion11},
  };
  bool all = true;
  for (int id : selected) {
    Outcome o;
    try {
      o = criteria.at(id)(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
