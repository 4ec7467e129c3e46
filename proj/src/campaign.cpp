#include "nodal/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "nodal/error.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/render.hpp"
#include "nodal/sign_mesh.hpp"
#include "nodal/sphere_ensemble.hpp"
#include "nodal/tree_constructor.hpp"

#ifndef NODAL_VERSION
#define NODAL_VERSION "0.0.0"
#endif

namespace nodal {

const char* const kVersion = NODAL_VERSION;

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Text values become numbers when they parse as one, lists when they contain
// commas, strings otherwise.
Json parse_scalar(const std::string& text) {
  if (text.find(',') != std::string::npos) {
    Json list = Json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) list.push_back(parse_scalar(trim(item)));
    return list;
  }
  try {
    Json j = Json::parse(text);
    if (j.is_number() || j.is_boolean()) return j;
  } catch (const Json::parse_error&) {
  }
  return text;
}

double as_double(const std::string& key, const Json& v) {
  if (v.is_number()) return v.get<double>();
  throw ConfigError("config key '" + key + "' expects a number");
}

std::uint64_t as_count(const std::string& key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("config key '" + key + "' expects a non-negative integer");
}

std::string as_string(const std::string& key, const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ConfigError("config key '" + key + "' expects a string");
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

SpectralParams spectral_params(const RunConfig& config) {
  SpectralParams p;
  p.dim = config.dim;
  p.alpha = config.alpha;
  p.wave_count = config.wave_count;
  p.seed = config.seed;
  return p;
}

SphereEnsembleParams sphere_params(const RunConfig& config) {
  SphereEnsembleParams p;
  p.T = config.T;
  p.alpha = config.alpha;
  p.eta_exponent = config.eta_exponent;
  p.seed = config.seed;
  return p;
}

FieldGrid crop(const FieldGrid& grid, std::size_t x0, std::size_t y0, std::size_t nx, std::size_t ny) {
  FieldGrid out;
  out.spec.spacing = grid.spec.spacing;
  out.spec.origin = grid.position(x0, y0);
  out.spec.dims = {nx, ny};
  out.values.resize(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    std::copy_n(grid.values.begin() + static_cast<std::ptrdiff_t>(grid.index(x0, y0 + iy)), nx,
                out.values.begin() + static_cast<std::ptrdiff_t>(iy * nx));
  }
  return out;
}

Json weights_json(const std::map<int, double>& w) {
  Json j = Json::object();
  for (const auto& [k, v] : w) j[std::to_string(k)] = v;
  return j;
}

std::map<int, double> weights_from(const Json& j) {
  std::map<int, double> out;
  for (const auto& [k, v] : j.items()) out[std::stoi(k)] = v.get<double>();
  return out;
}

Json measure_json(const WeightedMeasure& mu) {
  Json j = Json::object();
  for (const auto& [k, w] : mu.weight) j[std::to_string(k)] = mu.probability(k);
  return j;
}

Json report_json(const CountReport& r) {
  return Json{{"sample_index", r.sample_index},
              {"seed", r.seed},
              {"dim", r.dim},
              {"window_radius", r.window_radius},
              {"volume", r.volume},
              {"n_components", r.n_components},
              {"n_components_star", r.n_components_star},
              {"n_domains", r.n_domains},
              {"n_curves", r.n_curves},
              {"n_edges", r.n_edges},
              {"n_counted_domains", r.n_counted_domains},
              {"connectivity_sum", r.connectivity_sum},
              {"degree_sum", r.degree_sum},
              {"handshake_ok", r.handshake_ok},
              {"tree_identity_ok", r.tree_identity_ok},
              {"corrected", weights_json(r.corrected)},
              {"corrected_half", weights_json(r.corrected_half)}};
}

CountReport report_from(const Json& j) {
  CountReport r;
  r.sample_index = j.at("sample_index").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.dim = j.at("dim").get<int>();
  r.window_radius = j.at("window_radius").get<double>();
  r.volume = j.at("volume").get<double>();
  r.n_components = j.at("n_components").get<std::uint64_t>();
  r.n_components_star = j.at("n_components_star").get<std::uint64_t>();
  r.n_domains = j.at("n_domains").get<std::uint64_t>();
  r.n_curves = j.at("n_curves").get<std::uint64_t>();
  r.n_edges = j.at("n_edges").get<std::uint64_t>();
  r.n_counted_domains = j.at("n_counted_domains").get<std::uint64_t>();
  r.connectivity_sum = j.at("connectivity_sum").get<std::uint64_t>();
  r.degree_sum = j.at("degree_sum").get<std::uint64_t>();
  r.handshake_ok = j.at("handshake_ok").get<bool>();
  r.tree_identity_ok = j.at("tree_identity_ok").get<bool>();
  r.corrected = weights_from(j.at("corrected"));
  r.corrected_half = weights_from(j.at("corrected_half"));
  return r;
}

Json tail_json(const std::function<TailFit()>& fit) {
  try {
    const TailFit t = fit();
    return Json{{"gamma_hat", t.gamma_hat}, {"std_error", t.std_error}, {"tail_count", t.tail_count},
                {"m_min", t.m_min}};
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

std::string reference_path(double alpha) {
#ifdef NODAL_REFERENCE_DIR
  if (alpha == 1.0) return std::string(NODAL_REFERENCE_DIR) + "/mu_gamma_alpha1.csv";
  if (alpha == 0.0) return std::string(NODAL_REFERENCE_DIR) + "/mu_gamma_alpha0.csv";
#else
  (void)alpha;
#endif
  return {};
}

std::string file_digest(const std::string& bytes) { return hex64(fnv1a(bytes)); }

Json manifest_json(const RunConfig& config, const std::vector<std::pair<std::string, std::string>>& files,
                   const std::vector<std::uint64_t>& sample_indices) {
  Json seeds = Json::array();
  for (auto i : sample_indices) seeds.push_back(Json{{"sample_index", i}, {"seed", config.seed}});
  Json list = Json::array();
  for (const auto& [name, bytes] : files) {
    list.push_back(Json{{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", file_digest(bytes)}});
  }
  return Json{{"version", kVersion},
              {"config_hash", config.hash()},
              {"config", config.to_json()},
              {"stream_key", "philox4x32-10 (seed, sample_index, stream_tag)"},
              {"samples", seeds},
              {"files", list}};
}

void write_outputs(const std::string& dir, const RunConfig& config,
                   std::vector<std::pair<std::string, std::string>> files,
                   const std::vector<std::uint64_t>& sample_indices, const Json& timing) {
  fs::create_directories(dir);
  for (const auto& [name, bytes] : files) write_atomic(dir + "/" + name, bytes);
  write_atomic(dir + "/manifest.json", manifest_json(config, files, sample_indices).dump(2) + "\n");
  write_atomic(dir + "/timing.json", timing.dump(2) + "\n");
}

}  // namespace

void RunConfig::set(const std::string& key, const Json& v) {
  if (key == "mode") mode = as_string(key, v);
  else if (key == "dim") dim = static_cast<int>(as_count(key, v));
  else if (key == "alpha") alpha = as_double(key, v);
  else if (key == "R") R = as_double(key, v);
  else if (key == "h") h = as_double(key, v);
  else if (key == "samples") samples = as_count(key, v);
  else if (key == "first_sample") first_sample = as_count(key, v);
  else if (key == "seed") seed = as_count(key, v);
  else if (key == "wave_count") wave_count = as_count(key, v);
  else if (key == "precision") precision = as_string(key, v);
  else if (key == "T") T = as_double(key, v);
  else if (key == "eta_exponent") eta_exponent = as_double(key, v);
  else if (key == "points_per_wavelength") points_per_wavelength = as_double(key, v);
  else if (key == "xi") xi = as_double(key, v);
  else if (key == "D") D = as_double(key, v);
  else if (key == "m_min") m_min = static_cast<int>(as_count(key, v));
  else if (key == "estimator") estimator = as_string(key, v);
  else if (key == "tree") tree = as_string(key, v);
  else if (key == "epsilon" || key == "epsilons") {
    epsilons.clear();
    if (v.is_array()) {
      for (const auto& e : v) epsilons.push_back(as_double(key, e));
    } else {
      epsilons.push_back(as_double(key, v));
    }
  } else if (key == "threads") threads = static_cast<unsigned>(as_count(key, v));
  else if (key == "out") out = as_string(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::load_text(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config JSON: ") + e.what());
    }
    for (const auto& [k, v] : j.items()) set(k, v);
    return;
  }
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    set(trim(line.substr(0, eq)), parse_scalar(trim(line.substr(eq + 1))));
  }
}

void RunConfig::load_file(const std::string& path) { load_text(read_file(path)); }

void RunConfig::validate() const {
  if (mode != "plane" && mode != "sphere" && mode != "construct" && mode != "kacrice") {
    throw ConfigError("mode must be plane, sphere, construct or kacrice");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (precision != "single" && precision != "double") throw ConfigError("precision must be single or double");
  if (estimator != "raw" && estimator != "corrected" && estimator != "extrapolated") {
    throw ConfigError("estimator must be raw, corrected or extrapolated");
  }
  if (threads == 0) throw ConfigError("threads must be at least 1");
  if (mode == "plane" || mode == "kacrice") {
    spectral_params(*this).validate();
    if (!(R > 0.0)) throw ConfigError("R must be positive");
    if (!(h > 0.0)) throw ConfigError("h must be positive");
    if (mode == "plane" && dim != 2) throw ConfigError("plane mode is two-dimensional");
    if (h > std::numbers::pi / 4.0) throw ConfigError("h must not exceed pi/4 at unit wavenumber");
  }
  if (mode == "sphere") {
    if (!(T > 1.0)) throw ConfigError("T must exceed 1");
    if (!(eta_exponent > 0.0 && eta_exponent < 0.5)) throw ConfigError("eta_exponent must lie in (0, 1/2)");
    if (!(points_per_wavelength >= 4.0)) throw ConfigError("points_per_wavelength must be at least 4");
  }
  if (mode == "construct") {
    parse_tree_code(tree);
    if (epsilons.empty()) throw ConfigError("construct mode needs at least one epsilon");
    for (double e : epsilons) {
      if (!(e > 0.0)) throw ConfigError("epsilon must be positive");
    }
  }
  if (m_min < 1) throw ConfigError("m_min must be at least 1");
}

Json RunConfig::to_json() const {
  Json j{{"mode", mode}, {"seed", seed}, {"samples", samples}, {"first_sample", first_sample}};
  if (mode == "plane" || mode == "kacrice") {
    j["dim"] = dim;
    j["alpha"] = alpha;
    j["R"] = R;
    j["h"] = h;
    j["wave_count"] = wave_count;
    j["precision"] = precision;
  }
  if (mode == "sphere") {
    j["alpha"] = alpha;
    j["T"] = T;
    j["eta_exponent"] = eta_exponent;
    j["points_per_wavelength"] = points_per_wavelength;
  }
  if (mode == "plane" || mode == "sphere") {
    j["xi"] = xi;
    j["D"] = D;
    j["m_min"] = m_min;
    j["estimator"] = estimator;
  }
  if (mode == "construct") {
    j["tree"] = tree;
    j["epsilons"] = epsilons;
  }
  return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

AccumulatorConfig accumulator_config(const RunConfig& config) {
  AccumulatorConfig a;
  a.mode = config.mode;
  a.alpha = config.alpha;
  if (config.mode == "sphere") {
    a.band_edge = config.T;
  } else {
    a.dim = config.dim;
    a.window_radius = config.R;
    a.spacing = config.h;
  }
  return a;
}

SampleOutcome run_plane_sample(const RunConfig& config, std::uint64_t sample_index) {
  const auto t0 = Clock::now();
  EvalOptions eo;
  eo.single_precision = config.precision == "single";
  const GridSpec spec = GridSpec::covering_ball(config.R, config.h, 2);
  const FieldGrid grid = eval_field(draw_plane_waves(spectral_params(config), sample_index), spec, false, eo, config.R);
  const NestingForest forest = extract_forest(mesh_from_grid(grid));

  SampleOutcome out;
  out.measures = accumulate(forest, config.R);
  out.measures.report.sample_index = sample_index;
  out.measures.report.seed = config.seed;
  const std::size_t n = spec.dims[0];
  out.measures.report.corrected = edge_corrected_connectivity(forest, config.h * static_cast<double>(n - 1));
  const std::size_t mid = (n - 1) / 2;
  const std::size_t m = mid + 1;
  for (std::size_t qy : {std::size_t{0}, mid}) {
    for (std::size_t qx : {std::size_t{0}, mid}) {
      const NestingForest q = extract_forest(mesh_from_grid(crop(grid, qx, qy, m, m)));
      for (const auto& [k, w] : edge_corrected_connectivity(q, config.h * static_cast<double>(mid))) {
        out.measures.report.corrected_half[k] += w;
      }
    }
  }
  out.small_long = small_long_diagnostics(forest, config.xi, config.D, config.R);
  out.seconds = seconds_since(t0);
  return out;
}

SampleOutcome run_sphere_sample(const RunConfig& config, std::uint64_t sample_index) {
  const auto t0 = Clock::now();
  const SphericalSample sample = draw_spherical(sphere_params(config), sample_index);
  const int lmax = *std::max_element(sample.degrees.begin(), sample.degrees.end());
  const std::size_t n_lat = recommended_latitudes(lmax, config.points_per_wavelength);
  const SphereGrid grid = eval_sphere_grid(sample, n_lat, 2 * (n_lat - 1));
  const NestingForest forest = extract_forest(mesh_from_sphere(grid));
  SampleOutcome out;
  out.measures = accumulate(forest, 0.0);
  out.measures.report.sample_index = sample_index;
  out.measures.report.seed = config.seed;
  // Unit-wavenumber scale: areas and diameters on the sphere of radius T.
  const double t = std::sqrt(static_cast<double>(lmax) * (lmax + 1));
  for (const auto& v : forest.vertices) {
    if (v.area * t * t < config.xi) ++out.small_long.n_xi_small;
  }
  out.small_long.countable = forest.edges.size();
  out.small_long.fraction_xi_small =
      forest.vertices.empty() ? 0.0 : static_cast<double>(out.small_long.n_xi_small) / forest.vertices.size();
  out.seconds = seconds_since(t0);
  return out;
}

CampaignResult run_campaign(const RunConfig& config) {
  config.validate();
  if (config.mode != "plane" && config.mode != "sphere") {
    throw ConfigError("run_campaign handles plane and sphere modes");
  }
  const auto t0 = Clock::now();
  CampaignResult result;
  result.config = config;
  result.accumulator.config = accumulator_config(config);
  if (config.samples == 0) {
    result.warnings.push_back("no samples requested; measures are empty");
    return result;
  }
  const std::size_t n = config.samples;
  std::vector<std::optional<SampleOutcome>> outcomes(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const std::uint64_t index = config.first_sample + i;
      try {
        outcomes[i] = config.mode == "plane" ? run_plane_sample(config, index) : run_sphere_sample(config, index);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config.threads, n));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!outcomes[i]) {
      throw InvariantError("sample " + std::to_string(config.first_sample + i) + ": " + errors[i]);
    }
    result.accumulator.add(outcomes[i]->measures);
    result.accumulator.n_xi_small += outcomes[i]->small_long.n_xi_small;
    result.accumulator.n_D_long += outcomes[i]->small_long.n_D_long;
  }
  result.seconds = seconds_since(t0);
  return result;
}

Json accumulator_to_json(const Accumulator& acc) {
  Json mu_gamma = Json::object();
  for (const auto& [k, c] : acc.mu_gamma.atoms()) mu_gamma[std::to_string(k)] = c;
  Json mu_x = Json::object();
  for (const auto& [k, c] : acc.mu_x.atoms()) mu_x[k] = c;
  Json reports = Json::array();
  for (const auto& [k, r] : acc.reports) reports.push_back(report_json(r));
  return Json{{"config",
               {{"mode", acc.config.mode},
                {"dim", acc.config.dim},
                {"alpha", acc.config.alpha},
                {"window_radius", acc.config.window_radius},
                {"spacing", acc.config.spacing},
                {"band_edge", acc.config.band_edge}}},
              {"mu_gamma", mu_gamma},
              {"mu_x", mu_x},
              {"n_xi_small", acc.n_xi_small},
              {"n_D_long", acc.n_D_long},
              {"reports", reports}};
}

Accumulator accumulator_from_json(const Json& j) {
  Accumulator acc;
  try {
    const auto& c = j.at("config");
    acc.config.mode = c.at("mode").get<std::string>();
    acc.config.dim = c.at("dim").get<int>();
    acc.config.alpha = c.at("alpha").get<double>();
    acc.config.window_radius = c.at("window_radius").get<double>();
    acc.config.spacing = c.at("spacing").get<double>();
    acc.config.band_edge = c.at("band_edge").get<double>();
    for (const auto& [k, v] : j.at("mu_gamma").items()) acc.mu_gamma.add(std::stoi(k), v.get<std::uint64_t>());
    for (const auto& [k, v] : j.at("mu_x").items()) acc.mu_x.add(k, v.get<std::uint64_t>());
    acc.n_xi_small = j.at("n_xi_small").get<std::uint64_t>();
    acc.n_D_long = j.at("n_D_long").get<std::uint64_t>();
    for (const auto& r : j.at("reports")) {
      const CountReport report = report_from(r);
      acc.reports.emplace(report.sample_index, report);
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed state: ") + e.what());
  }
  return acc;
}

Json campaign_summary(const RunConfig& config, const Accumulator& acc, const std::vector<std::string>& warnings) {
  const auto reports = acc.report_list();
  Json s;
  s["config"] = config.to_json();
  s["version"] = kVersion;
  s["n_samples"] = reports.size();

  std::uint64_t domains = 0, curves = 0, edges = 0, counted = 0, components = 0, components_star = 0;
  std::uint64_t handshake_failures = 0, tree_failures = 0;
  for (const auto& r : reports) {
    domains += r.n_domains;
    curves += r.n_curves;
    edges += r.n_edges;
    counted += r.n_counted_domains;
    components += r.n_components;
    components_star += r.n_components_star;
    handshake_failures += r.handshake_ok ? 0 : 1;
    tree_failures += r.tree_identity_ok ? 0 : 1;
  }
  s["counts"] = {{"domains", domains},     {"curves", curves},         {"edges", edges},
                 {"counted_domains", counted}, {"components", components}, {"components_star", components_star}};
  s["identities"] = {{"handshake_failures", handshake_failures},
                     {"tree_identity_failures", tree_failures},
                     {"tree_identity_checked", acc.config.mode == "sphere"}};

  if (reports.size() >= 2) {
    const ConstantEstimate c = ns_constant_estimate(reports);
    s["ns_constant"] = {{"estimate", c.estimate}, {"std_error", c.std_error}, {"beta_hat", c.beta_hat},
                        {"beta_std_error", c.beta_std_error}};
  } else {
    s["ns_constant"] = nullptr;
  }

  if (counted > 0) {
    const MeanEstimate m = mean_connectivity(reports);
    s["mean_connectivity"] = {{"mean", m.mean}, {"std_error", m.std_error},
                              {"at_most_two", m.mean <= 2.0 + 2.0 * m.std_error}};
  } else {
    s["mean_connectivity"] = nullptr;
  }

  const WeightedMeasure raw = to_weighted(acc.mu_gamma);
  const bool planar = acc.config.mode == "plane";
  const WeightedMeasure corrected = planar ? corrected_measure(reports, false) : raw;
  const WeightedMeasure half = planar ? corrected_measure(reports, true) : raw;
  const WeightedMeasure extrapolated = planar ? extrapolated_measure(reports) : raw;
  s["measures"] = {{"raw", measure_json(raw)},
                   {"corrected", measure_json(corrected)},
                   {"corrected_half", measure_json(half)},
                   {"extrapolated", measure_json(extrapolated)}};

  std::uint64_t tail_draws = 0;
  for (const auto& [k, c] : acc.mu_gamma.atoms()) {
    if (k >= config.m_min) tail_draws += c;
  }
  Json tail;
  tail["raw"] = tail_json([&] { return tail_exponent(acc.mu_gamma, config.m_min, 200, config.seed); });
  tail["corrected"] =
      tail_json([&] { return tail_exponent(corrected, config.m_min, tail_draws, 200, config.seed); });
  tail["extrapolated"] =
      tail_json([&] { return tail_exponent(extrapolated, config.m_min, tail_draws, 200, config.seed); });
  const Json& chosen = tail[config.estimator];
  s["gamma_hat"] = chosen.contains("gamma_hat") ? chosen["gamma_hat"] : Json(nullptr);
  s["tail"] = tail;

  Json discrepancies = Json::object();
  const std::string ref = reference_path(config.alpha);
  if (acc.config.dim == 2 && !ref.empty() && fs::exists(ref) && raw.total > 0.0) {
    const ReferenceTable table = load_reference(ref);
    for (const auto& [name, mu] : {std::pair<std::string, const WeightedMeasure*>{"raw", &raw},
                                   {"corrected", &corrected},
                                   {"extrapolated", &extrapolated}}) {
      const ComparisonReport c = compare_to_reference(*mu, table);
      discrepancies[name] = {{"total_variation", c.total_variation},
                             {"max_abs_difference", c.max_abs_difference},
                             {"atom_1", c.atoms.empty() ? 0.0 : c.atoms[0].difference},
                             {"atom_2", c.atoms.size() < 2 ? 0.0 : c.atoms[1].difference},
                             {"pass", c.pass}};
    }
    discrepancies["reference"] = fs::path(ref).filename().string();
  }
  s["discrepancies"] = discrepancies;

  const double countable = static_cast<double>(planar ? components : edges);
  s["diagnostics"] = {{"xi", config.xi},
                      {"D", config.D},
                      {"countable_components", static_cast<std::uint64_t>(countable)},
                      {"n_xi_small", acc.n_xi_small},
                      {"n_D_long", acc.n_D_long},
                      {"fraction_xi_small", countable > 0 ? acc.n_xi_small / countable : 0.0},
                      {"fraction_D_long", countable > 0 ? acc.n_D_long / countable : 0.0}};
  s["warnings"] = warnings;
  return s;
}

std::string samples_csv(const Accumulator& acc) {
  std::string out =
      "sample_index,seed,n_domains,n_curves,n_edges,n_components,n_components_star,n_counted_domains,"
      "connectivity_sum,degree_sum,handshake_ok,tree_identity_ok\n";
  for (const auto& [k, r] : acc.reports) {
    out += std::to_string(r.sample_index) + "," + std::to_string(r.seed) + "," + std::to_string(r.n_domains) + "," +
           std::to_string(r.n_curves) + "," + std::to_string(r.n_edges) + "," + std::to_string(r.n_components) +
           "," + std::to_string(r.n_components_star) + "," + std::to_string(r.n_counted_domains) + "," +
           std::to_string(r.connectivity_sum) + "," + std::to_string(r.degree_sum) + "," +
           (r.handshake_ok ? "1" : "0") + "," + (r.tree_identity_ok ? "1" : "0") + "\n";
  }
  return out;
}

Json write_campaign(const CampaignResult& result) {
  const Json summary = campaign_summary(result.config, result.accumulator, result.warnings);
  std::vector<std::pair<std::string, std::string>> files{
      {"mu_gamma.csv", measure_csv(result.accumulator.mu_gamma, "key")},
      {"mu_x.csv", measure_csv(result.accumulator.mu_x, "code")},
      {"samples.csv", samples_csv(result.accumulator)},
      {"summary.json", summary.dump(2) + "\n"},
      {"state.json", accumulator_to_json(result.accumulator).dump() + "\n"}};
  std::vector<std::uint64_t> indices;
  for (const auto& [k, r] : result.accumulator.reports) indices.push_back(k);
  const Json timing{{"seconds", result.seconds},
                    {"threads", result.config.threads},
                    {"seconds_per_sample", indices.empty() ? 0.0 : result.seconds / indices.size()}};
  write_outputs(result.config.out, result.config, std::move(files), indices, timing);
  return summary;
}

CampaignResult merge_runs(const std::vector<std::string>& dirs, const std::string& out) {
  if (dirs.empty()) throw ConfigError("merge needs at least one run directory");
  CampaignResult result;
  std::optional<Json> base;
  std::uint64_t first = 0, total = 0;
  for (const auto& dir : dirs) {
    Json manifest;
    Json state;
    try {
      manifest = Json::parse(read_file(dir + "/manifest.json"));
      state = Json::parse(read_file(dir + "/state.json"));
    } catch (const Json::parse_error& e) {
      throw IoError(dir + ": " + e.what());
    }
    Json config = manifest.at("config");
    const std::uint64_t f = config.at("first_sample").get<std::uint64_t>();
    const std::uint64_t n = config.at("samples").get<std::uint64_t>();
    first = base ? std::min(first, f) : f;
    total += n;
    config.erase("first_sample");
    config.erase("samples");
    if (base && *base != config) throw ConfigError(dir + ": configuration differs from " + dirs.front());
    if (!base) base = config;
    const Accumulator acc = accumulator_from_json(state);
    result.accumulator = &dir == &dirs.front() ? acc : merge(result.accumulator, acc);
  }
  RunConfig config;
  for (const auto& [k, v] : base->items()) config.set(k, v);
  config.first_sample = first;
  config.samples = total;
  config.out = out;
  result.config = config;
  return result;
}

Json run_kacrice(const RunConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  EvalOptions eo;
  eo.threads = config.threads;
  eo.single_precision = config.precision == "single";
  const SpectralParams params = spectral_params(config);
  const DensityEstimate d = config.dim == 1 ? empirical_zero_density(params, config.R, config.h, config.samples, eo)
                                            : empirical_length_density(params, config.R, config.h, config.samples, eo);
  Json s;
  s["config"] = config.to_json();
  s["version"] = kVersion;
  s["quantity"] = config.dim == 1 ? "zero_density" : "nodal_length_density";
  s["analytic"] = d.analytic;
  s["estimate"] = d.estimate;
  s["std_error"] = d.std_error;
  s["relative_error"] = d.analytic > 0.0 ? std::abs(d.estimate - d.analytic) / d.analytic : 0.0;
  s["samples"] = d.samples;
  s["total_measure"] = d.total_measure;
  if (config.dim == 2) {
    const CriticalPointBound b = critical_point_bound(params, 1.0);
    s["critical_point_bound"] = {{"r", 1.0}, {"moment_ratio", b.moment_ratio}, {"bound", b.bound}};
  }
  std::vector<std::uint64_t> indices;
  for (std::uint64_t i = 0; i < config.samples; ++i) indices.push_back(i);
  write_outputs(config.out, config, {{"summary.json", s.dump(2) + "\n"}}, indices,
                Json{{"seconds", seconds_since(t0)}, {"threads", config.threads}});
  return s;
}

Json run_construct(const RunConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  RealizeOptions options;
  options.epsilons = config.epsilons;
  options.dump_dir = config.out;
  fs::create_directories(config.out);
  const Realization r = realize_and_verify(config.tree, options);
  Json sweep = Json::array();
  for (const auto& step : r.sweep) {
    sweep.push_back(Json{{"epsilon", step.epsilon},
                         {"code", step.code},
                         {"match", step.match},
                         {"signs_ok", step.signs_ok},
                         {"error", step.error}});
  }
  Json s{{"config", config.to_json()},
         {"version", kVersion},
         {"target", r.target},
         {"matched", r.matched},
         {"epsilon", r.matched ? Json(r.epsilon) : Json(nullptr)},
         {"lattice_points", r.pattern.size()},
         {"fit",
          {{"directions", r.fit.directions.size()},
           {"margin", r.fit.margin},
           {"norm", r.fit.norm},
           {"wavenumber", r.fit.wavenumber}}},
         {"sweep", sweep}};
  std::vector<std::pair<std::string, std::string>> files{{"realization.json", s.dump(2) + "\n"},
                                                         {"sign.pgm", pgm_image(r.grid)}};
  try {
    LabelOptions label;
    label.wavenumber = kCheckerboardWavenumber;
    files.emplace_back("curves.svg", svg_image(extract_forest(mesh_from_grid(r.grid), label), r.grid.spec));
  } catch (const Error&) {
  }
  write_outputs(config.out, config, std::move(files), {}, Json{{"seconds", seconds_since(t0)}});
  return s;
}

ReferenceTable load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open reference table " + path);
  ReferenceTable table;
  table.source = path;
  std::string line;
  int prob_col = -1;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
    if (prob_col < 0) {
      const auto it = std::find(cols.begin(), cols.end(), "probability");
      if (cols.empty() || cols.front() != "key" || it == cols.end()) {
        throw ConfigError(path + ": header must be key,probability or key,count,probability");
      }
      prob_col = static_cast<int>(it - cols.begin());
      continue;
    }
    if (static_cast<int>(cols.size()) <= prob_col) throw ConfigError(path + ": short row at line " + std::to_string(number));
    try {
      std::size_t used = 0;
      const int key = std::stoi(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("key");
      const double p = std::stod(cols[static_cast<std::size_t>(prob_col)], &used);
      if (used != cols[static_cast<std::size_t>(prob_col)].size() || p < 0.0 || p > 1.0) {
        throw std::invalid_argument("probability");
      }
      if (!table.probability.emplace(key, p).second) throw std::invalid_argument("duplicate key");
    } catch (const std::exception&) {
      throw ConfigError(path + ": malformed row at line " + std::to_string(number));
    }
  }
  if (table.probability.empty()) throw ConfigError(path + ": no atoms");
  return table;
}

ComparisonReport compare_to_reference(const WeightedMeasure& estimate, const ReferenceTable& reference,
                                      double tolerance) {
  ComparisonReport out;
  out.tolerance = tolerance;
  std::set<int> keys;
  for (const auto& [k, p] : reference.probability) keys.insert(k);
  for (const auto& [k, w] : estimate.weight) keys.insert(k);
  double l1 = 0.0;
  for (int k : keys) {
    const auto it = reference.probability.find(k);
    const double ref = it == reference.probability.end() ? 0.0 : it->second;
    const double est = estimate.probability(k);
    l1 += std::abs(est - ref);
    if (it != reference.probability.end()) {
      out.atoms.push_back({k, ref, est, est - ref});
      out.max_abs_difference = std::max(out.max_abs_difference, std::abs(est - ref));
    }
  }
  out.total_variation = 0.5 * l1;
  out.pass = out.max_abs_difference <= tolerance;
  return out;
}

Json to_json(const ComparisonReport& report) {
  Json atoms = Json::array();
  for (const auto& a : report.atoms) {
    atoms.push_back(Json{{"key", a.key}, {"reference", a.reference}, {"estimate", a.estimate},
                         {"difference", a.difference}});
  }
  return Json{{"atoms", atoms},
              {"total_variation", report.total_variation},
              {"max_abs_difference", report.max_abs_difference},
              {"tolerance", report.tolerance},
              {"pass", report.pass}};
}

WeightedMeasure summary_measure(const Json& summary, const std::string& estimator) {
  WeightedMeasure mu;
  if (!summary.contains("measures") || !summary["measures"].contains(estimator)) {
    throw ConfigError("summary has no measure '" + estimator + "'");
  }
  for (const auto& [k, v] : summary["measures"][estimator].items()) {
    mu.weight[std::stoi(k)] = v.get<double>();
    mu.total += v.get<double>();
  }
  return mu;
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace nodal
