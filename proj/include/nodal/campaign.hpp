#pragma once
// Reproducible Monte Carlo campaigns: configuration, the per-sample pipeline,
// persisted outputs, shard merging and comparison against reference tables.
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "nodal/measures.hpp"
#include "nodal/tree_constructor.hpp"

namespace nodal {

using Json = nlohmann::ordered_json;

extern const char* const kVersion;

struct RunConfig {
  std::string mode = "plane";  // plane | sphere | construct | kacrice
  int dim = 2;
  double alpha = 1.0;
  double R = 60.0;              // window radius (plane), line length / ball radius (kacrice)
  double h = 0.15;              // grid spacing
  std::uint64_t samples = 0;
  std::uint64_t first_sample = 0;
  std::uint64_t seed = 0;
  std::uint64_t wave_count = 2048;
  std::string precision = "single";  // single | double
  double T = 60.0;                   // sphere band edge
  double eta_exponent = 0.4;
  double points_per_wavelength = 8.0;
  double xi = 0.5;   // xi-small area threshold
  double D = 20.0;   // D-long diameter threshold
  int m_min = 3;     // tail-fit cutoff
  std::string estimator = "extrapolated";  // raw | corrected | extrapolated
  std::string tree = "(())";
  std::vector<double> epsilons = dyadic_epsilons();

  // Execution settings; never part of outputs.
  unsigned threads = 1;
  std::string out = "out";

  /// Throws ConfigError for unknown keys or values of the wrong type.
  void set(const std::string& key, const Json& value);
  /// `key = value` lines (# comments) or a JSON object.
  void load_text(const std::string& text);
  void load_file(const std::string& path);
  void validate() const;
  /// Every result-affecting key with its value.
  Json to_json() const;
  std::string hash() const;
};

struct SampleOutcome {
  SampleMeasures measures;
  SmallLongReport small_long;
  double seconds = 0.0;
};

/// One plane sample: field, forest, measures, edge-corrected weights on the
/// full window and on its four quadrants, xi/D diagnostics.
SampleOutcome run_plane_sample(const RunConfig& config, std::uint64_t sample_index);
SampleOutcome run_sphere_sample(const RunConfig& config, std::uint64_t sample_index);

struct CampaignResult {
  RunConfig config;
  Accumulator accumulator;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

AccumulatorConfig accumulator_config(const RunConfig& config);

/// Runs samples first_sample .. first_sample + samples - 1 across
/// config.threads workers; results are accumulated in sample order.
CampaignResult run_campaign(const RunConfig& config);

Json accumulator_to_json(const Accumulator& acc);
Accumulator accumulator_from_json(const Json& j);

/// summary.json contents; a pure function of the configuration and the
/// accumulated state.
Json campaign_summary(const RunConfig& config, const Accumulator& acc, const std::vector<std::string>& warnings);
std::string samples_csv(const Accumulator& acc);

/// Writes mu_gamma.csv, mu_x.csv, samples.csv, summary.json, state.json,
/// manifest.json and timing.json into config.out. Files are written to a
/// temporary name and renamed.
Json write_campaign(const CampaignResult& result);

/// Kac-Rice mode: nodal length (dim 2, ball of radius R) or zero density
/// (dim 1, lines of length R) against the analytic value. Writes
/// summary.json and manifest.json.
Json run_kacrice(const RunConfig& config);

/// Construct mode: realizes config.tree and writes realization.json, sign
/// PGM, curve SVG and manifest.json. Returns the realization record.
Json run_construct(const RunConfig& config);

/// Loads state.json + manifest config from each directory and merges them.
CampaignResult merge_runs(const std::vector<std::string>& dirs, const std::string& out);

struct ReferenceTable {
  std::map<int, double> probability;
  std::string source;
};
/// CSV with `key,probability` or `key,count,probability` columns; lines
/// starting with # are skipped.
ReferenceTable load_reference(const std::string& path);

struct AtomDifference {
  int key = 0;
  double reference = 0.0;
  double estimate = 0.0;
  double difference = 0.0;  // estimate - reference
};

struct ComparisonReport {
  std::vector<AtomDifference> atoms;
  double total_variation = 0.0;
  double max_abs_difference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Per-atom differences over the reference atoms, TV distance over the union
/// of atoms, pass when every reference atom is within tolerance.
ComparisonReport compare_to_reference(const WeightedMeasure& estimate, const ReferenceTable& reference,
                                      double tolerance = 0.01);
Json to_json(const ComparisonReport& report);

/// Measure stored in summary.json under measures.<estimator>.
WeightedMeasure summary_measure(const Json& summary, const std::string& estimator);

/// Writes bytes to path.tmp and renames it over path.
void write_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace nodal
