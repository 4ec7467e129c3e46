// nodal-atlas: command-line driver for sampling campaigns, tree realization,
// Kac-Rice checks, rendering and reference comparison.
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nodal/campaign.hpp"
#include "nodal/error.hpp"
#include "nodal/render.hpp"
#include "nodal/sign_mesh.hpp"
#include "nodal/sphere_ensemble.hpp"

namespace fs = std::filesystem;
using nodal::Json;

namespace {

// Flags shared by the run modes. Each one that is given overrides the
// config file.
struct Flags {
  std::string config_file;
  std::vector<std::function<void(nodal::RunConfig&)>> apply;

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<std::optional<T>>();
    app->add_option(flag, *value, help);
    apply.push_back([value, key](nodal::RunConfig& c) {
      if (*value) c.set(key, Json(**value));
    });
  }

  nodal::RunConfig build(const std::string& mode) const {
    nodal::RunConfig c;
    c.mode = mode;
    if (!config_file.empty()) c.load_file(config_file);
    c.mode = mode;
    for (const auto& f : apply) f(c);
    return c;
  }
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "key=value or JSON config file")->check(CLI::ExistingFile);
  f.add<std::uint64_t>(app, "--seed", "seed", "master seed");
  f.add<std::uint64_t>(app, "--samples", "samples", "number of samples");
  f.add<std::uint64_t>(app, "--first-sample", "first_sample", "index of the first sample (sharding)");
  f.add<unsigned>(app, "--threads", "threads", "worker threads");
  f.add<std::string>(app, "--out", "out", "output directory");
  f.add<double>(app, "--alpha", "alpha", "inner radius of the spectral annulus");
}

void add_plane(CLI::App* app, Flags& f) {
  f.add<double>(app, "--R", "R", "window radius");
  f.add<double>(app, "--h", "h", "grid spacing");
  f.add<std::uint64_t>(app, "--waves", "wave_count", "plane waves per sample");
  f.add<std::string>(app, "--precision", "precision", "single or double");
}

void add_measures(CLI::App* app, Flags& f) {
  f.add<double>(app, "--xi", "xi", "xi-small area threshold");
  f.add<double>(app, "--D", "D", "D-long diameter threshold");
  f.add<int>(app, "--m-min", "m_min", "tail-fit cutoff");
  f.add<std::string>(app, "--estimator", "estimator", "raw, corrected or extrapolated");
}

void add_sphere(CLI::App* app, Flags& f) {
  f.add<double>(app, "--T", "T", "band edge");
  f.add<double>(app, "--eta-exponent", "eta_exponent", "window exponent for alpha = 1");
  f.add<double>(app, "--ppw", "points_per_wavelength", "grid points per wavelength");
}

void print_summary(const Json& s) {
  std::printf("samples %llu  domains %llu\n", static_cast<unsigned long long>(s["n_samples"].get<std::uint64_t>()),
              static_cast<unsigned long long>(s["counts"]["domains"].get<std::uint64_t>()));
  if (!s["ns_constant"].is_null()) {
    std::printf("nodal components per area %.6g +- %.2g\n", s["ns_constant"]["estimate"].get<double>(),
                s["ns_constant"]["std_error"].get<double>());
  }
  if (!s["mean_connectivity"].is_null()) {
    std::printf("mean connectivity %.5f +- %.5f\n", s["mean_connectivity"]["mean"].get<double>(),
                s["mean_connectivity"]["std_error"].get<double>());
  }
  for (const char* name : {"raw", "corrected", "extrapolated"}) {
    const auto& m = s["measures"][name];
    std::printf("%-13s p(1) %.5f  p(2) %.5f\n", name, m.value("1", 0.0), m.value("2", 0.0));
  }
  if (!s["gamma_hat"].is_null()) std::printf("gamma_hat %.4f\n", s["gamma_hat"].get<double>());
  for (const auto& w : s["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
}

int fail(const std::string& out, const std::string& kind, const std::string& message) {
  const Json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << "\n";
  if (!out.empty()) {
    try {
      fs::create_directories(out);
      nodal::write_atomic(out + "/error.json", record.dump(2) + "\n");
    } catch (const std::exception&) {
    }
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal domain statistics of Gaussian random waves"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  Flags plane_flags, sphere_flags, construct_flags, kacrice_flags, render_flags;

  auto* plane = app.add_subcommand("plane", "Monte Carlo campaign for planar random waves");
  add_common(plane, plane_flags);
  add_plane(plane, plane_flags);
  add_measures(plane, plane_flags);

  auto* sphere = app.add_subcommand("sphere", "Monte Carlo campaign for band-limited sphere ensembles");
  add_common(sphere, sphere_flags);
  add_sphere(sphere, sphere_flags);
  add_measures(sphere, sphere_flags);

  auto* construct = app.add_subcommand("construct", "realize a rooted tree as a nesting end");
  add_common(construct, construct_flags);
  construct_flags.add<std::string>(construct, "--tree", "tree", "parenthesis code of the target tree");
  construct_flags.add<std::vector<double>>(construct, "--epsilon", "epsilons", "perturbation sizes to sweep");

  auto* kacrice = app.add_subcommand("kacrice", "empirical zero / nodal-length density");
  add_common(kacrice, kacrice_flags);
  add_plane(kacrice, kacrice_flags);
  kacrice_flags.add<int>(kacrice, "--dim", "dim", "1 or 2");

  auto* render = app.add_subcommand("render", "PGM and SVG images of one sample");
  std::string render_source = "plane";
  std::uint64_t render_sample = 0;
  render->add_option("--source", render_source, "plane or sphere")->check(CLI::IsMember({"plane", "sphere"}));
  render->add_option("--sample", render_sample, "sample index");
  add_common(render, render_flags);
  add_plane(render, render_flags);
  add_sphere(render, render_flags);

  auto* compare = app.add_subcommand("compare", "compare a measure with a reference table");
  std::string cmp_summary, cmp_reference, cmp_estimator = "extrapolated", cmp_out;
  double cmp_tolerance = 0.01;
  compare->add_option("--summary", cmp_summary, "summary.json or key,count,probability CSV")->required();
  compare->add_option("--reference", cmp_reference, "reference CSV")->required();
  compare->add_option("--estimator", cmp_estimator, "measure inside summary.json");
  compare->add_option("--tolerance", cmp_tolerance, "per-atom tolerance");
  compare->add_option("--out", cmp_out, "directory for comparison.json");

  auto* merge = app.add_subcommand("merge", "merge shard run directories");
  std::vector<std::string> merge_dirs;
  std::string merge_out = "merged";
  merge->add_option("dirs", merge_dirs, "shard directories")->required();
  merge->add_option("--out", merge_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  std::string out;
  try {
    if (*plane || *sphere) {
      const nodal::RunConfig config = *plane ? plane_flags.build("plane") : sphere_flags.build("sphere");
      out = config.out;
      const auto result = nodal::run_campaign(config);
      print_summary(nodal::write_campaign(result));
    } else if (*construct) {
      const nodal::RunConfig config = construct_flags.build("construct");
      out = config.out;
      const Json r = nodal::run_construct(config);
      std::printf("target %s  matched %s", r["target"].get<std::string>().c_str(), r["matched"].get<bool>() ? "yes" : "no");
      if (r["matched"].get<bool>()) std::printf("  epsilon %g", r["epsilon"].get<double>());
      std::printf("\n");
      return r["matched"].get<bool>() ? 0 : 1;
    } else if (*kacrice) {
      const nodal::RunConfig config = kacrice_flags.build("kacrice");
      out = config.out;
      const Json s = nodal::run_kacrice(config);
      std::printf("%s analytic %.6f estimate %.6f +- %.2g (relative error %.3g%%)\n",
                  s["quantity"].get<std::string>().c_str(), s["analytic"].get<double>(), s["estimate"].get<double>(),
                  s["std_error"].get<double>(), 100.0 * s["relative_error"].get<double>());
    } else if (*render) {
      nodal::RunConfig config = render_flags.build(render_source);
      out = config.out;
      config.validate();
      fs::create_directories(out);
      if (render_source == "plane") {
        nodal::SpectralParams p;
        p.alpha = config.alpha;
        p.wave_count = config.wave_count;
        p.seed = config.seed;
        const auto spec = nodal::GridSpec::covering_ball(config.R, config.h, 2);
        const auto grid = nodal::eval_field(nodal::draw_plane_waves(p, render_sample), spec, false, {}, config.R);
        nodal::write_file(out + "/sign.pgm", nodal::pgm_image(grid, nodal::PgmMode::kSign));
        nodal::write_file(out + "/intensity.pgm", nodal::pgm_image(grid, nodal::PgmMode::kIntensity));
        nodal::write_file(out + "/curves.svg",
                          nodal::svg_image(nodal::extract_forest(nodal::mesh_from_grid(grid)), spec));
      } else {
        nodal::SphereEnsembleParams p;
        p.T = config.T;
        p.alpha = config.alpha;
        p.eta_exponent = config.eta_exponent;
        p.seed = config.seed;
        const auto sample = nodal::draw_spherical(p, render_sample);
        const auto n_lat = nodal::recommended_latitudes(sample.degrees.back(), config.points_per_wavelength);
        const auto grid = nodal::eval_sphere_grid(sample, n_lat, 2 * (n_lat - 1));
        nodal::write_file(out + "/sign.pgm", nodal::pgm_image(grid, nodal::PgmMode::kSign));
        nodal::write_file(out + "/intensity.pgm", nodal::pgm_image(grid, nodal::PgmMode::kIntensity));
      }
      std::printf("wrote images to %s\n", out.c_str());
    } else if (*compare) {
      out = cmp_out;
      nodal::WeightedMeasure mu;
      if (fs::path(cmp_summary).extension() == ".json") {
        mu = nodal::summary_measure(Json::parse(nodal::read_file(cmp_summary)), cmp_estimator);
      } else {
        for (const auto& [k, p] : nodal::load_reference(cmp_summary).probability) {
          mu.weight[k] = p;
          mu.total += p;
        }
      }
      const auto report = nodal::compare_to_reference(mu, nodal::load_reference(cmp_reference), cmp_tolerance);
      std::printf("%4s %10s %10s %10s\n", "m", "reference", "estimate", "diff");
      for (const auto& a : report.atoms) {
        std::printf("%4d %10.5f %10.5f %+10.5f\n", a.key, a.reference, a.estimate, a.difference);
      }
      std::printf("TV %.5f  max |diff| %.5f  %s\n", report.total_variation, report.max_abs_difference,
                  report.pass ? "PASS" : "FAIL");
      if (!cmp_out.empty()) {
        fs::create_directories(cmp_out);
        nodal::write_atomic(cmp_out + "/comparison.json", nodal::to_json(report).dump(2) + "\n");
      }
      return report.pass ? 0 : 1;
    } else if (*merge) {
      out = merge_out;
      const auto result = nodal::merge_runs(merge_dirs, merge_out);
      print_summary(nodal::write_campaign(result));
    }
  } catch (const nodal::Error& e) {
    return fail(out, e.kind(), e.what());
  } catch (const Json::exception& e) {
    return fail(out, "io", e.what());
  } catch (const std::exception& e) {
    return fail(out, "internal", e.what());
  }
  return 0;
}
