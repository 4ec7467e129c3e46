// Python bindings. Configurations and results cross the boundary as JSON
// text; the package wrapper turns them into dicts.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nodal/campaign.hpp"
#include "nodal/error.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/sign_mesh.hpp"
#include "nodal/tree_constructor.hpp"

namespace py = pybind11;
using namespace nodal;

namespace {

RunConfig parse_config(const std::string& json) {
  RunConfig c;
  c.load_text(json);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nodal domain statistics of Gaussian random waves";
  m.attr("__version__") = kVersion;

  static py::exception<Error> error(m, "NodalError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("covariance", [](double alpha, double r, int dim) {
        SpectralParams p;
        p.alpha = alpha;
        p.dim = dim;
        return covariance_exact(p, r);
      },
      py::arg("alpha"), py::arg("r"), py::arg("dim") = 2);

  m.def("sample_field",
        [](double alpha, double R, double h, std::uint64_t seed, std::uint64_t sample, std::size_t wave_count) {
          SpectralParams p;
          p.alpha = alpha;
          p.seed = seed;
          p.wave_count = wave_count;
          const auto spec = GridSpec::covering_ball(R, h, 2);
          FieldGrid grid;
          {
            py::gil_scoped_release release;
            grid = eval_field(draw_plane_waves(p, sample), spec, false, {}, R);
          }
          py::array_t<double> out({spec.dims[1], spec.dims[0]});
          std::copy(grid.values.begin(), grid.values.end(), out.mutable_data());
          return out;
        },
        py::arg("alpha") = 1.0, py::arg("R") = 20.0, py::arg("h") = 0.15, py::arg("seed") = 0,
        py::arg("sample") = 0, py::arg("wave_count") = 2048);

  m.def("nesting_codes", [](py::array_t<double, py::array::c_style | py::array::forcecast> values, double h) {
        if (values.ndim() != 2) throw PreconditionError("expected a 2-D array");
        FieldGrid grid;
        grid.spec.spacing = h;
        grid.spec.dims = {static_cast<std::size_t>(values.shape(1)), static_cast<std::size_t>(values.shape(0))};
        grid.spec.origin = {-0.5 * h * static_cast<double>(values.shape(1) - 1),
                            -0.5 * h * static_cast<double>(values.shape(0) - 1)};
        grid.values.assign(values.data(), values.data() + values.size());
        LabelOptions lo;
        lo.allow_coarse = true;
        return subtree_codes(extract_forest(mesh_from_grid(grid), lo));
      },
      py::arg("values"), py::arg("h"));

  m.def("run_campaign_json", [](const std::string& config, bool write) {
        const RunConfig c = parse_config(config);
        CampaignResult result;
        {
          py::gil_scoped_release release;
          result = run_campaign(c);
        }
        const Json s = write ? write_campaign(result) : campaign_summary(c, result.accumulator, result.warnings);
        return s.dump();
      },
      py::arg("config"), py::arg("write") = false);

  m.def("run_kacrice_json", [](const std::string& config) {
        py::gil_scoped_release release;
        return run_kacrice(parse_config(config)).dump();
      });

  m.def("realize_tree", [](const std::string& code) {
        Realization r;
        {
          py::gil_scoped_release release;
          r = realize_and_verify(code);
        }
        py::dict d;
        d["target"] = r.target;
        d["matched"] = r.matched;
        d["epsilon"] = r.epsilon;
        py::list sweep;
        for (const auto& s : r.sweep) {
          sweep.append(py::dict(py::arg("epsilon") = s.epsilon, py::arg("code") = s.code,
                                py::arg("match") = s.match, py::arg("signs_ok") = s.signs_ok));
        }
        d["sweep"] = sweep;
        return d;
      });

  m.def("canonical_code", [](const std::string& code) { return canonical_code(parse_tree_code(code)).code; });
  m.def("all_rooted_trees", &all_rooted_trees, py::arg("n"));

  m.def("discrepancy", [](const std::map<int, double>& mu, const std::map<int, double>& nu) {
        auto weighted = [](const std::map<int, double>& w) {
          WeightedMeasure out;
          for (const auto& [k, v] : w) {
            if (v < 0.0) throw PreconditionError("negative weight");
            out.weight[k] = v;
            out.total += v;
          }
          return out;
        };
        return discrepancy(weighted(mu), weighted(nu));
      });
}
