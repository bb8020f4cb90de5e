#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "twinbridge/cli.hpp"
#include "twinbridge/errors.hpp"
#include "twinbridge/l2b.hpp"

namespace py = pybind11;
using namespace twinbridge;

namespace {

KlEstimatorConfig estimator(const std::string& method, int bins, double smoothing, int k) {
    KlEstimatorConfig c;
    if (method == "histogram") c.method = KlMethod::Histogram;
    else if (method == "knn") c.method = KlMethod::Knn;
    else throw DomainError("method must be 'histogram' or 'knn'");
    c.bins = bins;
    c.smoothing = smoothing;
    c.k = k;
    return c;
}

KernelFamily family(const std::string& name) {
    if (name == "matern25") return KernelFamily::Matern25;
    if (name == "rbf") return KernelFamily::Rbf;
    throw DomainError("family must be 'matern25' or 'rbf'");
}

ExperimentSpec spec_from(const std::map<std::string, std::string>& settings) {
    ExperimentSpec spec;
    for (const auto& [k, v] : settings) apply_setting(spec, k, v);
    spec.validate();
    if (spec.env != EnvKind::Synthetic) throw ConfigError("env", "only the synthetic benchmark is exposed here");
    return spec;
}

py::dict state_dict(const NetworkState& s) {
    py::dict d;
    d["U"] = s.uplink_bw;
    d["D"] = s.downlink_bw;
    d["C"] = s.cpu_ratio;
    d["R"] = s.ram_ratio;
    d["Mu"] = s.mcs_up;
    d["Md"] = s.mcs_down;
    d["F"] = s.traffic;
    return d;
}

py::dict result_dict(const RunResult& r) {
    py::list iters, checkpoints, traffic;
    for (const auto& it : r.iterations) {
        py::dict d;
        d["iter"] = it.iteration;
        d["state"] = state_dict(it.state);
        d["kl"] = it.discrepancy;
        d["cost"] = it.cost;
        d["cumulative_cost"] = it.cumulative_cost;
        d["alpha"] = it.alpha;
        iters.append(d);
    }
    for (const auto& c : r.checkpoints) {
        py::dict d;
        d["queries"] = c.queries;
        d["cumulative_cost"] = c.cumulative_cost;
        d["pre"] = c.pre;
        d["post"] = c.post;
        d["reduction_pct"] = c.reduction_pct();
        checkpoints.append(d);
    }
    for (const auto& t : r.per_traffic) {
        py::dict d;
        d["F"] = t.traffic;
        d["states"] = t.states;
        d["pre"] = t.pre;
        d["post"] = t.post;
        d["reduction_pct"] = t.reduction_pct ? py::cast(*t.reduction_pct) : py::none();
        traffic.append(d);
    }
    py::dict out;
    out["method"] = to_string(r.method);
    out["iterations"] = iters;
    out["checkpoints"] = checkpoints;
    out["per_traffic"] = traffic;
    out["pre_per_state"] = r.pre_per_state;
    out["post_per_state"] = r.post_per_state;
    out["pre"] = r.pre_global;
    out["post"] = r.post_global;
    out["reduction_pct"] = r.reduction_pct();
    out["stop"] = to_string(r.stop);
    return out;
}

}  // namespace

PYBIND11_MODULE(_twinbridge, m) {
    m.doc() = "Sim-to-real gap bridging: surrogate-guided querying and BNN offsets";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<NetworkState>(m, "NetworkState")
        .def(py::init([](int U, int D, double C, double R, int Mu, int Md, int F) {
                 return NetworkState{U, D, C, R, Mu, Md, F};
             }),
             py::arg("U") = 0, py::arg("D") = 0, py::arg("C") = 1.0, py::arg("R") = 1.0, py::arg("Mu") = 0,
             py::arg("Md") = 0, py::arg("F") = 1)
        .def_readwrite("U", &NetworkState::uplink_bw)
        .def_readwrite("D", &NetworkState::downlink_bw)
        .def_readwrite("C", &NetworkState::cpu_ratio)
        .def_readwrite("R", &NetworkState::ram_ratio)
        .def_readwrite("Mu", &NetworkState::mcs_up)
        .def_readwrite("Md", &NetworkState::mcs_down)
        .def_readwrite("F", &NetworkState::traffic)
        .def("is_valid", [](const NetworkState& s) { return is_valid_state(s); })
        .def("normalized", [](const NetworkState& s) {
            const auto z = normalize(s);
            return std::vector<double>(z.begin(), z.end());
        })
        .def("__eq__", [](const NetworkState& a, const NetworkState& b) { return a == b; })
        .def("__hash__", [](const NetworkState& s) { return std::hash<NetworkState>{}(s); })
        .def("__repr__", [](const NetworkState& s) { return to_string(s); });

    m.def("default_grid", [] { return enumerate_state_grid(StateSpace::default_grid()); },
          "All 2304 states of the default grid.");
    m.def("state_cost", [](const NetworkState& s, double base, double per_user, double per_prb) {
              return state_cost(s, CostModelConfig{base, per_user, per_prb});
          },
          py::arg("state"), py::arg("base") = 1.0, py::arg("per_user") = 0.5, py::arg("per_prb") = 1.0);

    m.def("latency_mean", [](const NetworkState& s, const std::string& role, double bias) {
              if (role != "real" && role != "sim") throw DomainError("role must be 'real' or 'sim'");
              return synthetic_latency_mean(s, role == "real" ? Role::Real : Role::Sim, bias);
          },
          py::arg("state"), py::arg("role") = "real", py::arg("bias") = 0.3);
    m.def("sample_latency",
          [](const NetworkState& s, const std::string& role, std::size_t n, std::uint64_t seed, double bias,
             double noise_sigma, double sim_dispersion, std::uint64_t env_seed) {
              if (role != "real" && role != "sim") throw DomainError("role must be 'real' or 'sim'");
              SyntheticEnvConfig c;
              c.role = role == "real" ? Role::Real : Role::Sim;
              c.bias_strength = bias;
              c.noise_sigma = noise_sigma;
              c.sim_dispersion = sim_dispersion;
              c.seed = env_seed;
              c.validate();
              return synthetic_sample(s, c.role, n, seed, c).samples;
          },
          py::arg("state"), py::arg("role") = "real", py::arg("n") = 200, py::arg("seed") = 0,
          py::arg("bias") = 0.3, py::arg("noise_sigma") = 0.25, py::arg("sim_dispersion") = 0.4,
          py::arg("env_seed") = 11);

    m.def("kl_divergence",
          [](const std::vector<double>& p, const std::vector<double>& q, const std::string& method, int bins,
             double smoothing, int k) { return kl_divergence(p, q, estimator(method, bins, smoothing, k)); },
          py::arg("p"), py::arg("q"), py::arg("method") = "histogram", py::arg("bins") = 64,
          py::arg("smoothing") = 1e-3, py::arg("k") = 5, "KL(p || q) in nats from samples.");
    m.def("quantile_levels", &quantile_levels, py::arg("n") = 21, py::arg("lo") = 0.025, py::arg("hi") = 0.975);
    m.def("quantile_residuals",
          [](const std::vector<double>& real, const std::vector<double>& sim, std::vector<double> levels) {
              PerformanceCollection r, s;
              r.samples = real;
              r.source = Source::Real;
              s.samples = sim;
              s.source = Source::Sim;
              if (levels.empty()) levels = quantile_levels();
              return quantile_residuals(r, s, levels);
          },
          py::arg("real"), py::arg("sim"), py::arg("levels") = std::vector<double>{});

    m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("std"), py::arg("best"));
    m.def("cost_aware_ei", &cost_aware_ei, py::arg("ei"), py::arg("cost"), py::arg("alpha"));
    m.def("update_alpha",
          [](const std::vector<double>& history, std::size_t window, double reference_rate, double lo, double hi) {
              AlphaControllerConfig c{window, reference_rate, lo, hi};
              c.validate();
              return update_alpha(history, c);
          },
          py::arg("history"), py::arg("window") = 5, py::arg("reference_rate") = 0.1, py::arg("alpha_min") = 0.5,
          py::arg("alpha_max") = 1.0);

    py::class_<GPModel>(m, "GaussianProcess")
        .def(py::init([](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& fam,
                         double signal_variance, double length_scale, double noise, bool standardize) {
                 return gp_fit(x, y, KernelConfig{family(fam), signal_variance, length_scale}, noise, standardize);
             }),
             py::arg("x"), py::arg("y"), py::arg("family") = "matern25", py::arg("signal_variance") = 1.0,
             py::arg("length_scale") = 0.3, py::arg("noise") = 1e-4, py::arg("standardize") = true)
        .def("predict",
             [](const GPModel& g, const Eigen::MatrixXd& z) {
                 Eigen::VectorXd mean, var;
                 gp_posterior_batch(g, z, mean, var);
                 return std::make_pair(mean, var);
             },
             py::arg("z"), "Posterior mean and variance for each row.")
        .def_property_readonly("log_marginal_likelihood", [](const GPModel& g) { return g.log_marginal_likelihood; })
        .def_property_readonly("jitter", [](const GPModel& g) { return g.jitter; })
        .def_property_readonly("best", &GPModel::best_target);

    m.def("run",
          [](const std::string& method, const std::map<std::string, std::string>& settings) {
              const auto spec = spec_from(settings);
              SyntheticEnvConfig r = spec.synthetic, s = spec.synthetic;
              r.role = Role::Real;
              s.role = Role::Sim;
              const SyntheticEnvironment real(r, spec.run.cost), sim(s, spec.run.cost);
              RunConfig rc = spec.run;
              rc.method = parse_method(method);
              RunResult res;
              {
                  py::gil_scoped_release release;
                  res = run(rc, real, sim);
              }
              return result_dict(res);
          },
          py::arg("method") = "L2B", py::arg("settings") = std::map<std::string, std::string>{},
          "Runs one method on the synthetic benchmark. `settings` takes the experiment-file keys.");
    m.def("spec_keys", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& k : spec_keys()) out.emplace_back(k.key, k.default_value, k.help);
        return out;
    });
}
