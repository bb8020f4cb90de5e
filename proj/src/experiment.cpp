#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "text_io.hpp"
#include "twinbridge/cli.hpp"
#include "twinbridge/errors.hpp"

namespace twinbridge {

namespace {

using Setter = std::function<void(ExperimentSpec&, std::string_view)>;

struct KeyEntry {
    SpecKey doc;
    Setter set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const std::string& want) {
    throw ConfigError(std::string(key), "expected " + want + ", got '" + std::string(value) + "'");
}

double as_real(std::string_view key, std::string_view v) {
    const auto d = io::parse_double(v);
    if (!d || !std::isfinite(*d)) bad_value(key, v, "a number");
    return *d;
}

double as_positive(std::string_view key, std::string_view v) {
    const double d = as_real(key, v);
    if (!(d > 0.0)) bad_value(key, v, "a positive number");
    return d;
}

std::uint64_t as_uint(std::string_view key, std::string_view v) {
    v = io::trim(v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, v, "a non-negative integer");
    }
    return out;
}

std::size_t as_count(std::string_view key, std::string_view v) {
    const auto n = as_uint(key, v);
    if (n == 0) bad_value(key, v, "a positive integer");
    return static_cast<std::size_t>(n);
}

bool as_bool(std::string_view key, std::string_view v) {
    v = io::trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "true or false");
}

std::string lower(std::string_view v) {
    std::string s(io::trim(v));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

GridAxis as_axis(std::string_view key, std::string_view v) {
    const auto parts = io::split(v, ':');
    if (parts.size() != 3) bad_value(key, v, "lower:upper:stride");
    return {as_real(key, parts[0]), as_real(key, parts[1]), as_positive(key, parts[2])};
}

std::string axis_text(const GridAxis& a) {
    return io::format_double(a.lower) + ":" + io::format_double(a.upper) + ":" + io::format_double(a.stride);
}

std::vector<Method> as_methods(std::string_view key, std::string_view v) {
    std::vector<Method> out;
    for (auto part : io::split(v, ',')) {
        part = io::trim(part);
        if (part.empty()) continue;
        try {
            const auto m = parse_method(part);
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        } catch (const DomainError&) {
            bad_value(key, part, "one of L2B, L2B-Lite, GS, Random");
        }
    }
    if (out.empty()) bad_value(key, v, "at least one method");
    return out;
}

std::vector<KeyEntry> build_table() {
    std::vector<KeyEntry> t;
    auto add = [&](std::string key, std::string def, std::string help, Setter set) {
        t.push_back({{std::move(key), std::move(def), std::move(help)}, std::move(set)});
    };

    add("env", "synthetic", "synthetic or dataset", [](ExperimentSpec& s, std::string_view v) {
        const auto l = lower(v);
        if (l == "synthetic") s.env = EnvKind::Synthetic;
        else if (l == "dataset") s.env = EnvKind::Dataset;
        else bad_value("env", v, "synthetic or dataset");
    });
    add("dataset_path", "", "CSV replayed when env = dataset",
        [](ExperimentSpec& s, std::string_view v) { s.dataset_path = std::string(io::trim(v)); });
    add("bias_strength", "0.3", "simulator bias b (0 makes the pair identical in mean)",
        [](ExperimentSpec& s, std::string_view v) { s.synthetic.bias_strength = as_real("bias_strength", v); });
    add("noise_sigma", "0.25", "real log-latency sigma",
        [](ExperimentSpec& s, std::string_view v) { s.synthetic.noise_sigma = as_positive("noise_sigma", v); });
    add("sim_dispersion", "0.4", "simulator sigma as a fraction of noise_sigma",
        [](ExperimentSpec& s, std::string_view v) { s.synthetic.sim_dispersion = as_positive("sim_dispersion", v); });
    add("env_seed", "11", "seed of the synthetic noise streams",
        [](ExperimentSpec& s, std::string_view v) { s.synthetic.seed = as_uint("env_seed", v); });

    const auto grid = StateSpace::default_grid();
    for (std::size_t i = 0; i < kStateDims; ++i) {
        const std::string key = std::string("grid.") + kStateFieldNames[i];
        add(key, axis_text(grid.axes[i]), "lower:upper:stride of the state axis",
            [i, key](ExperimentSpec& s, std::string_view v) { s.run.space.axes[i] = as_axis(key, v); });
    }
    add("grid_cap", "1000000", "refuse grids larger than this",
        [](ExperimentSpec& s, std::string_view v) { s.run.space.max_cardinality = as_count("grid_cap", v); });

    add("cost.base", "1", "cost = base + per_user F + per_prb (U + D) / 100",
        [](ExperimentSpec& s, std::string_view v) { s.run.cost.base_cost = as_real("cost.base", v); });
    add("cost.per_user", "0.5", "cost per unit of traffic load F",
        [](ExperimentSpec& s, std::string_view v) { s.run.cost.per_user_cost = as_real("cost.per_user", v); });
    add("cost.per_prb", "1", "cost per 100 PRBs of uplink plus downlink",
        [](ExperimentSpec& s, std::string_view v) { s.run.cost.per_prb_cost = as_real("cost.per_prb", v); });

    add("budget", "2000", "maximum cumulative querying cost",
        [](ExperimentSpec& s, std::string_view v) { s.run.budget.max_cumulative_cost = as_positive("budget", v); });
    add("batch_size", "10", "queries per bridging stage",
        [](ExperimentSpec& s, std::string_view v) { s.run.budget.batch_size = as_count("batch_size", v); });
    add("max_queries", "0", "stop after this many queries (0 = budget only)",
        [](ExperimentSpec& s, std::string_view v) { s.run.max_queries = as_uint("max_queries", v); });
    add("methods", "L2B,L2B-Lite,GS,Random", "methods to run, comma separated",
        [](ExperimentSpec& s, std::string_view v) { s.methods = as_methods("methods", v); });
    add("seed", "1", "run seed (eval states, candidates, training)",
        [](ExperimentSpec& s, std::string_view v) { s.run.seed = as_uint("seed", v); });

    add("eval_states", "256", "evaluation states drawn from the grid",
        [](ExperimentSpec& s, std::string_view v) { s.run.eval_state_count = as_count("eval_states", v); });
    add("eval_samples", "1000", "samples per source per evaluation state",
        [](ExperimentSpec& s, std::string_view v) { s.run.eval_samples = as_count("eval_samples", v); });
    add("samples_per_query", "200", "samples per source per queried state",
        [](ExperimentSpec& s, std::string_view v) { s.run.samples_per_query = as_count("samples_per_query", v); });
    add("alpha_eval_states", "64", "eval states feeding the alpha controller",
        [](ExperimentSpec& s, std::string_view v) { s.run.alpha_eval_states = as_count("alpha_eval_states", v); });
    add("alpha_eval_samples", "200", "samples per source for the alpha controller",
        [](ExperimentSpec& s, std::string_view v) { s.run.alpha_eval_samples = as_count("alpha_eval_samples", v); });
    add("checkpoint_percent", "5", "evaluate every this share of the grid",
        [](ExperimentSpec& s, std::string_view v) { s.run.checkpoint_percent = as_positive("checkpoint_percent", v); });
    add("candidate_pool", "1024", "candidates scored per query",
        [](ExperimentSpec& s, std::string_view v) { s.run.candidate_pool = as_count("candidate_pool", v); });

    add("kernel.family", "matern25", "matern25 or rbf", [](ExperimentSpec& s, std::string_view v) {
        const auto l = lower(v);
        if (l == "matern25" || l == "matern") s.run.kernel.family = KernelFamily::Matern25;
        else if (l == "rbf") s.run.kernel.family = KernelFamily::Rbf;
        else bad_value("kernel.family", v, "matern25 or rbf");
    });
    add("kernel.signal_variance", "1", "initial signal variance",
        [](ExperimentSpec& s, std::string_view v) { s.run.kernel.signal_variance = as_positive("kernel.signal_variance", v); });
    add("kernel.length_scale", "0.3", "initial length scale (normalised units)",
        [](ExperimentSpec& s, std::string_view v) { s.run.kernel.length_scale = as_positive("kernel.length_scale", v); });
    add("gp.noise", "0.0001", "GP noise variance",
        [](ExperimentSpec& s, std::string_view v) { s.run.gp_noise = as_positive("gp.noise", v); });
    add("gp.refit_every", "10", "hyperparameter refit interval (observations)",
        [](ExperimentSpec& s, std::string_view v) { s.run.gp_refit_every = as_count("gp.refit_every", v); });
    add("gp.standardize", "true", "z-score GP targets",
        [](ExperimentSpec& s, std::string_view v) { s.run.gp_standardize = as_bool("gp.standardize", v); });

    add("alpha.window", "5", "controller window W (bridging stages)",
        [](ExperimentSpec& s, std::string_view v) { s.run.alpha.window = as_count("alpha.window", v); });
    add("alpha.reference_rate", "0.1", "decrease rate mapped to alpha.max",
        [](ExperimentSpec& s, std::string_view v) { s.run.alpha.reference_rate = as_positive("alpha.reference_rate", v); });
    add("alpha.min", "0.5", "lower clamp of the cost exponent", [](ExperimentSpec& s, std::string_view v) { s.run.alpha.alpha_min = as_real("alpha.min", v); });
    add("alpha.max", "1", "upper clamp of the cost exponent", [](ExperimentSpec& s, std::string_view v) { s.run.alpha.alpha_max = as_real("alpha.max", v); });

    add("kl.method", "histogram", "histogram or knn", [](ExperimentSpec& s, std::string_view v) {
        const auto l = lower(v);
        if (l == "histogram") s.run.kl.method = KlMethod::Histogram;
        else if (l == "knn") s.run.kl.method = KlMethod::Knn;
        else bad_value("kl.method", v, "histogram or knn");
    });
    add("kl.bins", "64", "histogram bins",
        [](ExperimentSpec& s, std::string_view v) { s.run.kl.bins = static_cast<int>(as_count("kl.bins", v)); });
    add("kl.smoothing", "0.001", "pseudo-count per histogram bin",
        [](ExperimentSpec& s, std::string_view v) { s.run.kl.smoothing = as_positive("kl.smoothing", v); });
    add("kl.k", "5", "neighbour rank of the kNN estimator",
        [](ExperimentSpec& s, std::string_view v) { s.run.kl.k = static_cast<int>(as_count("kl.k", v)); });

    add("bnn.prior_std", "1", "std of the Gaussian weight prior", [](ExperimentSpec& s, std::string_view v) { s.run.train.prior_std = as_positive("bnn.prior_std", v); });
    add("bnn.learning_rate", "0.001", "initial optimiser learning rate",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.learning_rate = as_positive("bnn.learning_rate", v); });
    add("bnn.lr_decay", "0.95", "step decay factor",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.lr_decay = as_positive("bnn.lr_decay", v); });
    add("bnn.decay_step", "50", "epochs between decays",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.decay_step = as_count("bnn.decay_step", v); });
    add("bnn.epochs", "500", "epochs of a standalone training call",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.epochs = as_count("bnn.epochs", v); });
    add("bnn.stage_epochs", "2", "minimum epochs per bridging stage",
        [](ExperimentSpec& s, std::string_view v) { s.run.stage_epochs = as_count("bnn.stage_epochs", v); });
    add("bnn.min_stage_steps", "64", "minimum optimiser steps per bridging stage",
        [](ExperimentSpec& s, std::string_view v) { s.run.min_stage_steps = as_uint("bnn.min_stage_steps", v); });
    add("bnn.batch_size", "128", "minibatch rows",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.batch_size = as_count("bnn.batch_size", v); });
    add("bnn.mc_samples", "2", "weight draws per loss estimate",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.mc_samples = as_count("bnn.mc_samples", v); });
    add("bnn.noise_std", "0.1", "likelihood std in scaled-target units",
        [](ExperimentSpec& s, std::string_view v) { s.run.train.noise_std = as_positive("bnn.noise_std", v); });
    add("bnn.optimizer", "adam", "adam or adadelta", [](ExperimentSpec& s, std::string_view v) {
        const auto l = lower(v);
        if (l == "adam") s.run.train.optimizer = OptimizerKind::Adam;
        else if (l == "adadelta") s.run.train.optimizer = OptimizerKind::Adadelta;
        else bad_value("bnn.optimizer", v, "adam or adadelta");
    });
    add("bnn.head_steps", "2000", "steps for the discrepancy head (0 disables it)",
        [](ExperimentSpec& s, std::string_view v) { s.run.discrepancy_head_steps = as_uint("bnn.head_steps", v); });

    add("out", "results", "output directory",
        [](ExperimentSpec& s, std::string_view v) { s.out = std::string(io::trim(v)); });
    return t;
}

const std::vector<KeyEntry>& table() {
    static const std::vector<KeyEntry> t = build_table();
    return t;
}

}  // namespace

const std::vector<SpecKey>& spec_keys() {
    static const std::vector<SpecKey> keys = [] {
        std::vector<SpecKey> out;
        for (const auto& e : table()) out.push_back(e.doc);
        return out;
    }();
    return keys;
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
    key = io::trim(key);
    for (const auto& e : table()) {
        if (e.doc.key == key) {
            e.set(spec, value);
            return;
        }
    }
    throw ConfigError(std::string(key), "unknown key");
}

void ExperimentSpec::validate() const {
    auto check = [](const char* key, auto&& fn) {
        try {
            fn();
        } catch (const DomainError& e) {
            throw ConfigError(key, e.what());
        }
    };
    if (env == EnvKind::Dataset && dataset_path.empty()) {
        throw ConfigError("dataset_path", "required when env = dataset");
    }
    check("bias_strength", [&] {
        SyntheticEnvConfig c = synthetic;
        c.validate();
    });
    check("grid", [&] { run.space.validate(); });
    check("cost", [&] { run.cost.validate(); });
    check("budget", [&] { run.budget.validate(); });
    check("alpha", [&] { run.alpha.validate(); });
    check("kl", [&] { run.kl.validate(); });
    check("bnn", [&] { run.train.validate(); });
    check("run", [&] { run.validate(); });
    if (methods.empty()) throw ConfigError("methods", "at least one method is required");
}

ExperimentSpec parse_spec(std::string_view text) {
    ExperimentSpec spec;
    std::size_t line_no = 0;
    for (auto line : io::split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = io::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        const auto key = io::trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "missing key");
        apply_setting(spec, key, io::trim(line.substr(eq + 1)));
    }
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("spec", "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    return os;
}

std::string state_cells(const NetworkState& s) {
    std::string out;
    const auto v = state_values(s);
    for (std::size_t i = 0; i < kStateDims; ++i) {
        if (i) out += ',';
        out += io::format_double(v[i]);
    }
    return out;
}

const char* state_header() { return "U,D,C,R,Mu,Md,F"; }

}  // namespace

void write_iterations_csv(const std::filesystem::path& path, const std::vector<RunResult>& results) {
    auto os = open_out(path);
    os << "iter,method," << state_header() << ",kl,cost,cumulative_cost,alpha\n";
    for (const auto& r : results) {
        for (const auto& it : r.iterations) {
            os << it.iteration << ',' << to_string(r.method) << ',' << state_cells(it.state) << ','
               << io::format_double(it.discrepancy) << ',' << io::format_double(it.cost) << ','
               << io::format_double(it.cumulative_cost) << ',' << io::format_double(it.alpha) << '\n';
        }
    }
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunResult>& results) {
    auto os = open_out(path);
    os << "method,queried,cumulative_cost,global_kl,reduction_pct,cost_efficiency\n";
    for (const auto& r : results) {
        const double pre = r.pre_global;
        os << to_string(r.method) << ",0,0," << io::format_double(pre) << ",0,n/a\n";
        for (const auto& c : r.checkpoints) {
            if (c.queries == 0) continue;
            os << to_string(r.method) << ',' << c.queries << ',' << io::format_double(c.cumulative_cost)
               << ',' << io::format_double(c.post) << ',' << io::format_double(c.reduction_pct()) << ','
               << io::format_double(cost_efficiency(c.pre - c.post, c.cumulative_cost)) << '\n';
        }
    }
}

void write_per_traffic_csv(const std::filesystem::path& path, const std::vector<RunResult>& results) {
    auto os = open_out(path);
    os << "method,F,states,pre,post,reduction_pct\n";
    for (const auto& r : results) {
        for (const auto& t : r.per_traffic) {
            os << to_string(r.method) << ',' << t.traffic << ',' << t.states << ','
               << io::format_double(t.pre) << ',' << io::format_double(t.post) << ','
               << (t.reduction_pct ? io::format_double(*t.reduction_pct) : std::string("n/a")) << '\n';
        }
    }
}

void write_per_state_csv(const std::filesystem::path& path, const std::vector<RunResult>& results) {
    auto os = open_out(path);
    os << "method," << state_header() << ",pre,post,reduction_pct,predicted_kl\n";
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.eval_states.size(); ++i) {
            const double pre = r.pre_per_state[i];
            const double post = r.post_per_state[i];
            os << to_string(r.method) << ',' << state_cells(r.eval_states[i]) << ','
               << io::format_double(pre) << ',' << io::format_double(post) << ','
               << (pre >= kMinReportableKl ? io::format_double(100.0 * (pre - post) / pre) : std::string("n/a"))
               << ',' << (i < r.predicted_discrepancy.size() ? io::format_double(r.predicted_discrepancy[i]) : std::string())
               << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct EnvPair {
    std::unique_ptr<Environment> real;
    std::unique_ptr<Environment> sim;
    std::vector<NetworkState> grid;
};

EnvPair make_envs(const ExperimentSpec& spec) {
    EnvPair p;
    if (spec.env == EnvKind::Synthetic) {
        SyntheticEnvConfig r = spec.synthetic;
        r.role = Role::Real;
        SyntheticEnvConfig s = spec.synthetic;
        s.role = Role::Sim;
        p.real = std::make_unique<SyntheticEnvironment>(r, spec.run.cost);
        p.sim = std::make_unique<SyntheticEnvironment>(s, spec.run.cost);
        p.grid = enumerate_state_grid(spec.run.space);
    } else {
        auto records = std::make_shared<const std::vector<DatasetRecord>>(load_dataset(spec.dataset_path));
        auto real = std::make_unique<DatasetEnvironment>(records, Role::Real, spec.run.cost);
        p.grid = real->states();
        p.real = std::move(real);
        p.sim = std::make_unique<DatasetEnvironment>(records, Role::Sim, spec.run.cost);
    }
    return p;
}

ExperimentSpec resolve_spec(const std::optional<std::filesystem::path>& path,
                            const std::vector<std::string>& overrides) {
    ExperimentSpec spec;
    if (path) {
        if (!std::filesystem::exists(*path)) throw ConfigError("spec", "no such file: " + path->string());
        spec = load_spec(*path);
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
        apply_setting(spec, o.substr(0, eq), o.substr(eq + 1));
    }
    return spec;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    try {
        spec = resolve_spec(options.spec, options.overrides);
        if (options.out) spec.out = *options.out;
        if (options.seed) spec.run.seed = *options.seed;
        if (options.methods) spec.methods = as_methods("--method", *options.methods);
        if (options.budget) {
            if (!(*options.budget > 0.0)) throw ConfigError("--budget", "must be > 0");
            spec.run.budget.max_cumulative_cost = *options.budget;
        }
        spec.validate();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "spec parse error: " << e.what() << '\n';
        return 2;
    }

    try {
        EnvPair envs;
        try {
            envs = make_envs(spec);
        } catch (const ParseError& e) {
            err << "dataset error: " << e.what() << '\n';
            return 2;
        } catch (const DuplicateError& e) {
            err << "dataset error: " << e.what() << '\n';
            return 2;
        }
        std::vector<RunResult> results;
        for (const auto m : spec.methods) {
            RunConfig rc = spec.run;
            rc.method = m;
            auto r = run(rc, *envs.real, *envs.sim, envs.grid);
            out << to_string(m) << ": " << r.queried() << " queries, cost "
                << io::format_fixed(r.cumulative_cost(), 1) << ", KL " << io::format_fixed(r.pre_global, 3)
                << " -> " << io::format_fixed(r.post_global, 3) << " (" << io::format_fixed(r.reduction_pct(), 1)
                << "% reduction), stop: " << to_string(r.stop) << '\n';
            for (const auto& t : r.per_traffic) {
                if (!t.reduction_pct) out << "  warning: F=" << t.traffic << " pre-KL below reporting floor\n";
            }
            if (r.per_traffic.size() < 4) out << "  warning: eval states miss some traffic levels\n";
            results.push_back(std::move(r));
        }
        std::filesystem::create_directories(spec.out);
        write_iterations_csv(spec.out / "iterations.csv", results);
        write_summary_csv(spec.out / "summary.csv", results);
        write_per_traffic_csv(spec.out / "per_traffic.csv", results);
        write_per_state_csv(spec.out / "per_state.csv", results);
        out << "wrote results to " << spec.out.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_gen_dataset(const std::optional<std::filesystem::path>& spec_path,
                    const std::filesystem::path& out_path, const std::vector<std::string>& overrides,
                    std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    try {
        spec = resolve_spec(spec_path, overrides);
        spec.validate();
        if (spec.env != EnvKind::Synthetic) throw ConfigError("env", "gen-dataset needs env = synthetic");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "spec parse error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto envs = make_envs(spec);
        const std::uint64_t seed = derive_seed({spec.run.seed, 0x67656e});
        std::vector<DatasetRecord> records;
        records.reserve(envs.grid.size());
        for (const auto& s : envs.grid) {
            records.push_back({s, envs.real->query(s, spec.run.samples_per_query, seed).collection.samples,
                               envs.sim->query(s, spec.run.samples_per_query, seed).collection.samples});
        }
        write_dataset(out_path, records);
        out << "wrote " << records.size() << " states to " << out_path.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace twinbridge
