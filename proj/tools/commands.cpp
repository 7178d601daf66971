#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "rdmd/io.hpp"
#include "rdmd/rdmd.hpp"
#include "rdmd/svg.hpp"

namespace rdmd::cli {

namespace fs = std::filesystem;

int thread_cap_from_env() {
    const char* v = std::getenv("RDMD_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096)
        detail::fail(ErrorCode::InvalidParameter, std::string("RDMD_THREADS must be a positive integer, got '") + v + "'");
    return static_cast<int>(n);
}

namespace {

// ---------------------------------------------------------------------------
// JSON config files: a flat object of long option names, or a manifest whose
// "config" member is such an object. Entries become command-line tokens;
// options given explicitly on the command line take precedence.

std::string config_scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    // args[0] program, args[1] subcommand
    std::optional<std::size_t> at;
    for (std::size_t i = 2; i < args.size(); ++i)
        if (args[i] == "--config" || args[i].rfind("--config=", 0) == 0) at = i;
    if (args.size() < 2 || !at) return args;

    std::string file;
    std::vector<std::string> rest;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (i == *at) {
            if (args[i] == "--config") {
                detail::require(i + 1 < args.size(), ErrorCode::InvalidParameter, "--config needs a file");
                file = args[++i];
            } else {
                file = args[i].substr(9);
            }
            continue;
        }
        rest.push_back(args[i]);
    }
    Json j = read_json(file);
    if (j.contains("config") && j["config"].is_object()) {
        if (j.contains("command") && j["command"].is_string() && j["command"].get<std::string>() != args[1])
            detail::fail(ErrorCode::InvalidParameter,
                         "config was written by '" + j["command"].get<std::string>() + "', not '" + args[1] + "'");
        j = j["config"];
    }
    detail::require(j.is_object(), ErrorCode::FormatError, "config file must hold a JSON object");

    std::vector<std::string> given;
    bool has_positional = false;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        const auto& t = rest[i];
        if (t.rfind("--", 0) == 0) {
            given.push_back(t.substr(2, t.find('=') == std::string::npos ? std::string::npos : t.find('=') - 2));
        } else if (i == 0 || rest[i - 1].rfind("--", 0) != 0) {
            has_positional = true;
        }
    }
    std::vector<std::string> out{args[0], args[1]};
    for (const auto& [key, value] : j.items()) {
        if (std::find(given.begin(), given.end(), key) != given.end()) continue;
        if (key == "preset") {
            if (!has_positional) out.push_back(config_scalar(value));
            continue;
        }
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back("--" + key);
            continue;
        }
        if (value.is_array()) {
            if (value.empty()) continue;
            out.push_back("--" + key);
            for (const auto& v : value) out.push_back(config_scalar(v));
            continue;
        }
        out.push_back("--" + key);
        out.push_back(config_scalar(value));
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

// Parsed option values of a subcommand, keyed by long name.
Json capture_config(const CLI::App& sub) {
    Json cfg = Json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (opt->get_expected_max() == 0) {
            cfg[name] = opt->count() > 0 && opt->as<bool>();
            continue;
        }
        if (opt->get_items_expected_max() > 1) {
            if (opt->count() == 0) continue;
            cfg[name] = opt->results();
            continue;
        }
        if (opt->count() > 0) cfg[name] = opt->results().back();
        else if (!opt->get_default_str().empty()) cfg[name] = opt->get_default_str();
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Manifest bookkeeping

struct Run {
    std::string command;
    fs::path out;
    Json config;
    Json resolved = Json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    int threads = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    fs::path output(const std::string& name) {
        outputs.push_back(name);
        return out / name;
    }

    void finish() {
        Json m;
        m["command"] = command;
        m["config"] = config;
        m["resolved"] = resolved;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["tool_version"] = kToolVersion;
        m["threads"] = threads;
        m["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_json(m, out / "manifest.json");
    }
};

void require_out_dir(const fs::path& out) {
    if (out.empty() || !fs::is_directory(out))
        detail::fail(ErrorCode::PathError, "output directory does not exist: " + out.string());
}

// Double options record their defaults with round-trip precision so that a
// manifest replays bit-identically.
CLI::Option* add_real(CLI::App* sub, const std::string& name, double& v, const std::string& desc = "") {
    return sub->add_option(name, v, desc)->default_str(format_double(v));
}

// ---------------------------------------------------------------------------
// Inputs

struct InputOptions {
    std::string input;
    std::string x;
    std::string y;
    std::string complex_mode = "auto";
};

void add_input_options(CLI::App* sub, InputOptions& o) {
    sub->add_option("--input", o.input, "Directory holding X and Y (rdmd-binary or CSV)");
    sub->add_option("--x", o.x, "X snapshot file");
    sub->add_option("--y", o.y, "Y snapshot file");
    sub->add_option("--complex", o.complex_mode, "Treat rows as stacked [Re; Im] channels")
        ->check(CLI::IsMember({"auto", "on", "off"}));
}

struct LoadedInput {
    SnapshotPair pair;
    bool complex = false;
    std::optional<LoadedTruth> truth;
};

fs::path find_matrix(const fs::path& dir, const std::string& stem) {
    for (const char* ext : {".rdmd", ".bin", ".csv"}) {
        const fs::path p = dir / (stem + ext);
        if (fs::exists(p)) return p;
    }
    detail::fail(ErrorCode::PathError, "no " + stem + ".rdmd or " + stem + ".csv in " + dir.string());
}

LoadedInput load_input(const InputOptions& o, Run& run) {
    fs::path xp, yp;
    if (!o.input.empty()) {
        xp = find_matrix(o.input, "X");
        yp = find_matrix(o.input, "Y");
    } else if (!o.x.empty() && !o.y.empty()) {
        xp = o.x;
        yp = o.y;
    } else {
        detail::fail(ErrorCode::InvalidParameter, "give --input DIR or both --x and --y");
    }
    run.inputs.push_back(xp.string());
    run.inputs.push_back(yp.string());
    LoadedInput in{SnapshotPair(load(xp), load(yp)), false, std::nullopt};
    if (!o.input.empty() && fs::exists(fs::path(o.input) / "truth.json")) {
        in.truth = load_truth(o.input);
        run.inputs.push_back((fs::path(o.input) / "truth.json").string());
    }
    if (o.complex_mode == "on") in.complex = true;
    else if (o.complex_mode == "auto") in.complex = in.truth && in.truth->complex_stacked;
    if (in.complex)
        detail::require(in.pair.n_features() % 2 == 0, ErrorCode::ShapeMismatch,
                        "complex mode needs an even number of stacked rows");
    return in;
}

// Calls f with the pair in the arithmetic the input asks for.
template <typename F>
void dispatch(const LoadedInput& in, F&& f) {
    if (in.complex) f(to_complex(in.pair));
    else f(in.pair);
}

std::optional<GroundTruth> usable_truth(const LoadedInput& in, Index n_features, std::ostream& err) {
    if (!in.truth) return std::nullopt;
    if (in.truth->truth.mode_profiles.rows() != n_features) {
        err << "warning: truth profiles do not match the mode length (try --complex on); ignoring truth\n";
        return std::nullopt;
    }
    return in.truth->truth;
}

// ---------------------------------------------------------------------------
// Projected dimension

struct DimOptions {
    std::optional<Index> l_dim;
    std::optional<double> epsilon;
    std::optional<double> delta;
    double c_constant = 2.0;
};

void add_dim_options(CLI::App* sub, DimOptions& o) {
    sub->add_option("--L", o.l_dim, "Projected dimension L");
    sub->add_option("--epsilon", o.epsilon, "JL distortion; picks L = ceil(C ln M / eps^2)");
    sub->add_option("--delta", o.delta, "JL failure probability (second lower bound on L)");
    add_real(sub, "--C", o.c_constant, "JL constant C");
}

Index clamp_dim(Index l, Index n, Index m, std::ostream& err) {
    if (l > m) {
        err << "warning: L=" << l << " exceeds M=" << m << "; clamping to " << m << '\n';
        l = m;
    }
    if (l > n) {
        err << "warning: L=" << l << " exceeds N=" << n << "; clamping to " << n << '\n';
        l = n;
    }
    return l;
}

Index resolve_dim(const DimOptions& o, Index n, Index m, Run& run, std::ostream& err) {
    Index l;
    if (o.l_dim) {
        l = *o.l_dim;
        detail::require(l >= 1, ErrorCode::InvalidParameter, "L must be >= 1");
    } else if (o.epsilon) {
        JlParams p;
        p.epsilon = *o.epsilon;
        p.delta = o.delta;
        p.c_constant = o.c_constant;
        p.m_points = static_cast<std::uint64_t>(m);
        l = static_cast<Index>(jl_dimension(p));
        run.resolved["l_from_epsilon"] = l;
    } else {
        detail::fail(ErrorCode::InvalidParameter, "give --L or --epsilon");
    }
    l = clamp_dim(l, n, m, err);
    run.resolved["L"] = l;
    return l;
}

// ---------------------------------------------------------------------------
// Shared writers

void write_frequencies_csv(const DmdSpectrum& sp, double dt, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << "index,lambda_re,lambda_im,omega_re,omega_im,period,amplitude_abs\n";
    for (const auto& f : continuous_spectrum(sp, dt))
        os << f.index << ',' << format_double(f.lambda.real()) << ',' << format_double(f.lambda.imag()) << ','
           << format_double(f.omega.real()) << ',' << format_double(f.omega.imag()) << ','
           << format_double(f.period) << ',' << format_double(std::abs(sp.amplitudes[f.index])) << '\n';
}

svg::Chart spectrum_chart(const std::string& title) {
    svg::Chart c;
    c.title = title;
    c.x_label = "Re(lambda)";
    c.y_label = "Im(lambda)";
    c.unit_circle = true;
    c.equal_aspect = true;
    return c;
}

svg::Series eig_series(const DmdSpectrum& sp, const std::string& label, const std::string& color) {
    svg::Series s{label, color, {}, {}, false};
    for (Index i = 0; i < sp.eigenvalues.size(); ++i) {
        s.x.push_back(sp.eigenvalues[i].real());
        s.y.push_back(sp.eigenvalues[i].imag());
    }
    return s;
}

std::string method_label(DmdMethod m) { return std::string(to_string(m)); }

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
    std::string preset;
    std::string out;
    std::uint64_t seed = 0;
    std::string format = "binary";
    // logistic
    double a = 3.56994;
    Index n_init = 5000;
    Index m_steps = 300;
    Index burn_in = 10000;
    // sech
    Index n_space = 20000;
    Index m_time = 5001;
    Index n_modes = 20;
    std::vector<double> gammas;
    double x_min = -250.0;
    double x_max = 50.0;
    double t_min = 0.0;
    double t_max = 10.0 * std::numbers::pi;
    // linear
    Index d = 10;
    Index n_embed = 500;
    std::vector<double> periods;
    bool background = false;
    double min_modulus = 0.9;
    double max_modulus = 0.99;
};

void save_pair(const SnapshotPair& pair, Run& run, const std::string& format) {
    const std::string ext = format == "csv" ? ".csv" : ".rdmd";
    save(pair.x, run.output("X" + ext));
    save(pair.y, run.output("Y" + ext));
}

void cmd_gen(const GenOptions& o, Run& run, std::ostream& out) {
    run.out = o.out;
    require_out_dir(run.out);
    if (o.preset == "logistic") {
        LogisticConfig cfg;
        cfg.a = o.a;
        cfg.n_init = o.n_init;
        cfg.m_steps = o.m_steps;
        cfg.burn_in = o.burn_in;
        cfg.seed = o.seed;
        const auto pair = gen_logistic(cfg);
        save_pair(pair, run, o.format);
        out << "logistic: N=" << pair.n_features() << " M=" << pair.n_snapshots() << " a=" << cfg.a << '\n';
    } else if (o.preset == "sech") {
        SechConfig cfg;
        cfg.n_space = o.n_space;
        cfg.m_time = o.m_time;
        cfg.n_modes = o.n_modes;
        cfg.gammas = o.gammas;
        cfg.x_min = o.x_min;
        cfg.x_max = o.x_max;
        cfg.t_min = o.t_min;
        cfg.t_max = o.t_max;
        const auto ds = gen_sech(cfg);
        save_pair(ds.pair, run, o.format);
        save_truth(ds.truth, run.out, true);
        run.outputs.insert(run.outputs.end(), {"truth.json", "truth_modes_re.rdmd", "truth_modes_im.rdmd"});
        run.resolved["dt"] = ds.truth.dt;
        out << "sech: stacked N=" << ds.pair.n_features() << " M=" << ds.pair.n_snapshots()
            << " modes=" << cfg.n_modes << " dt=" << ds.truth.dt << '\n';
    } else if (o.preset == "linear") {
        const RMat a = o.periods.empty() ? random_stable_matrix(o.d, o.seed, o.min_modulus, o.max_modulus)
                                         : oscillator_matrix(o.periods, o.background);
        auto eng = make_engine(o.seed, "linear.x0");
        NormalSampler normal(eng);
        RVec x0(a.rows());
        for (Index i = 0; i < x0.size(); ++i) x0[i] = normal();
        const auto ds = gen_linear(a, x0, o.n_embed, o.m_steps, o.seed);
        save_pair(ds.pair, run, o.format);
        save_binary(a, run.output("A.rdmd"));
        Json t;
        t["d"] = a.rows();
        t["eigenvalues"] = complex_list(ds.eigenvalues);
        write_json(t, run.output("linear_truth.json"));
        out << "linear: d=" << a.rows() << " N=" << ds.pair.n_features() << " M=" << ds.pair.n_snapshots() << '\n';
    } else {
        detail::fail(ErrorCode::InvalidParameter, "unknown preset '" + o.preset + "'");
    }
}

// ---------------------------------------------------------------------------
// dmd

struct DmdOptions {
    InputOptions input;
    DimOptions dim;
    std::string method = "rdmd";
    std::string kind = "gaussian";
    std::uint64_t seed = 0;
    std::optional<double> dt;
    std::optional<Index> max_modes;
    bool streaming = false;
    std::string out;
};

template <typename S>
DmdSpectrum run_method(const BasicSnapshotPair<S>& pair, const std::string& method, Index l, std::uint64_t seed,
                       ProjectionKind kind, ApplyMode mode, std::optional<Index> max_modes) {
    if (method == "exact") return exact_dmd_run(pair, l, max_modes).spectrum;
    return rdmd_run(pair, l, seed, kind, mode, max_modes).spectrum;
}

void cmd_dmd(const DmdOptions& o, Run& run, std::ostream& out, std::ostream& err) {
    run.out = o.out;
    require_out_dir(run.out);
    const auto in = load_input(o.input, run);
    const double dt = o.dt ? *o.dt : (in.truth ? in.truth->truth.dt : 1.0);
    run.resolved["dt"] = dt;
    run.resolved["complex"] = in.complex;
    const auto kind = projection_kind_from_string(o.kind);
    detail::require(kind != ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                    "--kind must be gaussian or rademacher");
    dispatch(in, [&](const auto& pair) {
        const Index l = resolve_dim(o.dim, pair.n_features(), pair.n_snapshots(), run, err);
        const DmdSpectrum sp = run_method(pair, o.method, l, o.seed, kind,
                                          o.streaming ? ApplyMode::streaming : ApplyMode::in_memory, o.max_modes);
        save_spectrum(sp, run.out, dt);
        run.outputs.push_back("spectrum.json");
        if (sp.rank_used > 0) run.outputs.insert(run.outputs.end(), {"modes_re.rdmd", "modes_im.rdmd"});
        write_frequencies_csv(sp, dt, run.output("frequencies.csv"));
        auto chart = spectrum_chart("DMD eigenvalues (" + method_label(sp.method) + ", L=" + std::to_string(l) + ")");
        chart.add(eig_series(sp, method_label(sp.method), "#d62728"));
        svg::write(chart, run.output("spectrum.svg"));
        out << method_label(sp.method) << ": L=" << l << " r=" << sp.rank_used
            << " reconstruction residual(x0)=" << sp.amplitude_residual << '\n';
        if (sp.rank_deficient) err << "warning: mode matrix is rank deficient; amplitudes are minimum-norm\n";
    });
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
    InputOptions input;
    DimOptions dim;
    std::string kind = "gaussian";
    std::uint64_t seed = 0;
    std::string truth;
    std::optional<double> dt;
    std::string out;
};

void cmd_compare(const CompareOptions& o, Run& run, std::ostream& out, std::ostream& err) {
    run.out = o.out;
    require_out_dir(run.out);
    auto in = load_input(o.input, run);
    if (!o.truth.empty()) {
        in.truth = load_truth(o.truth);
        run.inputs.push_back((fs::path(o.truth) / "truth.json").string());
    }
    const auto kind = projection_kind_from_string(o.kind);
    detail::require(kind != ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                    "--kind must be gaussian or rademacher");
    dispatch(in, [&](const auto& pair) {
        const Index l = resolve_dim(o.dim, pair.n_features(), pair.n_snapshots(), run, err);
        DmdSpectrum exact, random;
        const double t_exact = time_seconds([&] { exact = exact_dmd(pair, l); });
        const double t_random = time_seconds([&] { random = rdmd(pair, l, o.seed, kind); });
        std::optional<GroundTruth> truth = usable_truth(in, pair.n_features(), err);
        if (truth && o.dt) truth->dt = *o.dt;
        const auto rep = compare(random, exact, truth, t_random, t_exact);

        Json j = to_json(rep);
        j["a"] = method_label(random.method);
        j["b"] = method_label(exact.method);
        j["l_dim"] = l;
        j["timing"] = {{method_label(random.method), t_random}, {"exact_svd", t_exact}};
        write_json(j, run.output("comparison.json"));
        write_comparison_csv(rep, run.output("comparison.csv"));

        svg::Chart spec = spectrum_chart("Eigenvalues, L=" + std::to_string(l));
        spec.add(eig_series(exact, "exact_svd", "#1f77b4"));
        spec.add(eig_series(random, method_label(random.method), "#d62728"));
        svg::write(spec, run.output("spectra.svg"));

        svg::Chart ec;
        ec.log_y = true;
        ec.x_label = "mode j";
        if (truth) {
            write_truth_csv(rep, run.output("truth_errors.csv"));
            ec.title = "|omega_j - i gamma_j|";
            ec.y_label = "absolute error";
            svg::Chart mc = ec;
            mc.title = "max_x |b_j phi_j - Phi_j|";
            const std::vector<std::pair<const std::vector<TruthError>*, std::string>> sets{
                {&rep.truth_a, method_label(random.method)}, {&rep.truth_b, "exact_svd"}};
            const char* colors[] = {"#d62728", "#1f77b4"};
            int ci = 0;
            for (const auto& [errs, label] : sets) {
                svg::Series se{label, colors[ci], {}, {}, false}, sm = se;
                for (const auto& e : *errs) {
                    se.x.push_back(static_cast<double>(e.truth_index + 1));
                    se.y.push_back(e.omega_err);
                    sm.x.push_back(static_cast<double>(e.truth_index + 1));
                    sm.y.push_back(e.mode_err);
                }
                ec.add(se);
                mc.add(sm);
                ++ci;
            }
            svg::write(ec, run.output("eig_errors.svg"));
            svg::write(mc, run.output("mode_errors.svg"));
            double wa = 0.0, wb = 0.0;
            for (const auto& e : rep.truth_a) wa = std::max(wa, e.omega_err);
            for (const auto& e : rep.truth_b) wb = std::max(wb, e.omega_err);
            out << "max omega error vs truth: " << method_label(random.method) << "=" << wa << " exact_svd=" << wb
                << '\n';
        } else {
            ec.title = "|lambda_a - lambda_b| for matched modes";
            ec.y_label = "absolute error";
            svg::Series s{"eigenvalue gap", "#d62728", {}, {}, false};
            for (std::size_t k = 0; k < rep.eig_abs_errors.size(); ++k) {
                s.x.push_back(static_cast<double>(k + 1));
                s.y.push_back(rep.eig_abs_errors[k]);
            }
            ec.add(s);
            svg::write(ec, run.output("eig_errors.svg"));
        }
        out << "matched " << rep.matching.pairs.size() << " modes; time exact=" << t_exact
            << "s random=" << t_random << "s\n";
    });
}

// ---------------------------------------------------------------------------
// errorbound

struct ErrorBoundOptions {
    InputOptions input;
    std::vector<Index> l_dims;
    std::vector<double> epsilons;
    double c_constant = 2.0;
    std::string kind = "gaussian";
    std::uint64_t seed = 0;
    Index n_seeds = 1;
    std::string out;
};

struct SweepRow {
    std::uint64_t seed;
    Index l_dim;
    double epsilon;
    bool vacuous;
    ErrorReport report;
    double mean_rel_err;
};

void cmd_errorbound(const ErrorBoundOptions& o, Run& run, std::ostream& out, std::ostream& err) {
    run.out = o.out;
    require_out_dir(run.out);
    detail::require(o.l_dims.empty() || o.epsilons.empty(), ErrorCode::InvalidParameter,
                    "give either --L or --epsilon, not both");
    detail::require(o.n_seeds >= 1, ErrorCode::InvalidParameter, "--n-seeds must be >= 1");
    const auto in = load_input(o.input, run);
    const auto kind = projection_kind_from_string(o.kind);
    detail::require(kind != ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                    "--kind must be gaussian or rademacher");

    dispatch(in, [&](const auto& pair) {
        const Index n = pair.n_features(), m = pair.n_snapshots();
        const auto m_points = static_cast<std::uint64_t>(m);
        // (L, epsilon) grid
        std::vector<std::pair<Index, double>> grid;
        if (!o.epsilons.empty()) {
            for (double e : o.epsilons) {
                const auto l = static_cast<Index>(jl_dimension({e, std::nullopt, o.c_constant, m_points}));
                grid.emplace_back(clamp_dim(l, n, m, err), e);
            }
        } else {
            std::vector<Index> ls = o.l_dims;
            if (ls.empty()) ls = {20, 50, 100, 200, 300};
            for (Index l : ls) {
                detail::require(l >= 1, ErrorCode::InvalidParameter, "L must be >= 1");
                const Index lc = clamp_dim(l, n, m, err);
                grid.emplace_back(lc, m_points > 1 ? epsilon_for_dimension(lc, o.c_constant, m_points) : 0.5);
            }
        }
        Json g = Json::array();
        for (const auto& [l, e] : grid) g.push_back({{"L", l}, {"epsilon", e}});
        run.resolved["grid"] = g;

        RVec ynorm(m);
        for (Index t = 0; t < m; ++t) ynorm[t] = pair.y.data().col(t).norm();

        std::vector<SweepRow> rows;
        for (Index s = 0; s < o.n_seeds; ++s) {
            const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(s);
            for (const auto& [l, eps] : grid) {
                const auto r = rdmd_run(pair, l, seed, kind);
                SweepRow row{seed, l, eps, !(eps < 1.0), {}, 0.0};
                // With eps >= 1 the bound is vacuous: err is still measured, ub is +inf.
                row.report = forecast_error_bound(pair, r.op, row.vacuous ? 0.5 : eps);
                if (row.vacuous) {
                    for (auto& rec : row.report.per_snapshot) rec.ub = std::numeric_limits<double>::infinity();
                    row.report.epsilon = eps;
                    row.report.violations = 0;
                }
                double acc = 0.0;
                for (const auto& rec : row.report.per_snapshot)
                    acc += ynorm[rec.t] > 0.0 ? rec.err / ynorm[rec.t] : rec.err;
                row.mean_rel_err = acc / static_cast<double>(m);
                rows.push_back(std::move(row));
            }
        }

        {
            std::ofstream os(run.output("errorbound.csv"), std::ios::trunc);
            os << "seed,L,epsilon,max_err,mean_err,mean_rel_err,max_ub,mean_ub,violations,n_snapshots\n";
            for (const auto& r : rows)
                os << r.seed << ',' << r.l_dim << ',' << format_double(r.epsilon) << ','
                   << format_double(r.report.max_err()) << ',' << format_double(r.report.mean_err()) << ','
                   << format_double(r.mean_rel_err) << ',' << format_double(r.report.max_ub()) << ','
                   << format_double(r.report.mean_ub()) << ',' << r.report.violations << ',' << m << '\n';
        }
        {
            std::ofstream os(run.output("per_snapshot.csv"), std::ios::trunc);
            os << "seed,L,t,err,ub\n";
            for (const auto& r : rows)
                for (const auto& rec : r.report.per_snapshot)
                    os << r.seed << ',' << r.l_dim << ',' << rec.t << ',' << format_double(rec.err) << ','
                       << format_double(rec.ub) << '\n';
        }
        Json j = Json::array();
        Index seeds_with_violations = 0;
        for (Index s = 0; s < o.n_seeds; ++s) {
            bool any = false;
            for (const auto& r : rows)
                if (r.seed == o.seed + static_cast<std::uint64_t>(s) && r.report.violations > 0) any = true;
            if (any) ++seeds_with_violations;
        }
        for (const auto& r : rows) {
            Json e = to_json(r.report);
            e.erase("per_snapshot");
            e["seed"] = r.seed;
            e["vacuous"] = r.vacuous;
            e["mean_rel_err"] = r.mean_rel_err;
            j.push_back(std::move(e));
        }
        write_json({{"rows", j}, {"n_seeds", o.n_seeds}, {"seeds_with_violations", seeds_with_violations}},
                   run.output("errorbound.json"));

        // Sweep curves for the first seed.
        const bool by_eps = !o.epsilons.empty();
        svg::Chart c;
        c.title = by_eps ? "One-step error vs distortion" : "One-step error vs projected dimension";
        c.x_label = by_eps ? "epsilon" : "L";
        c.y_label = "mean over snapshots";
        c.log_y = true;
        svg::Series se{"err", "#1f77b4", {}, {}, true}, su{"upper bound", "#d62728", {}, {}, true};
        for (const auto& r : rows) {
            if (r.seed != o.seed) continue;
            const double xv = by_eps ? r.epsilon : static_cast<double>(r.l_dim);
            se.x.push_back(xv);
            se.y.push_back(r.report.mean_err());
            su.x.push_back(xv);
            su.y.push_back(r.report.mean_ub());
        }
        c.add(se);
        c.add(su);
        svg::write(c, run.output("errorbound.svg"));

        const SweepRow& first = rows.front();
        svg::Chart ps;
        ps.title = "Per-snapshot error, L=" + std::to_string(first.l_dim);
        ps.x_label = "t";
        ps.y_label = "error";
        ps.log_y = true;
        svg::Series pe{"err", "#1f77b4", {}, {}, true}, pu{"upper bound", "#d62728", {}, {}, true};
        for (const auto& rec : first.report.per_snapshot) {
            pe.x.push_back(static_cast<double>(rec.t));
            pe.y.push_back(rec.err);
            pu.x.push_back(static_cast<double>(rec.t));
            pu.y.push_back(rec.ub);
        }
        ps.add(pe);
        ps.add(pu);
        svg::write(ps, run.output("errorbound_snapshots.svg"));

        for (const auto& r : rows)
            out << "seed=" << r.seed << " L=" << r.l_dim << " eps=" << r.epsilon << " mean_err=" << r.report.mean_err()
                << " mean_ub=" << r.report.mean_ub() << " violations=" << r.report.violations
                << (r.vacuous ? " (vacuous bound)" : "") << '\n';
    });
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
    InputOptions input;
    std::vector<std::string> sizes;
    std::vector<std::string> methods;
    Index l_dim = 20;
    int repetitions = 3;
    std::uint64_t seed = 0;
    std::string out;
};

std::pair<Index, Index> parse_size(const std::string& s) {
    const auto x = s.find('x');
    detail::require(x != std::string::npos, ErrorCode::InvalidParameter, "size must look like NxM, got '" + s + "'");
    try {
        const long long n = std::stoll(s.substr(0, x));
        const long long m = std::stoll(s.substr(x + 1));
        detail::require(n >= 1 && m >= 1, ErrorCode::InvalidParameter, "size must be positive: " + s);
        return {static_cast<Index>(n), static_cast<Index>(m)};
    } catch (const std::logic_error&) {
        detail::fail(ErrorCode::InvalidParameter, "size must look like NxM, got '" + s + "'");
    }
}

void cmd_bench(const BenchOptions& o, Run& run, std::ostream& out, std::ostream& err) {
    run.out = o.out;
    require_out_dir(run.out);
    detail::require(o.repetitions >= 1, ErrorCode::InvalidParameter, "repetitions must be >= 1");
    std::vector<DmdMethod> methods;
    for (const auto& m : o.methods) methods.push_back(dmd_method_from_string(m));
    if (methods.empty()) methods = {DmdMethod::exact_svd, DmdMethod::random_gaussian};

    std::vector<BenchmarkTable> tables;
    auto bench_pair = [&](const auto& pair) {
        const Index l = clamp_dim(o.l_dim, pair.n_features(), pair.n_snapshots(), err);
        detail::require(l >= 1, ErrorCode::InvalidParameter, "L must be >= 1");
        tables.push_back(benchmark(pair, methods, l, o.repetitions, o.seed));
    };
    if (!o.input.input.empty() || !o.input.x.empty()) {
        dispatch(load_input(o.input, run), bench_pair);
    } else {
        std::vector<std::string> sizes = o.sizes;
        if (sizes.empty()) sizes = {"2000x500"};
        for (const auto& s : sizes) {
            const auto [n, m] = parse_size(s);
            SechConfig cfg;
            cfg.n_space = n;
            cfg.m_time = m + 1;
            bench_pair(gen_sech_complex(cfg).pair);
        }
    }

    std::ofstream os(run.output("bench.csv"), std::ios::trunc);
    os << "n_features,n_snapshots,l_dim,method,median_s,exact_over_random\n";
    Json j = Json::array();
    for (const auto& t : tables) {
        const auto s = t.speedup();
        for (const auto& r : t.rows) {
            os << t.n_features << ',' << t.n_snapshots << ',' << t.l_dim << ',' << to_string(r.method) << ','
               << format_double(r.median_s) << ',' << (s ? format_double(*s) : std::string("nan")) << '\n';
            out << "N=" << t.n_features << " M=" << t.n_snapshots << " L=" << t.l_dim << " " << to_string(r.method)
                << ": " << r.median_s << " s\n";
        }
        if (s) out << "  exact/random speedup: " << *s << "x\n";
        j.push_back(to_json(t));
    }
    write_json({{"tables", j}}, run.output("bench.json"));
}

int code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidParameter: return kInvalidParameter;
    case ErrorCode::FormatError: return kFormatError;
    case ErrorCode::NumericalFailure: return kNumericalFailure;
    case ErrorCode::PathError: return kPathError;
    case ErrorCode::InsufficientSnapshots:
    case ErrorCode::InvalidData:
    case ErrorCode::ShapeMismatch: return kDataError;
    }
    return kGenericError;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Randomized dynamic mode decomposition toolkit", "rdmd"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto add_common = [&](CLI::App* sub, std::string& out_dir) {
        sub->add_option("--config", "JSON config file (or a manifest.json from an earlier run)");
        sub->add_option("--out", out_dir, "Existing output directory")->required();
    };

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
    add_common(gen_cmd, gen.out);
    gen_cmd->add_option("preset", gen.preset, "logistic | sech | linear")
        ->required()
        ->check(CLI::IsMember({"logistic", "sech", "linear"}));
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--format", gen.format)->check(CLI::IsMember({"binary", "csv"}));
    add_real(gen_cmd, "--a", gen.a, "Logistic parameter");
    gen_cmd->add_option("--n-init", gen.n_init, "Logistic initial conditions (N)");
    gen_cmd->add_option("--m-steps", gen.m_steps, "Snapshots M (logistic, linear)");
    gen_cmd->add_option("--burn-in", gen.burn_in);
    gen_cmd->add_option("--n-space", gen.n_space);
    gen_cmd->add_option("--m-time", gen.m_time);
    gen_cmd->add_option("--n-modes", gen.n_modes);
    gen_cmd->add_option("--gammas", gen.gammas);
    add_real(gen_cmd, "--x-min", gen.x_min);
    add_real(gen_cmd, "--x-max", gen.x_max);
    add_real(gen_cmd, "--t-min", gen.t_min);
    add_real(gen_cmd, "--t-max", gen.t_max);
    gen_cmd->add_option("--d", gen.d, "Linear system size");
    gen_cmd->add_option("--n-embed", gen.n_embed);
    gen_cmd->add_option("--periods", gen.periods, "Oscillator periods in samples (linear)");
    gen_cmd->add_flag("--background", gen.background, "Add a unit eigenvalue (linear oscillator)");
    add_real(gen_cmd, "--min-modulus", gen.min_modulus);
    add_real(gen_cmd, "--max-modulus", gen.max_modulus);

    DmdOptions dmd;
    auto* dmd_cmd = app.add_subcommand("dmd", "Compute a DMD spectrum");
    add_common(dmd_cmd, dmd.out);
    add_input_options(dmd_cmd, dmd.input);
    add_dim_options(dmd_cmd, dmd.dim);
    dmd_cmd->add_option("--method", dmd.method)->check(CLI::IsMember({"exact", "rdmd"}));
    dmd_cmd->add_option("--kind", dmd.kind)->check(CLI::IsMember({"gaussian", "rademacher"}));
    dmd_cmd->add_option("--seed", dmd.seed);
    dmd_cmd->add_option("--dt", dmd.dt, "Sampling interval (default: truth.json dt, else 1)");
    dmd_cmd->add_option("--max-modes", dmd.max_modes, "Keep at most this many modes");
    dmd_cmd->add_flag("--streaming", dmd.streaming, "Generate projector rows on the fly");

    CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Run exact DMD and rDMD on the same input and compare");
    add_common(cmp_cmd, cmp.out);
    add_input_options(cmp_cmd, cmp.input);
    add_dim_options(cmp_cmd, cmp.dim);
    cmp_cmd->add_option("--kind", cmp.kind)->check(CLI::IsMember({"gaussian", "rademacher"}));
    cmp_cmd->add_option("--seed", cmp.seed);
    cmp_cmd->add_option("--truth", cmp.truth, "Directory with truth.json");
    cmp_cmd->add_option("--dt", cmp.dt);

    ErrorBoundOptions eb;
    auto* eb_cmd = app.add_subcommand("errorbound", "One-step forecast error against its upper bound");
    add_common(eb_cmd, eb.out);
    add_input_options(eb_cmd, eb.input);
    eb_cmd->add_option("--L", eb.l_dims, "Projected dimensions to sweep");
    eb_cmd->add_option("--epsilon", eb.epsilons, "Distortions to sweep");
    add_real(eb_cmd, "--C", eb.c_constant, "JL constant C");
    eb_cmd->add_option("--kind", eb.kind)->check(CLI::IsMember({"gaussian", "rademacher"}));
    eb_cmd->add_option("--seed", eb.seed);
    eb_cmd->add_option("--n-seeds", eb.n_seeds, "Consecutive seeds starting at --seed");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time exact DMD against rDMD");
    add_common(bench_cmd, bench.out);
    add_input_options(bench_cmd, bench.input);
    bench_cmd->add_option("--sizes", bench.sizes, "Synthetic sizes NxM (complex sech data)");
    bench_cmd->add_option("--methods", bench.methods, "exact_svd, random_gaussian, random_rademacher");
    bench_cmd->add_option("--L", bench.l_dim);
    bench_cmd->add_option("--repetitions", bench.repetitions);
    bench_cmd->add_option("--seed", bench.seed);

    std::vector<std::string> rev;
    try {
        const auto expanded = expand_config(args);
        rev.assign(expanded.rbegin(), expanded.rend() - (expanded.empty() ? 0 : 1));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::PathError ? kPathError
               : e.code() == ErrorCode::FormatError ? kFormatError : kInvalidParameter;
    }
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalidParameter;
    }

    Run run;
    try {
        run.threads = thread_cap_from_env();
        if (run.threads > 0) Eigen::setNbThreads(run.threads);
        CLI::App* sub = app.get_subcommands().front();
        run.command = sub->get_name();
        run.config = capture_config(*sub);
        if (sub == gen_cmd) {
            run.config["preset"] = gen.preset;
            cmd_gen(gen, run, out);
        } else if (sub == dmd_cmd) {
            cmd_dmd(dmd, run, out, err);
        } else if (sub == cmp_cmd) {
            cmd_compare(cmp, run, out, err);
        } else if (sub == eb_cmd) {
            cmd_errorbound(eb, run, out, err);
        } else {
            cmd_bench(bench, run, out, err);
        }
        run.finish();
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: FormatError: " << e.what() << '\n';
        return kFormatError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kGenericError;
    }
}

} // namespace rdmd::cli
