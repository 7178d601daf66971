#ifndef RDMD_IO_HPP
#define RDMD_IO_HPP

// JSON/CSV persistence for spectra, projectors, ground truth and reports.
//
// Spectrum directory layout:
//   spectrum.json    {method, l_dim, rank_used, dt, eigenvalues: [[re,im],...],
//                     amplitudes: [[re,im],...], ...}
//   modes_re.rdmd    real part of the N x r mode matrix (rdmd-binary)
//   modes_im.rdmd    imaginary part
//
// Projector: <stem>.rdmd holds the L x N matrix, <stem>.json {kind, l_dim, seed}.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>

#include "json.hpp"

#include "rdmd/dmd.hpp"
#include "rdmd/erranalysis.hpp"
#include "rdmd/error.hpp"
#include "rdmd/randproj.hpp"
#include "rdmd/snapshot.hpp"

namespace rdmd {

using Json = nlohmann::ordered_json;

namespace fs = std::filesystem;

inline void write_json(const Json& j, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << j.dump(2) << '\n';
}

inline Json read_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) detail::fail(ErrorCode::PathError, "cannot open " + path.string());
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::FormatError, path.string() + ": " + e.what());
    }
}

inline Json complex_list(const CVec& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
    return out;
}

inline CVec complex_list_from(const Json& j) {
    if (!j.is_array()) detail::fail(ErrorCode::FormatError, "expected an array of [re, im] pairs");
    CVec v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_array() || e.size() != 2) detail::fail(ErrorCode::FormatError, "expected [re, im]");
        v[static_cast<Index>(i)] = cplx(e[0].get<double>(), e[1].get<double>());
    }
    return v;
}

/// JSON-safe number: infinities and NaN become strings.
inline Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

// ---------------------------------------------------------------------------
// Spectra

inline void save_spectrum(const DmdSpectrum& sp, const fs::path& dir, double dt = 1.0) {
    if (!fs::is_directory(dir)) detail::fail(ErrorCode::PathError, "no such directory " + dir.string());
    Json j;
    j["method"] = to_string(sp.method);
    j["l_dim"] = sp.l_dim;
    j["rank_used"] = sp.rank_used;
    j["dt"] = dt;
    j["eigenvalues"] = complex_list(sp.eigenvalues);
    j["amplitudes"] = complex_list(sp.amplitudes);
    j["n_features"] = sp.modes.rows();
    j["amplitude_residual"] = sp.amplitude_residual;
    j["rank_deficient"] = sp.rank_deficient;
    j["modes_re"] = "modes_re.rdmd";
    j["modes_im"] = "modes_im.rdmd";
    write_json(j, dir / "spectrum.json");
    if (sp.rank_used > 0) {
        save_binary(sp.modes.real(), dir / "modes_re.rdmd");
        save_binary(sp.modes.imag(), dir / "modes_im.rdmd");
    }
}

struct LoadedSpectrum {
    DmdSpectrum spectrum;
    double dt = 1.0;
};

inline LoadedSpectrum load_spectrum(const fs::path& dir) {
    const Json j = read_json(dir / "spectrum.json");
    LoadedSpectrum out;
    try {
        auto& sp = out.spectrum;
        sp.method = dmd_method_from_string(j.at("method").get<std::string>());
        sp.l_dim = j.at("l_dim").get<Index>();
        sp.rank_used = j.at("rank_used").get<Index>();
        out.dt = j.value("dt", 1.0);
        sp.eigenvalues = complex_list_from(j.at("eigenvalues"));
        sp.amplitudes = complex_list_from(j.at("amplitudes"));
        sp.amplitude_residual = j.value("amplitude_residual", 0.0);
        sp.rank_deficient = j.value("rank_deficient", false);
        if (sp.eigenvalues.size() != sp.rank_used || sp.amplitudes.size() != sp.rank_used)
            detail::fail(ErrorCode::FormatError, "spectrum.json lengths disagree with rank_used");
        if (sp.rank_used > 0) {
            const RMat re = load_binary(dir / j.at("modes_re").get<std::string>());
            const RMat im = load_binary(dir / j.at("modes_im").get<std::string>());
            if (re.rows() != im.rows() || re.cols() != sp.rank_used || im.cols() != sp.rank_used)
                detail::fail(ErrorCode::FormatError, "mode files disagree with rank_used");
            sp.modes = CMat(re.rows(), re.cols());
            sp.modes.real() = re;
            sp.modes.imag() = im;
        } else {
            sp.modes = CMat(j.value("n_features", Index{0}), 0);
        }
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::FormatError, std::string("spectrum.json: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projectors

inline void save_projector(const ProjectionOperator& p, const fs::path& stem) {
    save_binary(p.matrix(), fs::path(stem).replace_extension(".rdmd"));
    Json j;
    j["kind"] = to_string(p.kind());
    j["l_dim"] = p.l_dim();
    if (p.seed()) j["seed"] = *p.seed();
    else j["seed"] = nullptr;
    write_json(j, fs::path(stem).replace_extension(".json"));
}

inline ProjectionOperator load_projector(const fs::path& stem) {
    const Json j = read_json(fs::path(stem).replace_extension(".json"));
    RMat m = load_binary(fs::path(stem).replace_extension(".rdmd"));
    try {
        const auto kind = projection_kind_from_string(j.at("kind").get<std::string>());
        if (j.at("l_dim").get<Index>() != m.rows())
            detail::fail(ErrorCode::FormatError, "sidecar l_dim disagrees with matrix");
        std::optional<std::uint64_t> seed;
        if (!j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
        return ProjectionOperator(kind, std::move(m), seed);
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::FormatError, std::string("projector sidecar: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Ground truth (truth.json + truth_modes_{re,im}.rdmd)

inline void save_truth(const GroundTruth& truth, const fs::path& dir, bool complex_stacked) {
    Json j;
    j["gammas"] = truth.gammas;
    j["dt"] = truth.dt;
    j["complex_stacked"] = complex_stacked;
    j["n_modes"] = truth.gammas.size();
    j["modes_re"] = "truth_modes_re.rdmd";
    j["modes_im"] = "truth_modes_im.rdmd";
    write_json(j, dir / "truth.json");
    save_binary(truth.mode_profiles.real(), dir / "truth_modes_re.rdmd");
    save_binary(truth.mode_profiles.imag(), dir / "truth_modes_im.rdmd");
}

struct LoadedTruth {
    GroundTruth truth;
    bool complex_stacked = false;
};

inline LoadedTruth load_truth(const fs::path& dir) {
    const Json j = read_json(dir / "truth.json");
    LoadedTruth out;
    try {
        out.truth.gammas = j.at("gammas").get<std::vector<double>>();
        out.truth.dt = j.at("dt").get<double>();
        out.complex_stacked = j.value("complex_stacked", false);
        const RMat re = load_binary(dir / j.at("modes_re").get<std::string>());
        const RMat im = load_binary(dir / j.at("modes_im").get<std::string>());
        out.truth.mode_profiles = CMat(re.rows(), re.cols());
        out.truth.mode_profiles.real() = re;
        out.truth.mode_profiles.imag() = im;
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::FormatError, std::string("truth.json: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const ErrorReport& r) {
    Json j;
    j["epsilon"] = r.epsilon;
    j["l_dim"] = r.l_dim;
    j["violations"] = r.violations;
    j["max_err"] = r.max_err();
    j["mean_err"] = r.mean_err();
    j["max_ub"] = number(r.max_ub());
    j["mean_ub"] = number(r.mean_ub());
    Json rows = Json::array();
    for (const auto& rec : r.per_snapshot) rows.push_back({{"t", rec.t}, {"err", rec.err}, {"ub", number(rec.ub)}});
    j["per_snapshot"] = std::move(rows);
    return j;
}

inline void write_error_csv(const ErrorReport& r, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << "t,err,ub\n";
    for (const auto& rec : r.per_snapshot)
        os << rec.t << ',' << format_double(rec.err) << ',' << format_double(rec.ub) << '\n';
}

inline Json to_json(const SpectrumMatching& m) {
    Json pairs = Json::array();
    for (std::size_t k = 0; k < m.pairs.size(); ++k)
        pairs.push_back({{"a", m.pairs[k].first}, {"b", m.pairs[k].second}, {"distance", m.distances[k]}});
    return {{"pairs", pairs}, {"unmatched_a", m.unmatched_a}, {"unmatched_b", m.unmatched_b}};
}

inline Json to_json(const std::vector<TruthError>& errs) {
    Json out = Json::array();
    for (const auto& e : errs)
        out.push_back({{"j", e.truth_index + 1},
                       {"spectrum_index", e.spectrum_index},
                       {"omega_err", number(e.omega_err)},
                       {"mode_err", number(e.mode_err)}});
    return out;
}

inline Json to_json(const ComparisonReport& r) {
    Json j;
    j["matching"] = to_json(r.matching);
    j["eig_abs_errors"] = r.eig_abs_errors;
    j["mode_abs_errors"] = r.mode_abs_errors;
    j["timing_a"] = r.timing_a;
    j["timing_b"] = r.timing_b;
    if (!r.truth_a.empty() || !r.truth_b.empty()) {
        j["truth_a"] = to_json(r.truth_a);
        j["truth_b"] = to_json(r.truth_b);
    }
    return j;
}

/// Per matched mode: index k, eigenvalue gap and amplitude-weighted mode gap.
inline void write_comparison_csv(const ComparisonReport& r, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << "j,a_index,b_index,eig_err,mode_err\n";
    for (std::size_t k = 0; k < r.matching.pairs.size(); ++k)
        os << k + 1 << ',' << r.matching.pairs[k].first << ',' << r.matching.pairs[k].second << ','
           << format_double(r.eig_abs_errors[k]) << ',' << format_double(r.mode_abs_errors[k]) << '\n';
}

inline void write_truth_csv(const ComparisonReport& r, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << "j,omega_err_a,mode_err_a,omega_err_b,mode_err_b\n";
    for (std::size_t k = 0; k < r.truth_a.size(); ++k)
        os << k + 1 << ',' << format_double(r.truth_a[k].omega_err) << ',' << format_double(r.truth_a[k].mode_err)
           << ',' << format_double(r.truth_b[k].omega_err) << ',' << format_double(r.truth_b[k].mode_err) << '\n';
}

inline Json to_json(const BenchmarkTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"method", to_string(r.method)}, {"median_s", r.median_s}, {"samples", r.samples}});
    Json j{{"n_features", t.n_features}, {"n_snapshots", t.n_snapshots}, {"l_dim", t.l_dim}, {"rows", rows}};
    const auto s = t.speedup();
    j["exact_over_random"] = s ? Json(*s) : Json(nullptr);
    return j;
}

} // namespace rdmd

#endif
