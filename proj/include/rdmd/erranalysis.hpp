#ifndef RDMD_ERRANALYSIS_HPP
#define RDMD_ERRANALYSIS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdmd/dmd.hpp"
#include "rdmd/error.hpp"
#include "rdmd/randproj.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

// ---------------------------------------------------------------------------
// One-step forecast error bound

struct ErrorRecord {
    Index t = 0;
    double err = 0.0;   // ||z' - z_hat'||
    double ub = 0.0;    // ||R z' - K_hat R z|| / (1 - eps)
};

struct ErrorReport {
    std::vector<ErrorRecord> per_snapshot;
    double epsilon = 0.0;
    Index l_dim = 0;
    Index violations = 0;

    double max_err() const {
        double m = 0.0;
        for (const auto& r : per_snapshot) m = std::max(m, r.err);
        return m;
    }
    double mean_err() const {
        double s = 0.0;
        for (const auto& r : per_snapshot) s += r.err;
        return per_snapshot.empty() ? 0.0 : s / static_cast<double>(per_snapshot.size());
    }
    double max_ub() const {
        double m = 0.0;
        for (const auto& r : per_snapshot) m = std::max(m, r.ub);
        return m;
    }
    double mean_ub() const {
        double s = 0.0;
        for (const auto& r : per_snapshot) s += r.ub;
        return per_snapshot.empty() ? 0.0 : s / static_cast<double>(per_snapshot.size());
    }
};

namespace detail {

template <typename A, typename B>
bool nearly_equal_vec(const A& a, const B& b, double rel) {
    const double scale = std::max({a.norm(), b.norm(), std::numeric_limits<double>::min()});
    return (a - b).norm() <= rel * scale;
}

} // namespace detail

/// Per-snapshot one-step error of the lifted prediction
///   z_hat' = Y (R X)^+ R z
/// against the projected-space bound. Since R z_hat' = K_hat R z, the bound
/// is ||R (z' - z_hat')|| / (1 - eps).
template <typename PS, typename S>
ErrorReport forecast_error_bound(const BasicSnapshotPair<S>& pair, const ProjectedOperator<PS, S>& op,
                                 double epsilon) {
    detail::require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidParameter, "epsilon must lie in (0,1)");
    const Index m = pair.n_snapshots();
    detail::require(op.x_l.cols() == m && op.y_l.cols() == m && op.x_l_pinv.rows() == m,
                    ErrorCode::InvalidParameter, "operator was not built from this snapshot pair");
    const auto px0 = op.project(pair.x.col(0));
    const auto pyl = op.project(pair.y.col(m - 1));
    detail::require(detail::nearly_equal_vec(px0, op.x_l.col(0), 1e-10) &&
                        detail::nearly_equal_vec(pyl, op.y_l.col(m - 1), 1e-10),
                    ErrorCode::InvalidParameter, "operator was not built from this snapshot pair");

    using V = typename ProjectedOperator<PS, S>::value_type;
    const Mat<V> lift = pair.y.data().template cast<V>() * op.x_l_pinv;   // N x L
    const Mat<V> predicted = lift * op.x_l;                                // N x M
    const Mat<V> projected_residual = op.y_l - op.k_hat * op.x_l;          // L x M

    ErrorReport rep;
    rep.epsilon = epsilon;
    rep.l_dim = op.l_dim();
    rep.per_snapshot.reserve(static_cast<std::size_t>(m));
    for (Index t = 0; t < m; ++t) {
        ErrorRecord r;
        r.t = t;
        r.err = (pair.y.data().col(t).template cast<V>() - predicted.col(t)).norm();
        r.ub = projected_residual.col(t).norm() / (1.0 - epsilon);
        if (r.err > r.ub) ++rep.violations;
        rep.per_snapshot.push_back(r);
    }
    return rep;
}

/// Error and bound for an arbitrary observable pair (z, z').
template <typename PS, typename S>
ErrorRecord one_step_error(const ProjectedOperator<PS, S>& op, const BasicSnapshotMatrix<S>& y,
                           const Vec<S>& z, const Vec<S>& z_next, double epsilon) {
    detail::require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidParameter, "epsilon must lie in (0,1)");
    using V = typename ProjectedOperator<PS, S>::value_type;
    const Vec<V> rz = op.project(z);
    const Vec<V> rz_next = op.project(z_next);
    const Vec<V> predicted = y.data().template cast<V>() * (op.x_l_pinv * rz);
    ErrorRecord r;
    r.err = (z_next.template cast<V>() - predicted).norm();
    r.ub = (rz_next - op.k_hat * rz).norm() / (1.0 - epsilon);
    return r;
}

// ---------------------------------------------------------------------------
// Spectrum matching and comparison

struct SpectrumMatching {
    std::vector<std::pair<Index, Index>> pairs;   // (index in a, index in b)
    std::vector<double> distances;
    std::vector<Index> unmatched_a;
    std::vector<Index> unmatched_b;
};

inline constexpr double kMatchCutoff = 0.5;

/// Greedy nearest-neighbour matching of eigenvalues in the complex plane.
/// Eigenvalues of a are visited in descending |lambda|; each takes the
/// closest unused eigenvalue of b, and pairs farther than `cutoff` apart stay
/// unmatched.
inline SpectrumMatching match_eigenvalues(const CVec& a, const CVec& b, double cutoff = kMatchCutoff) {
    std::vector<Index> order(static_cast<std::size_t>(a.size()));
    for (Index i = 0; i < a.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return std::abs(a[x]) > std::abs(a[y]); });
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    SpectrumMatching out;
    for (Index i : order) {
        Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(a[i] - b[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best >= 0 && best_d <= cutoff) {
            used[static_cast<std::size_t>(best)] = true;
            out.pairs.emplace_back(i, best);
            out.distances.push_back(best_d);
        } else {
            out.unmatched_a.push_back(i);
        }
    }
    for (Index j = 0; j < b.size(); ++j)
        if (!used[static_cast<std::size_t>(j)]) out.unmatched_b.push_back(j);
    return out;
}

inline SpectrumMatching match_spectra(const DmdSpectrum& a, const DmdSpectrum& b, double cutoff = kMatchCutoff) {
    return match_eigenvalues(a.eigenvalues, b.eigenvalues, cutoff);
}

/// Known modal structure z(x, t) = sum_j Phi_j(x) exp(i gamma_j t).
struct GroundTruth {
    std::vector<double> gammas;
    CMat mode_profiles;   // N x n_modes, column j = Phi_j on the grid
    double dt = 1.0;

    CVec discrete_eigenvalues() const {
        CVec out(static_cast<Index>(gammas.size()));
        for (std::size_t j = 0; j < gammas.size(); ++j)
            out[static_cast<Index>(j)] = std::exp(cplx(0.0, gammas[j] * dt));
        return out;
    }
};

struct TruthError {
    Index truth_index = 0;
    Index spectrum_index = -1;     // -1 when no eigenvalue was matched
    double omega_err = std::numeric_limits<double>::infinity();   // |omega - i gamma|
    double mode_err = std::numeric_limits<double>::infinity();    // max_x |b phi - Phi|
};

struct ComparisonReport {
    SpectrumMatching matching;
    std::vector<double> eig_abs_errors;
    std::vector<double> mode_abs_errors;
    double timing_a = 0.0;
    double timing_b = 0.0;
    std::vector<TruthError> truth_a;
    std::vector<TruthError> truth_b;
};

namespace detail {

inline double weighted_mode_gap(const DmdSpectrum& a, Index ia, const DmdSpectrum& b, Index ib) {
    return (a.modes.col(ia) * a.amplitudes[ia] - b.modes.col(ib) * b.amplitudes[ib]).cwiseAbs().maxCoeff();
}

} // namespace detail

/// Per ground-truth mode: the matched eigenvalue's frequency error and the
/// max-entry gap between b_i phi_i and the true profile.
inline std::vector<TruthError> truth_errors(const DmdSpectrum& sp, const GroundTruth& truth) {
    detail::require(truth.mode_profiles.cols() == static_cast<Index>(truth.gammas.size()),
                    ErrorCode::ShapeMismatch, "truth profiles and gammas disagree");
    detail::require(sp.rank_used == 0 || truth.mode_profiles.rows() == sp.modes.rows(),
                    ErrorCode::ShapeMismatch, "truth profiles and modes have different lengths");
    const auto m = match_eigenvalues(truth.discrete_eigenvalues(), sp.eigenvalues);
    std::vector<TruthError> out(truth.gammas.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j].truth_index = static_cast<Index>(j);
    for (const auto& [tj, si] : m.pairs) {
        auto& e = out[static_cast<std::size_t>(tj)];
        e.spectrum_index = si;
        const cplx omega = std::log(sp.eigenvalues[si]) / truth.dt;
        e.omega_err = std::abs(omega - cplx(0.0, truth.gammas[static_cast<std::size_t>(tj)]));
        e.mode_err = (sp.modes.col(si) * sp.amplitudes[si] - truth.mode_profiles.col(tj)).cwiseAbs().maxCoeff();
    }
    return out;
}

/// Matches a against b and reports eigenvalue and amplitude-weighted mode
/// discrepancies; with a ground truth, also each method's error against it.
inline ComparisonReport compare(const DmdSpectrum& a, const DmdSpectrum& b,
                                const std::optional<GroundTruth>& truth = std::nullopt, double timing_a = 0.0,
                                double timing_b = 0.0) {
    ComparisonReport rep;
    rep.matching = match_spectra(a, b);
    rep.timing_a = timing_a;
    rep.timing_b = timing_b;
    const bool same_length = a.modes.rows() == b.modes.rows();
    for (const auto& [ia, ib] : rep.matching.pairs) {
        rep.eig_abs_errors.push_back(std::abs(a.eigenvalues[ia] - b.eigenvalues[ib]));
        detail::require(same_length, ErrorCode::ShapeMismatch, "spectra have modes of different lengths");
        rep.mode_abs_errors.push_back(detail::weighted_mode_gap(a, ia, b, ib));
    }
    if (truth) {
        rep.truth_a = truth_errors(a, *truth);
        rep.truth_b = truth_errors(b, *truth);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Timing

template <typename F>
double time_seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
    detail::require(!v.empty(), ErrorCode::InvalidParameter, "median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct BenchmarkRow {
    DmdMethod method = DmdMethod::exact_svd;
    double median_s = 0.0;
    std::vector<double> samples;
};

struct BenchmarkTable {
    std::vector<BenchmarkRow> rows;
    Index l_dim = 0;
    Index n_features = 0;
    Index n_snapshots = 0;

    /// median(exact) / median(fastest random method), when both were run.
    std::optional<double> speedup() const {
        std::optional<double> exact, random;
        for (const auto& r : rows) {
            if (r.method == DmdMethod::exact_svd) exact = r.median_s;
            else random = random ? std::min(*random, r.median_s) : r.median_s;
        }
        if (!exact || !random || *random <= 0.0) return std::nullopt;
        return *exact / *random;
    }
};

/// Median wall-clock time of each method, run serially on identical input.
template <typename S>
BenchmarkTable benchmark(const BasicSnapshotPair<S>& pair, const std::vector<DmdMethod>& methods, Index l_dim,
                         int repetitions, std::uint64_t seed = 0) {
    detail::require(repetitions >= 1, ErrorCode::InvalidParameter, "repetitions must be >= 1");
    detail::require(!methods.empty(), ErrorCode::InvalidParameter, "no methods to benchmark");
    BenchmarkTable table;
    table.l_dim = l_dim;
    table.n_features = pair.n_features();
    table.n_snapshots = pair.n_snapshots();
    for (DmdMethod method : methods) {
        BenchmarkRow row;
        row.method = method;
        for (int rep = 0; rep < repetitions; ++rep) {
            row.samples.push_back(time_seconds([&] {
                switch (method) {
                case DmdMethod::exact_svd: (void)exact_dmd(pair, l_dim); break;
                case DmdMethod::random_gaussian: (void)rdmd(pair, l_dim, seed, ProjectionKind::gaussian); break;
                case DmdMethod::random_rademacher:
                    (void)rdmd(pair, l_dim, seed, ProjectionKind::rademacher);
                    break;
                }
            }));
        }
        row.median_s = median(row.samples);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace rdmd

#endif
