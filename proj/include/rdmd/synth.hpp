#ifndef RDMD_SYNTH_HPP
#define RDMD_SYNTH_HPP

// Deterministic dataset generators: the logistic map ensemble, the sum of
// sech-profile travelling oscillations, and embedded linear systems with a
// known spectrum.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rdmd/erranalysis.hpp"
#include "rdmd/error.hpp"
#include "rdmd/rng.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

// ---------------------------------------------------------------------------
// Logistic map x_{n+1} = a x_n (1 - x_n)

struct LogisticConfig {
    double a = 3.56994;
    Index n_init = 5000;
    Index m_steps = 300;
    Index burn_in = 10000;
    std::uint64_t seed = 0;
    /// Optional explicit initial conditions (length n_init); drawn
    /// uniformly from (0,1) when empty.
    std::vector<double> initial_conditions;
};

inline double logistic_step(double a, double x) { return a * x * (1.0 - x); }

/// N x (M+1) matrix; row i is the post-burn-in trajectory of initial condition i.
inline RMat logistic_trajectories(const LogisticConfig& cfg) {
    detail::require(cfg.a > 0.0 && cfg.a <= 4.0, ErrorCode::InvalidParameter, "logistic a must lie in (0,4]");
    detail::require(cfg.n_init >= 1 && cfg.m_steps >= 1, ErrorCode::InvalidParameter,
                    "n_init and m_steps must be >= 1");
    detail::require(cfg.burn_in >= 0, ErrorCode::InvalidParameter, "burn_in must be >= 0");
    detail::require(cfg.initial_conditions.empty() ||
                        static_cast<Index>(cfg.initial_conditions.size()) == cfg.n_init,
                    ErrorCode::InvalidParameter, "initial_conditions must have n_init entries");
    RMat out(cfg.n_init, cfg.m_steps + 1);
    for (Index i = 0; i < cfg.n_init; ++i) {
        double x;
        if (cfg.initial_conditions.empty()) {
            auto eng = make_engine(cfg.seed, "logistic.init", static_cast<std::uint64_t>(i));
            x = uniform_open01(eng);
        } else {
            x = cfg.initial_conditions[static_cast<std::size_t>(i)];
        }
        for (Index k = 0; k < cfg.burn_in; ++k) x = logistic_step(cfg.a, x);
        out(i, 0) = x;
        for (Index k = 1; k <= cfg.m_steps; ++k) out(i, k) = logistic_step(cfg.a, out(i, k - 1));
    }
    return out;
}

inline SnapshotPair gen_logistic(const LogisticConfig& cfg) { return from_trajectory(logistic_trajectories(cfg)); }

// ---------------------------------------------------------------------------
// z(x, t) = sum_j j sech(0.1 x + j) exp(i gamma_j t)

struct SechConfig {
    Index n_space = 20000;
    Index m_time = 5001;
    Index n_modes = 20;
    std::vector<double> gammas;   // empty: gamma_j = j
    double x_min = -250.0;
    double x_max = 50.0;
    double t_min = 0.0;
    double t_max = 10.0 * std::numbers::pi;

    std::vector<double> resolved_gammas() const {
        if (!gammas.empty()) return gammas;
        std::vector<double> g(static_cast<std::size_t>(n_modes));
        for (Index j = 0; j < n_modes; ++j) g[static_cast<std::size_t>(j)] = static_cast<double>(j + 1);
        return g;
    }
    double dt() const { return (t_max - t_min) / static_cast<double>(m_time - 1); }
};

inline double sech_profile(Index j, double x) {
    const double jj = static_cast<double>(j);
    return jj / std::cosh(0.1 * x + jj);
}

struct ComplexSechDataset {
    ComplexSnapshotPair pair;
    GroundTruth truth;
    RVec grid;
};

struct SechDataset {
    SnapshotPair pair;   // rows [Re z; Im z]
    GroundTruth truth;
    RVec grid;
};

namespace detail {

inline void validate(const SechConfig& cfg) {
    require(cfg.n_modes >= 1, ErrorCode::InvalidParameter, "n_modes must be >= 1");
    require(cfg.gammas.empty() || static_cast<Index>(cfg.gammas.size()) == cfg.n_modes,
            ErrorCode::InvalidParameter, "gammas must have n_modes entries");
    require(cfg.n_space >= 2 && cfg.m_time >= 2, ErrorCode::InvalidParameter, "grid needs >= 2 points per axis");
    require(cfg.x_max > cfg.x_min && cfg.t_max > cfg.t_min, ErrorCode::InvalidParameter, "empty grid range");
}

// Returns the N x m_time complex field and fills truth/grid.
inline CMat sech_field(const SechConfig& cfg, GroundTruth& truth, RVec& grid) {
    validate(cfg);
    const auto gammas = cfg.resolved_gammas();
    const double dx = (cfg.x_max - cfg.x_min) / static_cast<double>(cfg.n_space - 1);
    grid.resize(cfg.n_space);
    for (Index k = 0; k < cfg.n_space; ++k) grid[k] = cfg.x_min + static_cast<double>(k) * dx;

    truth.gammas = gammas;
    truth.dt = cfg.dt();
    truth.mode_profiles = CMat(cfg.n_space, cfg.n_modes);
    for (Index j = 0; j < cfg.n_modes; ++j)
        for (Index k = 0; k < cfg.n_space; ++k) truth.mode_profiles(k, j) = sech_profile(j + 1, grid[k]);

    CMat temporal(cfg.n_modes, cfg.m_time);
    for (Index j = 0; j < cfg.n_modes; ++j)
        for (Index n = 0; n < cfg.m_time; ++n) {
            const double t = cfg.t_min + static_cast<double>(n) * truth.dt;
            temporal(j, n) = std::exp(cplx(0.0, gammas[static_cast<std::size_t>(j)] * t));
        }
    return truth.mode_profiles * temporal;
}

} // namespace detail

/// Complex snapshots of z(x, t) on the uniform grid, with the ground-truth
/// profiles Phi_j and frequencies gamma_j.
inline ComplexSechDataset gen_sech_complex(const SechConfig& cfg) {
    GroundTruth truth;
    RVec grid;
    CMat field = detail::sech_field(cfg, truth, grid);
    auto pair = from_trajectory(field);
    return {std::move(pair), std::move(truth), std::move(grid)};
}

/// As gen_sech_complex, with the data stored as stacked [Re; Im] channels.
inline SechDataset gen_sech(const SechConfig& cfg) {
    GroundTruth truth;
    RVec grid;
    CMat field = detail::sech_field(cfg, truth, grid);
    RMat stacked(2 * field.rows(), field.cols());
    stacked.topRows(field.rows()) = field.real();
    stacked.bottomRows(field.rows()) = field.imag();
    field.resize(0, 0);
    auto pair = from_trajectory(stacked);
    return {std::move(pair), std::move(truth), std::move(grid)};
}

// ---------------------------------------------------------------------------
// Embedded linear systems x_{n+1} = A x_n

struct LinearDataset {
    SnapshotPair pair;
    CVec eigenvalues;    // eigenvalues of A (dense eigensolver)
    CMat eigenvectors;   // eigenvectors of A mapped through the embedding, N x d
    RMat embedding;      // N x d, orthonormal columns
};

/// N x d matrix with orthonormal columns from the QR of a seeded Gaussian draw.
inline RMat random_orthonormal(Index n, Index d, std::uint64_t seed, std::string_view purpose) {
    auto eng = make_engine(seed, purpose);
    NormalSampler normal(eng);
    RMat g(n, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < n; ++i) g(i, j) = normal();
    Eigen::HouseholderQR<RMat> qr(g);
    RMat q = RMat::Identity(n, d);
    qr.householderQ().applyThisOnTheLeft(q);
    return q;
}

/// Simulates M+1 states, embeds them into N dimensions through a fixed
/// random orthonormal injection and returns the shifted pair together with
/// A's eigenpairs as an oracle.
inline LinearDataset gen_linear(const RMat& a, const RVec& x0, Index n_embed, Index m, std::uint64_t seed = 0) {
    const Index d = a.rows();
    detail::require(a.cols() == d && d >= 1, ErrorCode::InvalidParameter, "A must be square");
    detail::require(d <= 50, ErrorCode::InvalidParameter, "A is limited to 50 x 50");
    detail::require(x0.size() == d, ErrorCode::ShapeMismatch, "x0 must have length d");
    detail::require(n_embed >= d, ErrorCode::InvalidParameter, "embedding dimension must be >= d");
    detail::require(m >= 1, ErrorCode::InvalidParameter, "M must be >= 1");

    RMat states(d, m + 1);
    states.col(0) = x0;
    for (Index n = 0; n < m; ++n) states.col(n + 1) = a * states.col(n);
    RMat q = random_orthonormal(n_embed, d, seed, "linear.embed");

    Eigen::EigenSolver<RMat> es(a, true);
    detail::require(es.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigensolver failed on A");
    LinearDataset out{from_trajectory(RMat(q * states)), es.eigenvalues(),
                      q.cast<cplx>() * es.eigenvectors(), std::move(q)};
    return out;
}

/// Real d x d matrix with eigenvalues of modulus in [min_modulus, max_modulus].
/// Complex pairs get angles in separate bins of (0.1, 3.0) so the spectrum
/// stays well separated; an odd d adds one positive real eigenvalue. The
/// block-diagonal form is rotated by a random orthogonal similarity.
inline RMat random_stable_matrix(Index d, std::uint64_t seed, double min_modulus = 0.9,
                                 double max_modulus = 0.99) {
    detail::require(d >= 1, ErrorCode::InvalidParameter, "d must be >= 1");
    detail::require(0.0 < min_modulus && min_modulus <= max_modulus && max_modulus < 1.0,
                    ErrorCode::InvalidParameter, "moduli must satisfy 0 < min <= max < 1");
    auto eng = make_engine(seed, "linear.spectrum");
    RMat block = RMat::Zero(d, d);
    const Index pairs = d / 2;
    const double lo = 0.1, hi = 3.0;
    const double width = (hi - lo) / static_cast<double>(std::max<Index>(pairs, 1));
    for (Index p = 0; p < pairs; ++p) {
        const double r = min_modulus + (max_modulus - min_modulus) * uniform01(eng);
        const double theta = lo + width * (static_cast<double>(p) + 0.2 + 0.6 * uniform01(eng));
        const Index k = 2 * p;
        block(k, k) = r * std::cos(theta);
        block(k, k + 1) = -r * std::sin(theta);
        block(k + 1, k) = r * std::sin(theta);
        block(k + 1, k + 1) = r * std::cos(theta);
    }
    if (d % 2) block(d - 1, d - 1) = min_modulus + (max_modulus - min_modulus) * uniform01(eng);
    const RMat o = random_orthonormal(d, d, seed, "linear.rotation");
    return o * block * o.transpose();
}

/// Block-diagonal rotations with the given periods (in samples), plus an
/// optional leading 1 for a background (infinite-period) component.
inline RMat oscillator_matrix(const std::vector<double>& periods, bool background = true) {
    const Index d = static_cast<Index>(2 * periods.size()) + (background ? 1 : 0);
    detail::require(d >= 1, ErrorCode::InvalidParameter, "no oscillators requested");
    RMat a = RMat::Zero(d, d);
    Index k = 0;
    if (background) {
        a(0, 0) = 1.0;
        k = 1;
    }
    for (double p : periods) {
        detail::require(p > 2.0, ErrorCode::InvalidParameter, "periods must exceed 2 samples");
        const double theta = 2.0 * std::numbers::pi / p;
        a(k, k) = std::cos(theta);
        a(k, k + 1) = -std::sin(theta);
        a(k + 1, k) = std::sin(theta);
        a(k + 1, k + 1) = std::cos(theta);
        k += 2;
    }
    return a;
}

} // namespace rdmd

#endif
