#ifndef RDMD_DMD_HPP
#define RDMD_DMD_HPP

// Exact, projected and randomized DMD.
//
// All three share one pipeline. Given a projector P (L x N):
//
//   X_L = P X,  Y_L = P Y,  K_hat = Y_L X_L^+          (L x L)
//   (lambda, phi_L) = eig(K_hat)
//   phi = Y X_L^+ phi_L                                 (lifted, N x 1)
//   b   = Phi^+ x_0                                     (amplitudes)
//
// exact_dmd uses P = U_L^* from the thin SVD of X; rdmd uses a seeded
// random P scaled by 1/sqrt(L).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/randproj.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

enum class DmdMethod { exact_svd, random_gaussian, random_rademacher };

inline std::string_view to_string(DmdMethod m) {
    switch (m) {
    case DmdMethod::exact_svd: return "exact_svd";
    case DmdMethod::random_gaussian: return "random_gaussian";
    case DmdMethod::random_rademacher: return "random_rademacher";
    }
    return "unknown";
}

inline DmdMethod dmd_method_from_string(std::string_view s) {
    if (s == "exact_svd") return DmdMethod::exact_svd;
    if (s == "random_gaussian") return DmdMethod::random_gaussian;
    if (s == "random_rademacher") return DmdMethod::random_rademacher;
    detail::fail(ErrorCode::InvalidParameter, "unknown DMD method '" + std::string(s) + "'");
}

inline DmdMethod method_for(ProjectionKind kind) {
    switch (kind) {
    case ProjectionKind::gaussian: return DmdMethod::random_gaussian;
    case ProjectionKind::rademacher: return DmdMethod::random_rademacher;
    case ProjectionKind::svd_u_star: return DmdMethod::exact_svd;
    }
    return DmdMethod::random_gaussian;
}

/// Finite modal decomposition g(x_t) ~ sum_i b_i phi_i lambda_i^t.
struct DmdSpectrum {
    CVec eigenvalues;             // r, descending |lambda|
    CMat modes;                   // N x r, column i lifted mode phi_i
    CVec amplitudes;              // r, b_i
    Index l_dim = 0;
    DmdMethod method = DmdMethod::exact_svd;
    Index rank_used = 0;
    double amplitude_residual = 0.0;   // ||Phi b - x_0||
    bool rank_deficient = false;       // Phi lost column rank in the fit
    double max_eig_residual = 0.0;     // max ||K_hat v - lambda v|| / ||K_hat||
};

/// The projected operator and the pieces needed to lift from it.
template <typename PS, typename S>
struct ProjectedOperator {
    using value_type = promote_t<PS, S>;

    Mat<value_type> k_hat;       // L x L, Y_L X_L^+
    Mat<value_type> x_l_pinv;    // M x L, (P X)^+
    Mat<value_type> x_l;         // L x M
    Mat<value_type> y_l;         // L x M
    // Exactly one of these describes P.
    std::optional<BasicProjectionOperator<PS>> projector;
    std::optional<LazyProjector> lazy_projector;

    Index l_dim() const noexcept { return k_hat.rows(); }

    /// P v for an N-vector v.
    template <typename V>
    Vec<promote_t<PS, typename V::Scalar>> project(const Eigen::MatrixBase<V>& v) const {
        using R = promote_t<PS, typename V::Scalar>;
        Vec<typename V::Scalar> col = v;
        Vec<R> out(l_dim());
        if (projector) {
            Vec<PS> row(projector->n_features());
            for (Index i = 0; i < l_dim(); ++i) {
                row = projector->matrix().row(i).transpose();
                out[i] = detail::fixed_dot(row.data(), col.data(), col.size());
            }
        } else {
            std::vector<double> row(static_cast<std::size_t>(lazy_projector->n_features()));
            for (Index i = 0; i < l_dim(); ++i) {
                lazy_projector->row(i, row.data());
                out[i] = detail::fixed_dot(row.data(), col.data(), col.size());
            }
        }
        return out;
    }
};

template <typename PS, typename S>
struct DmdRun {
    DmdSpectrum spectrum;
    ProjectedOperator<PS, S> op;
};

// ---------------------------------------------------------------------------
// Projected operator

namespace detail {

template <typename PS, typename S, typename V>
ProjectedOperator<PS, S> finish_operator(Mat<V> x_l, Mat<V> y_l) {
    ProjectedOperator<PS, S> op;
    op.x_l_pinv = pseudo_inverse(x_l);
    op.k_hat = y_l * op.x_l_pinv;
    op.x_l = std::move(x_l);
    op.y_l = std::move(y_l);
    return op;
}

} // namespace detail

/// K_hat = (P Y)(P X)^+, keeping (P X)^+ for lifting.
template <typename PS, typename S>
ProjectedOperator<PS, S> projected_dmd(const BasicSnapshotPair<S>& pair, const BasicProjectionOperator<PS>& p) {
    detail::require(p.n_features() == pair.n_features(), ErrorCode::ShapeMismatch,
                    "projector columns must equal the number of features");
    auto op = detail::finish_operator<PS, S>(apply(p, pair.x).data(), apply(p, pair.y).data());
    op.projector = p;
    return op;
}

/// Same as projected_dmd with a projector that is regenerated row by row.
template <typename S>
ProjectedOperator<double, S> projected_dmd_streaming(const BasicSnapshotPair<S>& pair, const LazyProjector& p) {
    detail::require(p.n_features() == pair.n_features(), ErrorCode::ShapeMismatch,
                    "projector columns must equal the number of features");
    auto op = detail::finish_operator<double, S>(apply_streaming(p, pair.x).data(),
                                                 apply_streaming(p, pair.y).data());
    op.lazy_projector = p;
    return op;
}

// ---------------------------------------------------------------------------
// Lifting

/// phi_hat = Y (P X)^+ phi_L.
template <typename PS, typename S>
CVec lift_exact(const ProjectedOperator<PS, S>& op, const BasicSnapshotMatrix<S>& y, const CVec& phi_l) {
    detail::require(phi_l.size() == op.l_dim(), ErrorCode::ShapeMismatch, "phi_L must have length L");
    detail::require(y.n_snapshots() == op.x_l_pinv.rows(), ErrorCode::ShapeMismatch,
                    "Y does not match the operator's snapshot count");
    const CVec w = op.x_l_pinv.template cast<cplx>() * phi_l;
    return times_complex(y.data(), CMat(w)).col(0);
}

/// P^+ phi_L = P^* phi_L; valid only for orthonormal-row (SVD) projectors.
template <typename PS>
CVec lift_standard(const BasicProjectionOperator<PS>& p, const CVec& phi_l) {
    detail::require(p.kind() == ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                    "standard lifting requires an SVD projector");
    detail::require(phi_l.size() == p.l_dim(), ErrorCode::ShapeMismatch, "phi_L must have length L");
    return p.matrix().template cast<cplx>().adjoint() * phi_l;
}

// ---------------------------------------------------------------------------
// Spectrum assembly

struct Eigenpairs {
    CVec values;
    CMat vectors;
};

template <typename S>
Eigenpairs eigenpairs(const Mat<S>& k) {
    Eigenpairs out;
    if (k.size() == 0) return out;
    if constexpr (is_complex_v<S>) {
        Eigen::ComplexEigenSolver<CMat> es(k, true);
        if (es.info() != Eigen::Success) detail::fail(ErrorCode::NumericalFailure, "eigensolver did not converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    } else {
        Eigen::EigenSolver<RMat> es(k, true);
        if (es.info() != Eigen::Success) detail::fail(ErrorCode::NumericalFailure, "eigensolver did not converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    }
    return out;
}

/// Indices of eigenvalues with |lambda| >= rel_cutoff * max|lambda|, sorted
/// by descending |lambda|, then descending imaginary part, then index.
inline std::vector<Index> order_eigenvalues(const CVec& values, double rel_cutoff = 1e-12) {
    std::vector<Index> idx;
    double maxabs = 0.0;
    for (Index i = 0; i < values.size(); ++i) maxabs = std::max(maxabs, std::abs(values[i]));
    if (maxabs == 0.0) return idx;
    for (Index i = 0; i < values.size(); ++i)
        if (std::abs(values[i]) >= rel_cutoff * maxabs) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        const double ma = std::abs(values[a]), mb = std::abs(values[b]);
        if (ma != mb) return ma > mb;
        if (values[a].imag() != values[b].imag()) return values[a].imag() > values[b].imag();
        return a < b;
    });
    return idx;
}

struct AmplitudeFit {
    CVec b;
    double residual = 0.0;
    bool rank_deficient = false;
};

/// Least-squares b with Phi b ~ x0 (minimum norm when Phi is rank deficient).
template <typename Derived>
AmplitudeFit amplitudes(const CMat& modes, const Eigen::MatrixBase<Derived>& x0) {
    detail::require(modes.rows() == x0.size(), ErrorCode::ShapeMismatch, "x0 length must match mode length");
    AmplitudeFit fit;
    if (modes.cols() == 0) {
        fit.b = CVec(0);
        fit.residual = x0.template cast<cplx>().norm();
        return fit;
    }
    const CVec x = x0.template cast<cplx>();
    const auto svd = thin_svd(modes, true, true);
    const double tol = auto_rank_tolerance(modes.rows(), modes.cols(), svd.s[0]);
    Index kept = 0;
    while (kept < svd.s.size() && svd.s[kept] > tol) ++kept;
    fit.rank_deficient = kept < modes.cols();
    CVec coeffs = svd.u.leftCols(kept).adjoint() * x;
    for (Index i = 0; i < kept; ++i) coeffs[i] /= svd.s[i];
    fit.b = svd.v.leftCols(kept) * coeffs;
    fit.residual = (modes * fit.b - x).norm();
    return fit;
}

/// Eigendecomposes op.k_hat, drops numerically zero eigenvalues, lifts the
/// rest through Y (P X)^+ and fits amplitudes to the first snapshot of x.
template <typename PS, typename S>
DmdSpectrum spectrum_from_operator(const ProjectedOperator<PS, S>& op, const BasicSnapshotPair<S>& pair,
                                   DmdMethod method, std::optional<Index> max_modes = std::nullopt) {
    DmdSpectrum sp;
    sp.method = method;
    sp.l_dim = op.l_dim();
    const Eigenpairs eig = eigenpairs(op.k_hat);
    auto order = order_eigenvalues(eig.values);
    if (max_modes && static_cast<Index>(order.size()) > *max_modes) order.resize(static_cast<std::size_t>(*max_modes));
    const Index r = static_cast<Index>(order.size());

    sp.eigenvalues.resize(r);
    CMat phi_l(op.l_dim(), r);
    const double knorm = op.k_hat.norm();
    for (Index c = 0; c < r; ++c) {
        const Index i = order[static_cast<std::size_t>(c)];
        sp.eigenvalues[c] = eig.values[i];
        phi_l.col(c) = eig.vectors.col(i);
        const CVec resid = op.k_hat.template cast<cplx>() * phi_l.col(c) - eig.values[i] * phi_l.col(c);
        const double rel = knorm > 0.0 ? resid.norm() / (knorm * phi_l.col(c).norm()) : 0.0;
        sp.max_eig_residual = std::max(sp.max_eig_residual, rel);
    }
    if (!std::isfinite(sp.max_eig_residual) || sp.max_eig_residual > 1e-6)
        detail::fail(ErrorCode::NumericalFailure, "eigenpairs fail the residual check");

    const CMat w = op.x_l_pinv.template cast<cplx>() * phi_l;
    sp.modes = times_complex(pair.y.data(), w);
    sp.rank_used = r;

    const auto fit = amplitudes(sp.modes, pair.x.col(0));
    sp.amplitudes = fit.b;
    sp.amplitude_residual = fit.residual;
    sp.rank_deficient = fit.rank_deficient;
    return sp;
}

// ---------------------------------------------------------------------------
// Drivers

/// Exact DMD: P = U_L^* from the thin SVD of X, modes lifted by Y V S^-1 phi_L.
template <typename S>
DmdRun<S, S> exact_dmd_run(const BasicSnapshotPair<S>& pair, Index l_dim,
                           std::optional<Index> max_modes = std::nullopt) {
    const Index k = std::min(pair.n_features(), pair.n_snapshots());
    detail::require(l_dim >= 1 && l_dim <= k, ErrorCode::InvalidParameter,
                    "exact DMD needs 1 <= L <= min(N, M) = " + std::to_string(k));
    auto p = svd_projector(pair.x, l_dim);
    DmdRun<S, S> run{{}, projected_dmd(pair, p)};
    run.spectrum = spectrum_from_operator(run.op, pair, DmdMethod::exact_svd, max_modes);
    return run;
}

template <typename S>
DmdSpectrum exact_dmd(const BasicSnapshotPair<S>& pair, Index l_dim) {
    return exact_dmd_run(pair, l_dim).spectrum;
}

enum class ApplyMode { in_memory, streaming };

/// Randomized DMD with a seeded Gaussian or Rademacher projector.
template <typename S>
DmdRun<double, S> rdmd_run(const BasicSnapshotPair<S>& pair, Index l_dim, std::uint64_t seed,
                           ProjectionKind kind = ProjectionKind::gaussian, ApplyMode mode = ApplyMode::in_memory,
                           std::optional<Index> max_modes = std::nullopt) {
    detail::require(l_dim >= 1, ErrorCode::InvalidParameter, "rDMD needs L >= 1");
    detail::require(kind != ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                    "rDMD needs a random projector kind");
    const LazyProjector lazy(kind, l_dim, pair.n_features(), seed);
    DmdRun<double, S> run;
    run.op = mode == ApplyMode::in_memory ? projected_dmd(pair, lazy.materialize())
                                          : projected_dmd_streaming(pair, lazy);
    run.spectrum = spectrum_from_operator(run.op, pair, method_for(kind), max_modes);
    return run;
}

template <typename S>
DmdSpectrum rdmd(const BasicSnapshotPair<S>& pair, Index l_dim, std::uint64_t seed,
                 ProjectionKind kind = ProjectionKind::gaussian) {
    return rdmd_run(pair, l_dim, seed, kind).spectrum;
}

// ---------------------------------------------------------------------------
// Reconstruction and forecasting

/// T with T(i, j) = lambda_i^j for j = 0..M-1, built by repeated multiplication.
inline CMat vandermonde(const CVec& eigenvalues, Index m) {
    detail::require(m >= 1, ErrorCode::InvalidParameter, "M must be >= 1");
    CMat t(eigenvalues.size(), m);
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        t(i, 0) = cplx(1.0, 0.0);
        for (Index j = 1; j < m; ++j) t(i, j) = t(i, j - 1) * eigenvalues[i];
    }
    return t;
}

/// (Phi diag(b)) T, an N x M matrix. Zero modes give a zero matrix.
inline CMat reconstruct(const DmdSpectrum& sp, Index m) {
    if (sp.rank_used == 0) return CMat::Zero(sp.modes.rows(), m);
    return (sp.modes * sp.amplitudes.asDiagonal()) * vandermonde(sp.eigenvalues, m);
}

/// ||X - reconstruct|| / ||X|| in the Frobenius norm.
template <typename S>
double reconstruction_error(const DmdSpectrum& sp, const BasicSnapshotMatrix<S>& x) {
    const CMat rec = reconstruct(sp, x.n_snapshots());
    const double denom = x.data().norm();
    const double num = (x.data().template cast<cplx>() - rec).norm();
    return denom > 0.0 ? num / denom : num;
}

/// sum_i b_i phi_i lambda_i^t with lambda^t = exp(t log lambda) (principal log).
inline CVec forecast(const DmdSpectrum& sp, double t) {
    detail::require(t >= 0.0, ErrorCode::InvalidParameter, "forecast time must be >= 0");
    CVec weights(sp.rank_used);
    for (Index i = 0; i < sp.rank_used; ++i) {
        const cplx lam = sp.eigenvalues[i];
        cplx power;
        if (lam == cplx(0.0, 0.0)) power = t == 0.0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
        else power = std::exp(t * std::log(lam));
        weights[i] = sp.amplitudes[i] * power;
    }
    if (sp.rank_used == 0) return CVec::Zero(sp.modes.rows());
    return sp.modes * weights;
}

// ---------------------------------------------------------------------------
// Frequencies and periods

struct ModeFrequency {
    Index index = 0;       // position in the spectrum
    cplx lambda;
    cplx omega;            // log(lambda) / dt
    double period = 0.0;   // 2 pi / Im(omega); +inf for a background mode
};

inline std::vector<ModeFrequency> continuous_spectrum(const CVec& eigenvalues, double dt = 1.0) {
    detail::require(dt > 0.0, ErrorCode::InvalidParameter, "dt must be positive");
    std::vector<ModeFrequency> out;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        const cplx lam = eigenvalues[i];
        if (lam == cplx(0.0, 0.0)) continue; // omega undefined
        ModeFrequency f;
        f.index = i;
        f.lambda = lam;
        f.omega = std::log(lam) / dt;
        f.period = f.omega.imag() == 0.0 ? std::numeric_limits<double>::infinity()
                                         : 2.0 * std::numbers::pi / f.omega.imag();
        out.push_back(f);
    }
    return out;
}

inline std::vector<ModeFrequency> continuous_spectrum(const DmdSpectrum& sp, double dt = 1.0) {
    return continuous_spectrum(sp.eigenvalues, dt);
}

/// Mode whose |period| is closest to target, or nullopt when none lies within
/// rel_tol of it.
inline std::optional<ModeFrequency> select_by_period(const std::vector<ModeFrequency>& freqs, double target,
                                                     double rel_tol) {
    std::optional<ModeFrequency> best;
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto& f : freqs) {
        const double err = std::abs(std::abs(f.period) - target) / target;
        if (err < best_err) {
            best_err = err;
            best = f;
        }
    }
    if (!best || best_err > rel_tol) return std::nullopt;
    return best;
}

} // namespace rdmd

#endif
