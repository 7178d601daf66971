#ifndef RDMD_RANDPROJ_HPP
#define RDMD_RANDPROJ_HPP

// Johnson-Lindenstrauss sizing, projector construction and application.
//
// Random projectors are generated row by row: row i of a (kind, L, N, seed)
// projector is drawn from its own stream derive_seed(seed, "projector", i).
// A row can therefore be regenerated on demand, which is what the streaming
// application relies on to keep at most one row of P in memory.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/rng.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

enum class ProjectionKind { gaussian, rademacher, svd_u_star };

inline std::string_view to_string(ProjectionKind kind) {
    switch (kind) {
    case ProjectionKind::gaussian: return "gaussian";
    case ProjectionKind::rademacher: return "rademacher";
    case ProjectionKind::svd_u_star: return "svd_u_star";
    }
    return "unknown";
}

inline ProjectionKind projection_kind_from_string(std::string_view s) {
    if (s == "gaussian") return ProjectionKind::gaussian;
    if (s == "rademacher") return ProjectionKind::rademacher;
    if (s == "svd_u_star") return ProjectionKind::svd_u_star;
    detail::fail(ErrorCode::InvalidParameter, "unknown projection kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Dimension sizing

struct JlParams {
    double epsilon = 0.5;
    std::optional<double> delta;
    double c_constant = 2.0;
    std::uint64_t m_points = 1;
};

namespace detail {

// ceil() that ignores rounding noise of a few ulps above an integer.
inline std::size_t ceil_count(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v)))
        return static_cast<std::size_t>(std::max(1.0, r));
    return static_cast<std::size_t>(std::max(1.0, std::ceil(v)));
}

} // namespace detail

/// Smallest L with L >= C log_m / eps^2, where log_m stands for ln(M).
inline std::size_t jl_dimension_log(double log_m, double epsilon, double c_constant) {
    detail::require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidParameter, "epsilon must lie in (0,1)");
    detail::require(c_constant > 0.0, ErrorCode::InvalidParameter, "C must be positive");
    detail::require(log_m >= 0.0 && std::isfinite(log_m), ErrorCode::InvalidParameter, "ln(M) must be >= 0");
    return detail::ceil_count(c_constant * log_m / (epsilon * epsilon));
}

/// Smallest L with L >= C ln(M) / eps^2; with a failure probability delta,
/// also L >= C ln(1/delta) / eps^2 (the larger of the two is returned).
inline std::size_t jl_dimension(const JlParams& p) {
    detail::require(p.epsilon > 0.0 && p.epsilon < 1.0, ErrorCode::InvalidParameter,
                    "epsilon must lie in (0,1)");
    detail::require(p.c_constant > 0.0, ErrorCode::InvalidParameter, "C must be positive");
    detail::require(p.m_points >= 1, ErrorCode::InvalidParameter, "m_points must be positive");
    if (p.delta)
        detail::require(*p.delta > 0.0 && *p.delta < 0.5, ErrorCode::InvalidParameter,
                        "delta must lie in (0,1/2)");
    std::size_t l = jl_dimension_log(std::log(static_cast<double>(p.m_points)), p.epsilon, p.c_constant);
    if (p.delta) l = std::max(l, jl_dimension_log(std::log(1.0 / *p.delta), p.epsilon, p.c_constant));
    return l;
}

/// Distortion implied by a chosen dimension: eps = sqrt(C ln(M) / L).
inline double epsilon_for_dimension(Index l_dim, double c_constant, std::uint64_t m_points) {
    detail::require(l_dim >= 1, ErrorCode::InvalidParameter, "L must be positive");
    return std::sqrt(c_constant * std::log(static_cast<double>(m_points)) / static_cast<double>(l_dim));
}

// ---------------------------------------------------------------------------
// Projectors

template <typename Scalar = double>
class BasicProjectionOperator {
public:
    BasicProjectionOperator() = default;

    BasicProjectionOperator(ProjectionKind kind, Mat<Scalar> matrix, std::optional<std::uint64_t> seed)
        : kind_(kind), matrix_(std::move(matrix)), seed_(seed) {
        detail::require(matrix_.rows() >= 1 && matrix_.cols() >= 1, ErrorCode::InvalidParameter,
                        "projector must be at least 1x1");
        detail::require(detail::all_finite(matrix_), ErrorCode::InvalidData, "projector has non-finite entries");
        detail::require(kind_ == ProjectionKind::svd_u_star || seed_.has_value(), ErrorCode::InvalidParameter,
                        "random projectors carry a seed");
    }

    ProjectionKind kind() const noexcept { return kind_; }
    const Mat<Scalar>& matrix() const noexcept { return matrix_; }
    Index l_dim() const noexcept { return matrix_.rows(); }
    Index n_features() const noexcept { return matrix_.cols(); }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

private:
    ProjectionKind kind_ = ProjectionKind::gaussian;
    Mat<Scalar> matrix_;
    std::optional<std::uint64_t> seed_;
};

using ProjectionOperator = BasicProjectionOperator<double>;

/// A random projector described by its parameters; rows are generated on
/// demand and never stored together.
class LazyProjector {
public:
    LazyProjector(ProjectionKind kind, Index l_dim, Index n_features, std::uint64_t seed)
        : kind_(kind), l_dim_(l_dim), n_features_(n_features), seed_(seed) {
        detail::require(kind != ProjectionKind::svd_u_star, ErrorCode::InvalidParameter,
                        "SVD projectors are data-dependent and cannot be generated lazily");
        detail::require(l_dim >= 1, ErrorCode::InvalidParameter, "L must be >= 1");
        detail::require(n_features >= 1, ErrorCode::InvalidParameter, "N must be >= 1");
    }

    ProjectionKind kind() const noexcept { return kind_; }
    Index l_dim() const noexcept { return l_dim_; }
    Index n_features() const noexcept { return n_features_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Writes row i (length N) into out.
    void row(Index i, double* out) const {
        auto eng = make_engine(seed_, "projector", static_cast<std::uint64_t>(i));
        const double scale = 1.0 / std::sqrt(static_cast<double>(l_dim_));
        if (kind_ == ProjectionKind::gaussian) {
            NormalSampler normal(eng);
            for (Index k = 0; k < n_features_; ++k) out[k] = normal() * scale;
        } else {
            for (Index k = 0; k < n_features_; ++k) out[k] = random_sign(eng) * scale;
        }
    }

    ProjectionOperator materialize() const {
        RMat p(l_dim_, n_features_);
        std::vector<double> buf(static_cast<std::size_t>(n_features_));
        for (Index i = 0; i < l_dim_; ++i) {
            row(i, buf.data());
            for (Index k = 0; k < n_features_; ++k) p(i, k) = buf[static_cast<std::size_t>(k)];
        }
        return ProjectionOperator(kind_, std::move(p), seed_);
    }

private:
    ProjectionKind kind_;
    Index l_dim_;
    Index n_features_;
    std::uint64_t seed_;
};

/// Random L x N projector with entries z / sqrt(L): z standard normal
/// (gaussian) or a fair +-1 (rademacher). Deterministic in (kind, L, N, seed).
inline ProjectionOperator make_projector(ProjectionKind kind, Index l_dim, Index n_features, std::uint64_t seed) {
    return LazyProjector(kind, l_dim, n_features, seed).materialize();
}

/// P = U_L^*, the conjugate transpose of the leading L left singular vectors of x.
template <typename Scalar>
BasicProjectionOperator<Scalar> svd_projector(const BasicSnapshotMatrix<Scalar>& x, Index l_dim) {
    const Index k = std::min(x.n_features(), x.n_snapshots());
    detail::require(l_dim >= 1 && l_dim <= k, ErrorCode::InvalidParameter,
                    "SVD projector needs 1 <= L <= min(N, M) = " + std::to_string(k));
    auto svd = thin_svd(x.data(), true, false, l_dim);
    return BasicProjectionOperator<Scalar>(ProjectionKind::svd_u_star, svd.u.adjoint(), std::nullopt);
}

// ---------------------------------------------------------------------------
// Application

namespace detail {

// Dot product with a fixed accumulation order (four interleaved partial
// sums, combined pairwise). Both apply paths go through this kernel, so
// their results agree bit for bit.
template <typename A, typename B>
promote_t<A, B> fixed_dot(const A* a, const B* b, Index n) {
    if constexpr (!is_complex_v<A> && !is_complex_v<B>) {
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        Index k = 0;
        for (; k + 4 <= n; k += 4) {
            acc[0] += a[k] * b[k];
            acc[1] += a[k + 1] * b[k + 1];
            acc[2] += a[k + 2] * b[k + 2];
            acc[3] += a[k + 3] * b[k + 3];
        }
        for (; k < n; ++k) acc[0] += a[k] * b[k];
        return (acc[0] + acc[1]) + (acc[2] + acc[3]);
    } else {
        double re[4] = {0.0, 0.0, 0.0, 0.0};
        double im[4] = {0.0, 0.0, 0.0, 0.0};
        auto mac = [&](int s, const A& x, const B& y) {
            if constexpr (is_complex_v<A> && is_complex_v<B>) {
                re[s] += x.real() * y.real() - x.imag() * y.imag();
                im[s] += x.real() * y.imag() + x.imag() * y.real();
            } else if constexpr (is_complex_v<A>) {
                re[s] += x.real() * y;
                im[s] += x.imag() * y;
            } else {
                re[s] += x * y.real();
                im[s] += x * y.imag();
            }
        };
        Index k = 0;
        for (; k + 4 <= n; k += 4) {
            mac(0, a[k], b[k]);
            mac(1, a[k + 1], b[k + 1]);
            mac(2, a[k + 2], b[k + 2]);
            mac(3, a[k + 3], b[k + 3]);
        }
        for (; k < n; ++k) mac(0, a[k], b[k]);
        return cplx((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]));
    }
}

} // namespace detail

/// P * m, computed as one fixed-order dot product per output entry.
template <typename PS, typename MS>
BasicSnapshotMatrix<promote_t<PS, MS>> apply(const BasicProjectionOperator<PS>& p,
                                             const BasicSnapshotMatrix<MS>& m) {
    using R = promote_t<PS, MS>;
    detail::require(p.n_features() == m.n_features(), ErrorCode::ShapeMismatch,
                    "projector has " + std::to_string(p.n_features()) + " columns, data has " +
                        std::to_string(m.n_features()) + " rows");
    const Index l = p.l_dim(), n = m.n_features(), cols = m.n_snapshots();
    Mat<R> out(l, cols);
    Vec<PS> row(n);
    for (Index i = 0; i < l; ++i) {
        row = p.matrix().row(i).transpose();
        for (Index j = 0; j < cols; ++j) out(i, j) = detail::fixed_dot(row.data(), m.data().col(j).data(), n);
    }
    return BasicSnapshotMatrix<R>(std::move(out));
}

/// Streaming P * m: the projector is never materialised; one row of P is
/// regenerated at a time.
template <typename MS>
BasicSnapshotMatrix<MS> apply_streaming(const LazyProjector& p, const BasicSnapshotMatrix<MS>& m) {
    detail::require(p.n_features() == m.n_features(), ErrorCode::ShapeMismatch,
                    "projector/data dimension mismatch");
    const Index l = p.l_dim(), n = m.n_features(), cols = m.n_snapshots();
    Mat<MS> out(l, cols);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index i = 0; i < l; ++i) {
        p.row(i, row.data());
        for (Index j = 0; j < cols; ++j) out(i, j) = detail::fixed_dot(row.data(), m.data().col(j).data(), n);
    }
    return BasicSnapshotMatrix<MS>(std::move(out));
}

/// Streaming P * m straight from an rdmd-binary file: besides the L x M
/// output, only one row of P and one column of m are resident.
inline SnapshotMatrix apply_streaming(const LazyProjector& p, BinaryColumnReader& reader) {
    detail::require(p.n_features() == reader.n_features(), ErrorCode::ShapeMismatch,
                    "projector/data dimension mismatch");
    const Index l = p.l_dim(), n = reader.n_features(), cols = reader.n_snapshots();
    RMat out(l, cols);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index i = 0; i < l; ++i) {
        p.row(i, row.data());
        for (Index j = 0; j < cols; ++j) out(i, j) = detail::fixed_dot(row.data(), reader.column(j).data(), n);
    }
    return SnapshotMatrix(std::move(out));
}

/// Fraction of unit vectors (columns) whose squared norm is distorted by more
/// than epsilon under p.
inline double isometry_trial(const ProjectionOperator& p, const RMat& unit_vectors, double epsilon) {
    detail::require(unit_vectors.rows() == p.n_features(), ErrorCode::ShapeMismatch,
                    "vectors must have length N");
    detail::require(unit_vectors.cols() >= 1, ErrorCode::InvalidParameter, "no vectors supplied");
    for (Index j = 0; j < unit_vectors.cols(); ++j)
        detail::require(std::abs(unit_vectors.col(j).norm() - 1.0) <= 1e-12, ErrorCode::InvalidParameter,
                        "vector " + std::to_string(j) + " is not unit length");
    const RMat projected = p.matrix() * unit_vectors;
    Index violations = 0;
    for (Index j = 0; j < projected.cols(); ++j)
        if (std::abs(projected.col(j).squaredNorm() - 1.0) > epsilon) ++violations;
    return static_cast<double>(violations) / static_cast<double>(unit_vectors.cols());
}

} // namespace rdmd

#endif
