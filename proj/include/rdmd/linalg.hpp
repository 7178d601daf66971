#ifndef RDMD_LINALG_HPP
#define RDMD_LINALG_HPP

#include <algorithm>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "rdmd/error.hpp"
#include "rdmd/snapshot.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

template <typename Scalar>
struct ThinSvd {
    Mat<Scalar> u;     // rows x k, empty unless requested
    RVec s;            // k = min(rows, cols), descending
    Mat<Scalar> v;     // cols x k, empty unless requested
};

/// Thin SVD. Tall inputs are reduced with a Householder QR first, so the
/// bidiagonalisation only touches the small triangular factor. When `u_cols`
/// is set, only that many leading left singular vectors are formed.
template <typename Derived>
ThinSvd<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& a, bool want_u, bool want_v,
                                           std::optional<Index> u_cols = std::nullopt) {
    using S = typename Derived::Scalar;
    const Index rows = a.rows(), cols = a.cols();
    const Index k = std::min(rows, cols);
    const Index ku = u_cols ? std::min(*u_cols, k) : k;
    ThinSvd<S> out;
    if (k == 0) return out;

    unsigned opts = 0;
    if (want_u) opts |= Eigen::ComputeThinU;
    if (want_v) opts |= Eigen::ComputeThinV;

    if (rows > 2 * cols) {
        Eigen::HouseholderQR<Mat<S>> qr(a);
        Mat<S> r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
        Eigen::BDCSVD<Mat<S>> svd(r, opts);
        if (svd.info() != Eigen::Success) detail::fail(ErrorCode::NumericalFailure, "SVD did not converge");
        out.s = svd.singularValues();
        if (want_v) out.v = svd.matrixV();
        if (want_u) {
            Mat<S> u = Mat<S>::Zero(rows, ku);
            u.topRows(cols) = svd.matrixU().leftCols(ku);
            qr.householderQ().applyThisOnTheLeft(u);
            out.u = std::move(u);
        }
    } else {
        Eigen::BDCSVD<Mat<S>> svd(a, opts);
        if (svd.info() != Eigen::Success) detail::fail(ErrorCode::NumericalFailure, "SVD did not converge");
        out.s = svd.singularValues();
        if (want_u) out.u = svd.matrixU().leftCols(ku);
        if (want_v) out.v = svd.matrixV();
    }
    if (!out.s.allFinite()) detail::fail(ErrorCode::NumericalFailure, "SVD produced non-finite values");
    return out;
}

template <typename Derived>
RVec singular_values(const Eigen::MatrixBase<Derived>& a) {
    return thin_svd(a, false, false).s;
}

/// Default rank cutoff: max(rows, cols) * machine epsilon * sigma_max.
inline double auto_rank_tolerance(Index rows, Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

/// Count of singular values strictly above rel_threshold * sigma_max.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& a, double rel_threshold) {
    const RVec s = singular_values(a);
    if (s.size() == 0 || s[0] == 0.0) return 0;
    return static_cast<Index>((s.array() > rel_threshold * s[0]).count());
}

/// Moore-Penrose pseudo-inverse through a thin SVD. Singular values at or
/// below `rank_tol` (default: auto_rank_tolerance) are treated as zero.
template <typename Derived>
Mat<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& a,
                                             std::optional<double> rank_tol = std::nullopt) {
    using S = typename Derived::Scalar;
    detail::require(detail::all_finite(a), ErrorCode::InvalidData, "pseudo_inverse: non-finite input");
    if (a.size() == 0) return Mat<S>::Zero(a.cols(), a.rows());
    const auto svd = thin_svd(a, true, true);
    const double smax = svd.s.size() ? svd.s[0] : 0.0;
    const double tol = rank_tol ? *rank_tol : auto_rank_tolerance(a.rows(), a.cols(), smax);
    Index kept = 0;
    while (kept < svd.s.size() && svd.s[kept] > tol) ++kept;
    if (kept == 0) return Mat<S>::Zero(a.cols(), a.rows());
    const RVec inv = svd.s.head(kept).cwiseInverse();
    return svd.v.leftCols(kept) * inv.asDiagonal() * svd.u.leftCols(kept).adjoint();
}

/// Y * W with complex W; a real Y is never copied into a complex matrix.
inline CMat times_complex(const RMat& y, const CMat& w) {
    CMat out(y.rows(), w.cols());
    out.real() = y * w.real();
    out.imag() = y * w.imag();
    return out;
}

inline CMat times_complex(const CMat& y, const CMat& w) { return y * w; }

} // namespace rdmd

#endif
