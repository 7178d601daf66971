#ifndef RDMD_TEST_UTIL_HPP
#define RDMD_TEST_UTIL_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdmd/types.hpp"

namespace rdmd::test {

// Test-side generator, deliberately separate from the library's RNG.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    Index index(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(eng_); }

    RMat matrix(Index r, Index c) {
        RMat m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) m(i, j) = normal();
        return m;
    }
    CMat cmatrix(Index r, Index c) {
        CMat m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) m(i, j) = cplx(normal(), normal());
        return m;
    }
    RVec vector(Index n) { return matrix(n, 1).col(0); }

    /// Random rank-r N x M matrix.
    RMat low_rank(Index n, Index m, Index r) { return matrix(n, r) * matrix(r, m); }

    /// Matrix with prescribed singular values.
    RMat with_singular_values(Index n, Index m, const std::vector<double>& s) {
        const Index k = static_cast<Index>(s.size());
        Eigen::HouseholderQR<RMat> qu(matrix(n, k)), qv(matrix(m, k));
        const RMat u = qu.householderQ() * RMat::Identity(n, k);
        const RMat v = qv.householderQ() * RMat::Identity(m, k);
        RVec sv(k);
        for (Index i = 0; i < k; ++i) sv[i] = s[static_cast<std::size_t>(i)];
        return u * sv.asDiagonal() * v.transpose();
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Oracle pseudo-inverse through a complete orthogonal decomposition.
inline RMat cod_pinv(const RMat& a) {
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(a);
    return cod.pseudoInverse();
}

/// Nonzero eigenvalues of a dense matrix (|lambda| > rel * max).
inline CVec nonzero_eigenvalues(const RMat& k, double rel = 1e-8) {
    Eigen::EigenSolver<RMat> es(k, false);
    const CVec all = es.eigenvalues();
    const double mx = all.cwiseAbs().maxCoeff();
    std::vector<cplx> keep;
    for (Index i = 0; i < all.size(); ++i)
        if (std::abs(all[i]) > rel * mx) keep.push_back(all[i]);
    CVec out(static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) out[static_cast<Index>(i)] = keep[i];
    return out;
}

/// Max distance between two eigenvalue multisets under an optimal assignment
/// (exhaustive for small sizes, sorted by angle then modulus otherwise).
inline double multiset_distance(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    const Index n = a.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        double best = std::numeric_limits<double>::infinity();
        do {
            double worst = 0.0;
            for (Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[static_cast<std::size_t>(i)]]));
            best = std::min(best, worst);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    auto sorted = [](const CVec& v) {
        std::vector<cplx> s(v.data(), v.data() + v.size());
        std::sort(s.begin(), s.end(), [](cplx x, cplx y) {
            if (std::abs(x.real() - y.real()) > 1e-6) return x.real() < y.real();
            return x.imag() < y.imag();
        });
        return s;
    };
    const auto sa = sorted(a), sb = sorted(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) worst = std::max(worst, std::abs(sa[i] - sb[i]));
    return worst;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("rdmd_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace rdmd::test

#endif
