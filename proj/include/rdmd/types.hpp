#ifndef RDMD_TYPES_HPP
#define RDMD_TYPES_HPP

#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace rdmd {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RMat = Mat<double>;
using CMat = Mat<cplx>;
using RVec = Vec<double>;
using CVec = Vec<cplx>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Scalar type of a product of an A and a B (double * complex -> complex).
template <typename A, typename B>
using promote_t = std::conditional_t<is_complex_v<A> || is_complex_v<B>, cplx, double>;

} // namespace rdmd

#endif
