#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace dobrlab {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vecd = Vec<double>;
using Matd = Mat<double>;
using Veci = Vec<int>;

inline constexpr const char* kVersion = "0.1.0";

// Shared numeric tolerances. Exact arithmetic identities are held to
// `exact`, quantities that pass through a supremum/enumeration to `derived`.
struct Tol {
  static constexpr double exact = 1e-12;
  static constexpr double derived = 1e-9;
};

// Hard cap on exact enumeration: q^m configurations.
inline constexpr std::int64_t kEnumerationCap = std::int64_t{1} << 20;

// Numerically stable log(sum(exp(v))).
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const double hi = v.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((v.array() - hi).exp().sum());
}

// Total variation distance between two probability vectors.
template <typename DerivedP, typename DerivedQ>
double tv_distance(const Eigen::MatrixBase<DerivedP>& p,
                   const Eigen::MatrixBase<DerivedQ>& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace dobrlab
