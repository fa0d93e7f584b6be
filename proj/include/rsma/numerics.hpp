#pragma once

// Small dense complex kernels used by the precoders. Everything here is a
// template over the Eigen expression type so callers can pass blocks, maps
// and column views without copying.

#include <cmath>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "rsma/error.hpp"

namespace rsma {

using Eigen::Index;
using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

template <typename Derived>
using PlainMatrixOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Derived>
using PlainVectorOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;

/// Sum over n of conj(a_n) * b_n.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hermitian_inner(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size() || a.size() < 1) {
    throw DimensionError("hermitian_inner: length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  return a.dot(b);
}

/// Right pseudo-inverse G = H^H (H H^H)^{-1} of a wide or square full-row-rank H,
/// so that H * G is the rows x rows identity.
///
/// The Gram matrix is declared singular when its smallest eigenvalue falls below
/// 1e-12 times its largest; more rows than columns is always singular.
template <typename Derived>
PlainMatrixOf<Derived> pseudo_inverse(const Eigen::MatrixBase<Derived>& H) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (H.rows() < 1 || H.cols() < 1) {
    throw DimensionError("pseudo_inverse: empty matrix");
  }
  if (H.rows() > H.cols()) {
    throw SingularityError("pseudo_inverse: " + std::to_string(H.rows()) + " rows exceed " +
                           std::to_string(H.cols()) + " columns, no right inverse exists");
  }
  const PlainMatrixOf<Derived> gram = H * H.adjoint();
  const Eigen::SelfAdjointEigenSolver<PlainMatrixOf<Derived>> eig(gram, Eigen::EigenvaluesOnly);
  const auto& lambda = eig.eigenvalues();  // ascending
  const Real largest = lambda(lambda.size() - 1);
  if (!(largest > Real(0)) || lambda(0) < Real(1e-12) * largest) {
    throw SingularityError("pseudo_inverse: Gram matrix is rank deficient");
  }
  return H.adjoint() * gram.partialPivLu().inverse();
}

struct PowerIterationOptions {
  int max_iterations = 10000;
  double rayleigh_tolerance = 1e-12;  // relative change of the Rayleigh quotient
  double step_tolerance = 1e-12;      // norm of the change in the iterate
  double tie_ratio = 1e-9;            // lambda_2 >= (1 - tie_ratio) * lambda_1 is a tie
};

namespace detail {

// Rotates v so that its first non-negligible entry is real and positive.
template <typename Vec>
void fix_phase(Vec& v) {
  using Real = typename Eigen::NumTraits<typename Vec::Scalar>::Real;
  for (Index i = 0; i < v.size(); ++i) {
    const Real mag = std::abs(v(i));
    if (mag > Real(1e-12)) {
      v *= std::conj(v(i)) / mag;
      v(i) = typename Vec::Scalar(std::real(v(i)), Real(0));
      return;
    }
  }
}

template <typename Mat, typename Vec>
typename Eigen::NumTraits<typename Mat::Scalar>::Real rayleigh(const Mat& A, const Vec& v) {
  return std::real(v.dot(A * v));
}

// Plain power iteration on a Hermitian PSD matrix. Returns false if the
// iterate collapsed to zero (start vector in the null space).
template <typename Mat, typename Vec>
bool power_iterate(const Mat& A, Vec& v, const PowerIterationOptions& opts) {
  using Real = typename Eigen::NumTraits<typename Mat::Scalar>::Real;
  Real lambda_prev = rayleigh(A, v);
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vec w = A * v;
    const Real nrm = w.norm();
    if (!(nrm > Real(0))) {
      return false;
    }
    w /= nrm;
    const Real lambda = rayleigh(A, w);
    const Real step = (w - v).norm();
    v = std::move(w);
    const bool rq_done = std::abs(lambda - lambda_prev) < Real(opts.rayleigh_tolerance) * std::abs(lambda);
    if (rq_done && step < Real(opts.step_tolerance)) {
      break;
    }
    lambda_prev = lambda;
  }
  return true;
}

}  // namespace detail

/// Unit-norm u maximising ||u^H H||, with the first non-zero entry real positive.
///
/// Power iteration on H H^H from the all-ones start. When the top two
/// eigenvalues of H H^H are tied, the iteration restarts from the
/// lowest-index standard basis vector that is not orthogonal to the dominant
/// eigenspace, so e.g. the identity yields e_1.
template <typename Derived>
PlainVectorOf<Derived> dominant_left_singular_vector(const Eigen::MatrixBase<Derived>& H,
                                                     const PowerIterationOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Vec = PlainVectorOf<Derived>;
  using Mat = PlainMatrixOf<Derived>;

  if (H.size() == 0 || !(H.cwiseAbs().maxCoeff() > Real(0))) {
    throw DegenerateInputError("dominant_left_singular_vector: zero matrix");
  }
  const Index n = H.rows();
  const Mat A = H * H.adjoint();

  bool tie = false;
  Real lambda_max = 0;
  if (n >= 2) {
    const Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
    lambda_max = eig.eigenvalues()(n - 1);
    tie = eig.eigenvalues()(n - 2) >= (Real(1) - Real(opts.tie_ratio)) * lambda_max;
  }

  if (!tie) {
    Vec v = Vec::Constant(n, Scalar(Real(1) / std::sqrt(Real(n))));
    if (detail::power_iterate(A, v, opts) &&
        (n < 2 || detail::rayleigh(A, v) >= (Real(1) - Real(opts.tie_ratio)) * lambda_max)) {
      detail::fix_phase(v);
      return v;
    }
    // The all-ones start had no component along the dominant direction.
  }

  for (Index k = 0; k < n; ++k) {
    Vec v = Vec::Unit(n, k);
    if (!detail::power_iterate(A, v, opts)) {
      continue;
    }
    if (n < 2 || detail::rayleigh(A, v) >= (Real(1) - Real(opts.tie_ratio)) * lambda_max) {
      detail::fix_phase(v);
      return v;
    }
  }
  throw DegenerateInputError("dominant_left_singular_vector: power iteration did not reach the dominant subspace");
}

}  // namespace rsma
