#pragma once
#ifndef CTCLAB_LINALG_HPP
#define CTCLAB_LINALG_HPP

// Dense complex linear algebra for finite-dimensional bipartite quantum
// systems: tensor products, partial traces, Hermitian eigensystems, null
// spaces, and the operator/trace norms.  Joint indices are A-major throughout:
// joint = iA * dimB + iB, matching the Kronecker product block layout.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ctclab/common.hpp"

namespace ctclab {

enum class Subsystem { A, B };

// Pair of tensor-factor dimensions with the joint-dimension cap enforced.
struct BipartiteSpace {
  int dimA = 1;
  int dimB = 1;

  BipartiteSpace(int a, int b) : dimA(a), dimB(b) {
    require_dim(a >= 1 && b >= 1, "BipartiteSpace: dimensions must be >= 1");
    require_dim(static_cast<long>(a) * b <= kDimensionCap,
                "BipartiteSpace: joint dimension exceeds cap");
  }

  int joint() const { return dimA * dimB; }
};

inline bool is_finite(const CMat& m) {
  return m.allFinite();
}

inline CMat dagger(const CMat& m) { return m.adjoint(); }

inline double max_abs(const CMat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Kronecker product, a-index major / b-index minor.
inline CMat tensor_product(const CMat& a, const CMat& b,
                           int cap = kDimensionCap) {
  require_dim(static_cast<long>(a.rows()) * b.rows() <= cap &&
                  static_cast<long>(a.cols()) * b.cols() <= cap,
              "tensor_product: result exceeds dimension cap");
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int ia = 0; ia < a.rows(); ++ia)
    for (int ja = 0; ja < a.cols(); ++ja)
      out.block(ia * b.rows(), ja * b.cols(), b.rows(), b.cols()) =
          a(ia, ja) * b;
  return out;
}

// Trace out one factor of an operator on the joint space.
inline CMat partial_trace(const CMat& m, const BipartiteSpace& space,
                          Subsystem traced) {
  const int dA = space.dimA, dB = space.dimB;
  require_dim(m.rows() == m.cols() && m.rows() == space.joint(),
              "partial_trace: matrix does not match the bipartite space");
  if (traced == Subsystem::A) {
    CMat out = CMat::Zero(dB, dB);
    for (int ia = 0; ia < dA; ++ia)
      out += m.block(ia * dB, ia * dB, dB, dB);
    return out;
  }
  CMat out = CMat::Zero(dA, dA);
  for (int ia = 0; ia < dA; ++ia)
    for (int ja = 0; ja < dA; ++ja) {
      cplx s = 0.0;
      for (int ib = 0; ib < dB; ++ib) s += m(ia * dB + ib, ja * dB + ib);
      out(ia, ja) = s;
    }
  return out;
}

struct Eigensystem {
  RVec values;   // ascending
  CMat vectors;  // columns, orthonormal
};

// Eigen-decomposition of a Hermitian matrix; rejects non-Hermitian input.
inline Eigensystem hermitian_eigensystem(const CMat& h,
                                         double hermTol = 1e-8) {
  require(h.rows() == h.cols(), "hermitian_eigensystem: matrix not square");
  require(is_finite(h), "hermitian_eigensystem: non-finite entries");
  require(max_abs(h - h.adjoint()) <= hermTol * (1.0 + max_abs(h)),
          "hermitian_eigensystem: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> solver(h);
  require(solver.info() == Eigen::Success,
          "hermitian_eigensystem: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Orthonormal basis (columns) of the numerical null space: all right-singular
// directions with sigma <= tol * sigma_max.
inline CMat null_space(const CMat& m, double tol = 1e-11) {
  require(is_finite(m), "null_space: non-finite entries");
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = tol * smax;
  int keep = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) ++keep;
  // Columns of V beyond the row-rank also belong to the null space when the
  // matrix is wide; for square inputs (our use) sv covers all of V.
  const int extra = static_cast<int>(m.cols()) - static_cast<int>(sv.size());
  CMat basis(m.cols(), keep + extra);
  int c = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) basis.col(c++) = svd.matrixV().col(i);
  for (int i = 0; i < extra; ++i)
    basis.col(c++) = svd.matrixV().col(sv.size() + i);
  return basis;
}

// Largest singular value.
inline double operator_norm(const CMat& m) {
  require(is_finite(m), "operator_norm: non-finite entries");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

// Sum of singular values (Schatten-1 norm).
inline double trace_norm(const CMat& m) {
  require(is_finite(m), "trace_norm: non-finite entries");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues().sum();
}

inline double frobenius_norm(const CMat& m) { return m.norm(); }

// Column-stacking vectorization and its inverse (Eigen is column-major, so
// these are reinterpretations of the same storage).
inline CVec vec(const CMat& m) {
  return Eigen::Map<const CVec>(m.data(), m.size());
}

inline CMat unvec(const CVec& v, int rows, int cols) {
  require_dim(v.size() == static_cast<long>(rows) * cols,
              "unvec: size mismatch");
  return Eigen::Map<const CMat>(v.data(), rows, cols);
}

// Unitary operator with validated isometry defect.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(CMat m, double tol = kUnitaryTol) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), "UnitaryOperator: matrix not square");
    require(m_.rows() >= 1, "UnitaryOperator: empty matrix");
    require(is_finite(m_), "UnitaryOperator: non-finite entries");
    const CMat defect =
        m_.adjoint() * m_ - CMat::Identity(m_.rows(), m_.cols());
    require(max_abs(defect) <= tol,
            "UnitaryOperator: U^dagger U deviates from the identity");
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& mat() const { return m_; }
  CMat adjoint() const { return m_.adjoint(); }

 private:
  CMat m_;
};

// Density matrix: Hermitian, unit trace, positive semidefinite.  Eigenvalues
// in [-1e-10, 0) are clipped to zero and the state renormalized; anything more
// negative is rejected.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMat m, double tol = kHermitianTol) {
    require(m.rows() == m.cols(), "DensityMatrix: matrix not square");
    require(m.rows() >= 1, "DensityMatrix: empty matrix");
    require(is_finite(m), "DensityMatrix: non-finite entries");
    const double scale = 1.0 + max_abs(m);
    require(max_abs(m - m.adjoint()) <= tol * scale,
            "DensityMatrix: matrix is not Hermitian");
    require(std::abs(m.trace() - cplx(1.0, 0.0)) <= kTraceTol * scale,
            "DensityMatrix: trace is not 1");
    CMat herm = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMat> solver(herm);
    require(solver.info() == Eigen::Success, "DensityMatrix: eigensolve failed");
    RVec ev = solver.eigenvalues();
    require(ev.minCoeff() >= kEigenClipFloor,
            "DensityMatrix: negative eigenvalue beyond the clip floor");
    bool clipped = false;
    for (int i = 0; i < ev.size(); ++i)
      if (ev(i) < 0.0) {
        ev(i) = 0.0;
        clipped = true;
      }
    if (clipped) {
      herm = solver.eigenvectors() * ev.asDiagonal() *
             solver.eigenvectors().adjoint();
      herm /= herm.trace().real();
      herm = (herm + herm.adjoint()) / 2.0;
    }
    m_ = herm;
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& mat() const { return m_; }

 private:
  CMat m_;
};

inline DensityMatrix maximally_mixed(int dim) {
  require_dim(dim >= 1 && dim <= kDimensionCap,
              "maximally_mixed: bad dimension");
  return DensityMatrix(CMat::Identity(dim, dim) / static_cast<double>(dim));
}

inline DensityMatrix pure_state(const CVec& psi) {
  require(psi.size() >= 1, "pure_state: empty vector");
  const double n = psi.norm();
  require(n > 0.0, "pure_state: zero vector");
  CVec u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

}  // namespace ctclab

#endif  // CTCLAB_LINALG_HPP
