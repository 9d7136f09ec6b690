#pragma once
#ifndef CTCLAB_EXTENSION_HPP
#define CTCLAB_EXTENSION_HPP

// Approximately invariant joint extensions.
//
// Given a joint unitary U, a fixed state rhoA on factor A and a seed state on
// factor B, iterate
//
//   phi_1     = rhoA (x) seedB
//   phi_{n+1} = rhoA (x) Tr_A( U phi_n U^dagger )
//
// and average omegaTilde_N = (1/N) sum_{n=1..N} phi_n.  Every phi_n is a
// product state, so the average is separable by construction, its A-marginal
// is exactly rhoA, and its invariance defect under conjugation by U
// telescopes: for an observable b on factor B,
//
//   omegaTilde_N( U^+ (1(x)b) U - 1(x)b )
//     = (1/N) tr( (phi_{N+1} - phi_1) (1(x)b) ),
//
// which is bounded by 2 ||b|| / N.
//
// Convention: in this module states evolve as rho -> U rho U^dagger and
// algebra elements as b -> U^+ b U (the dual pairing tr(U rho U^+ b) =
// tr(rho U^+ b U) is pinned by tests).  Note this is adjoint to the
// convention of the dctc module; the induced seed recursion here equals the
// dctc channel built from U^dagger.

#include <utility>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/linalg.hpp"

namespace ctclab::extension {

// Heisenberg transform of an algebra element.
inline CMat u_transform(const UnitaryOperator& u, const CMat& c) {
  require_dim(c.rows() == u.dim() && c.cols() == u.dim(),
              "u_transform: operator dimension mismatch");
  return u.adjoint() * c * u.mat();
}

inline CMat embed_b(const CMat& b, const BipartiteSpace& space) {
  require_dim(b.rows() == space.dimB && b.cols() == space.dimB,
              "embed_b: operator does not live on factor B");
  return tensor_product(CMat(CMat::Identity(space.dimA, space.dimA)), b);
}

inline CMat embed_a(const CMat& a, const BipartiteSpace& space) {
  require_dim(a.rows() == space.dimA && a.cols() == space.dimA,
              "embed_a: operator does not live on factor A");
  return tensor_product(a, CMat(CMat::Identity(space.dimB, space.dimB)));
}

namespace detail {

inline CMat extension_step(const UnitaryOperator& u, const CMat& rhoA,
                           const BipartiteSpace& space, const CMat& phi) {
  const CMat evolved = u.mat() * phi * u.adjoint();
  return tensor_product(rhoA, partial_trace(evolved, space, Subsystem::A));
}

}  // namespace detail

struct ExtensionState {
  BipartiteSpace space;
  long length = 0;  // N
  CMat first;       // phi_1
  CMat next;        // phi_{N+1}
  CMat omegaTilde;  // (1/N) sum_{n=1..N} phi_n
};

// Streaming construction of omegaTilde_N (sequence itself is not stored).
inline ExtensionState run_extension(const UnitaryOperator& u,
                                    const DensityMatrix& rhoA,
                                    const DensityMatrix& seedB, long steps) {
  require(steps >= 1, "run_extension: need at least one step");
  BipartiteSpace space{rhoA.dim(), seedB.dim()};
  require_dim(u.dim() == space.joint(),
              "run_extension: unitary does not act on the joint space");
  CMat phi = tensor_product(rhoA.mat(), seedB.mat());
  ExtensionState out{space, steps, phi, CMat(), CMat()};
  CMat sum = CMat::Zero(space.joint(), space.joint());
  for (long n = 0; n < steps; ++n) {
    sum += phi;
    phi = detail::extension_step(u, rhoA.mat(), space, phi);
  }
  out.next = std::move(phi);
  out.omegaTilde = sum / static_cast<double>(steps);
  return out;
}

// Explicit phi_1 .. phi_N, for small N and for oracle-style checks.
inline std::vector<CMat> extension_sequence(const UnitaryOperator& u,
                                            const DensityMatrix& rhoA,
                                            const DensityMatrix& seedB,
                                            int steps) {
  require(steps >= 1, "extension_sequence: need at least one step");
  BipartiteSpace space{rhoA.dim(), seedB.dim()};
  require_dim(u.dim() == space.joint(),
              "extension_sequence: unitary does not act on the joint space");
  std::vector<CMat> seq;
  seq.reserve(steps);
  seq.push_back(tensor_product(rhoA.mat(), seedB.mat()));
  for (int n = 1; n < steps; ++n)
    seq.push_back(detail::extension_step(u, rhoA.mat(), space, seq.back()));
  return seq;
}

// |omegaTilde( U^+ (1(x)b) U - 1(x)b )|, evaluated directly.
inline double invariance_deviation(const ExtensionState& st,
                                   const UnitaryOperator& u, const CMat& b) {
  const CMat lifted = embed_b(b, st.space);
  const CMat defect = u_transform(u, lifted) - lifted;
  return std::abs((st.omegaTilde * defect).trace());
}

// The same quantity through the telescoped form (exact in exact arithmetic).
inline double invariance_deviation_telescoped(const ExtensionState& st,
                                              const CMat& b) {
  const CMat lifted = embed_b(b, st.space);
  const cplx t = ((st.next - st.first) * lifted).trace();
  return std::abs(t) / static_cast<double>(st.length);
}

// A-priori bound 2 ||b|| / N on the invariance deviation.
inline double deviation_bound(const ExtensionState& st, const CMat& b) {
  return 2.0 * operator_norm(b) / static_cast<double>(st.length);
}

// Marginal of omegaTilde on the named factor (the other factor is traced out).
inline CMat marginal(const ExtensionState& st, Subsystem keep) {
  return partial_trace(st.omegaTilde, st.space,
                       keep == Subsystem::A ? Subsystem::B : Subsystem::A);
}

// Partial transpose on one factor: on B it maps a(x)b to a(x)b^T.
inline CMat partial_transpose(const CMat& m, const BipartiteSpace& space,
                              Subsystem transposed) {
  const int dA = space.dimA;
  const int dB = space.dimB;
  require_dim(m.rows() == space.joint() && m.cols() == space.joint(),
              "partial_transpose: operator does not live on the joint space");
  CMat out(m.rows(), m.cols());
  for (int ia = 0; ia < dA; ++ia)
    for (int ib = 0; ib < dB; ++ib)
      for (int ja = 0; ja < dA; ++ja)
        for (int jb = 0; jb < dB; ++jb) {
          const int r = ia * dB + ib;
          const int c = ja * dB + jb;
          if (transposed == Subsystem::B)
            out(ia * dB + jb, ja * dB + ib) = m(r, c);
          else
            out(ja * dB + ib, ia * dB + jb) = m(r, c);
        }
  return out;
}

// Peres-Horodecki witness: smallest eigenvalue of the partial transpose.
// For 2x2 and 2x3 spaces, nonnegativity is equivalent to separability; in
// higher dimensions a negative value still certifies entanglement.
inline double ppt_min_eigenvalue(const CMat& joint,
                                 const BipartiteSpace& space) {
  CMat pt = partial_transpose(joint, space, Subsystem::B);
  pt = (pt + pt.adjoint()) / 2.0;
  return hermitian_eigensystem(pt).values.minCoeff();
}

inline bool is_ppt(const CMat& joint, const BipartiteSpace& space,
                   double tol = 1e-10) {
  return ppt_min_eigenvalue(joint, space) >= -tol;
}

}  // namespace ctclab::extension

#endif  // CTCLAB_EXTENSION_HPP
