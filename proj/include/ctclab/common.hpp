#pragma once
#ifndef CTCLAB_COMMON_HPP
#define CTCLAB_COMMON_HPP

// Shared scalar/matrix aliases, tolerances and error types used across the
// whole library.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ctclab {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Hard cap on joint Hilbert-space dimensions; guards accidental huge
// allocations from malformed inputs.
inline constexpr int kDimensionCap = 4096;

inline constexpr double kPi = 3.14159265358979323846;

// Default validation tolerances (max-abs entry scale).
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenClipFloor = -1e-10;

// Input violates a documented precondition or type invariant.
class contract_error : public std::runtime_error {
 public:
  explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

// A dimension is non-positive, inconsistent, or beyond the cap.
class dimension_error : public contract_error {
 public:
  explicit dimension_error(const std::string& what) : contract_error(what) {}
};

// A solver could not reach the requested tolerance.
class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// A truncated series cannot meet the requested tail bound.
class truncation_error : public std::runtime_error {
 public:
  explicit truncation_error(const std::string& what)
      : std::runtime_error(what) {}
};

// A characteristic passes too close to a removed-strip endpoint.
class critical_ray_error : public std::runtime_error {
 public:
  explicit critical_ray_error(const std::string& what)
      : std::runtime_error(what) {}
};

// A region or point sits on an identification cut where evaluation is
// two-valued.
class ambiguity_error : public std::runtime_error {
 public:
  explicit ambiguity_error(const std::string& what)
      : std::runtime_error(what) {}
};

// File/parse-level failure (maps to CLI exit code 2).
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw contract_error(what);
}

inline void require_dim(bool cond, const std::string& what) {
  if (!cond) throw dimension_error(what);
}

}  // namespace ctclab

#endif  // CTCLAB_COMMON_HPP
