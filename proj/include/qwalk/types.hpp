#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qwalk {

using Cx = std::complex<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Complex amplitude per arc, i.e. an element of l^2(D).
using ArcState = Eigen::VectorXcd;
/// Complex amplitude per vertex, i.e. an element of l^2(V).
using VertexState = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad graph, bad weight, bad config value.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical gate tripped (norm drift, eigen residual, degenerate lift).
class NumericalPathology : public Error {
 public:
  using Error::Error;
};

/// Wrap x into [0, 2pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Distance from x to the nearest point of 2pi*Z + offset.
inline double distance_mod_2pi(double x, double offset = 0.0) {
  double r = wrap_angle(x - offset);
  return std::min(r, kTwoPi - r);
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  using Plain = typename Derived::PlainObject;
  return m.rows() == m.cols() &&
         max_abs(m.adjoint() * m - Plain::Identity(m.rows(), m.cols())) < tol;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) < tol;
}

}  // namespace qwalk
