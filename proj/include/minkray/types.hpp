#ifndef MINKRAY_TYPES_HPP
#define MINKRAY_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace minkray {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Array = Eigen::ArrayXd;
using CArray = Eigen::ArrayXcd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a precondition (bad dimension, index, non-unit vector...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure did not reach its target (rank loss, no convergence).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Number of independent components of a symmetric 2-tensor on R^{1+n}.
constexpr Index sym_components(int n) { return Index(n + 1) * Index(n + 2) / 2; }

}  // namespace minkray

#endif  // MINKRAY_TYPES_HPP
