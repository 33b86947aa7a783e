#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace jcarray {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Base class for every error raised by the library. The category is used
/// by the CLI to pick a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration values, mismatched dimensions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Population reached the top Fock level of a site beyond tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Step-size collapse, positivity loss, or other numerical failure.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace jcarray
