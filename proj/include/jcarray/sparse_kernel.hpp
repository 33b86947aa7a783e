#pragma once

#include "jcarray/types.hpp"

namespace jcarray {

/// Sparse operator K stored as A + diag(c) with A real whenever every
/// off-diagonal entry of K is real. Lattice Hamiltonians with real drive are
/// real in the Fock basis and damping only adds to the diagonal, so the
/// product costs two real multiply-adds per stored entry instead of a
/// complex multiply.
class SplitSparseOperator {
 public:
  explicit SplitSparseOperator(const SparseMatrix& k);

  Eigen::Index rows() const { return rows_; }
  bool is_split() const { return split_; }

  /// out = K in.
  void apply(const StateVector& in, StateVector& out) const;
  /// out = K in, column by column.
  void apply(const DenseMatrix& in, DenseMatrix& out) const;

 private:
  void apply_column(const Complex* in, Complex* out) const;

  Eigen::Index rows_ = 0;
  bool split_ = false;
  Eigen::SparseMatrix<double, Eigen::RowMajor> real_;
  Eigen::VectorXcd diag_;
  SparseMatrix general_;
};

}  // namespace jcarray
