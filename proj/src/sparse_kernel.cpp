#include "jcarray/sparse_kernel.hpp"

#include <vector>

namespace jcarray {

SplitSparseOperator::SplitSparseOperator(const SparseMatrix& k) : rows_(k.rows()) {
  if (k.rows() != k.cols()) throw ValidationError("SplitSparseOperator: matrix must be square");
  split_ = true;
  std::vector<Eigen::Triplet<double>> entries;
  diag_ = Eigen::VectorXcd::Zero(rows_);
  for (Eigen::Index r = 0; r < k.outerSize() && split_; ++r) {
    for (SparseMatrix::InnerIterator it(k, r); it; ++it) {
      if (it.row() == it.col()) {
        diag_(it.row()) += it.value();
      } else if (it.value().imag() != 0.0) {
        split_ = false;
        break;
      } else if (it.value().real() != 0.0) {
        entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value().real());
      }
    }
  }
  if (split_) {
    real_.resize(rows_, rows_);
    real_.setFromTriplets(entries.begin(), entries.end());
    real_.makeCompressed();
  } else {
    general_ = k;
    general_.makeCompressed();
    diag_.resize(0);
  }
}

void SplitSparseOperator::apply_column(const Complex* in, Complex* out) const {
  const int* outer = real_.outerIndexPtr();
  const int* inner = real_.innerIndexPtr();
  const double* values = real_.valuePtr();
  const auto* x = reinterpret_cast<const double*>(in);
  auto* y = reinterpret_cast<double*>(out);
  const Complex* c = diag_.data();
  for (Eigen::Index i = 0; i < rows_; ++i) {
    const double cr = c[i].real(), ci = c[i].imag();
    const double xr = x[2 * i], xi = x[2 * i + 1];
    double re = cr * xr - ci * xi;
    double im = cr * xi + ci * xr;
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      const double v = values[p];
      const int j = inner[p];
      re += v * x[2 * j];
      im += v * x[2 * j + 1];
    }
    y[2 * i] = re;
    y[2 * i + 1] = im;
  }
}

void SplitSparseOperator::apply(const StateVector& in, StateVector& out) const {
  if (in.size() != rows_) throw ValidationError("SplitSparseOperator: dimension mismatch");
  out.resize(rows_);
  if (!split_) {
    out.noalias() = general_ * in;
    return;
  }
  apply_column(in.data(), out.data());
}

void SplitSparseOperator::apply(const DenseMatrix& in, DenseMatrix& out) const {
  if (in.rows() != rows_) throw ValidationError("SplitSparseOperator: dimension mismatch");
  out.resize(rows_, in.cols());
  if (!split_) {
    out.noalias() = general_ * in;
    return;
  }
  for (Eigen::Index j = 0; j < in.cols(); ++j) apply_column(in.col(j).data(), out.col(j).data());
}

}  // namespace jcarray
