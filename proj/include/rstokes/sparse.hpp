// Sparse and dense vector types shared by the assembly and solver modules.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace rstokes {

/// Compressed sparse row storage with sorted, deduplicated column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;

inline SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace rstokes
