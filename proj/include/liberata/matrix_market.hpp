#pragma once

#include <ostream>

#include <Eigen/Sparse>

#include "liberata/util.hpp"

namespace liberata {

using SpMat = Eigen::SparseMatrix<double>;

/* Coordinate-format Matrix Market, 1-based, emitted in column-major order so
   exports are deterministic. */
inline void write_matrix_market(std::ostream& out, const SpMat& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << format_number(it.value()) << "\n";
}

}  // namespace liberata
