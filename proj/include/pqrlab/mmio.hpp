#ifndef PQRLAB_MMIO_HPP
#define PQRLAB_MMIO_HPP

#include <iosfwd>

#include <Eigen/SparseCore>

#include "pqrlab/graph.hpp"

namespace pqrlab {

/// MatrixMarket coordinate writer. Symmetric content is written with the
/// `general` header, both triangles mirrored explicitly.
void write_matrix_market(std::ostream& os, const SymmetricSparse& m);
void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<double>& m);

/// Reader accepting `general` and `symmetric` coordinate files.
Eigen::SparseMatrix<double> read_matrix_market(std::istream& is);

} // namespace pqrlab

#endif
