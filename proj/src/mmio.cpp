#include "pqrlab/mmio.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pqrlab/errors.hpp"

namespace pqrlab {

namespace {

void write_entry(std::ostream& os, int i, int j, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, j + 1, v);
    os << buf;
}

} // namespace

void write_matrix_market(std::ostream& os, const SymmetricSparse& m) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.n << " " << m.n << " " << 2 * m.stored() << "\n";
    m.for_each_upper([&](int i, int j, double w) {
        write_entry(os, i, j, w);
        write_entry(os, j, i, w);
    });
    if (!os) throw IoError("matrix market: write failed");
}

void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<double>& m) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            write_entry(os, static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    if (!os) throw IoError("matrix market: write failed");
}

Eigen::SparseMatrix<double> read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw IoError("matrix market: missing header");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    if (line.find("coordinate") == std::string::npos ||
        line.find("real") == std::string::npos)
        throw IoError("matrix market: only coordinate real files are supported");

    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%') break;

    long rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream hdr(line);
        if (!(hdr >> rows >> cols >> nnz)) throw IoError("matrix market: bad size line");
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw IoError("matrix market: truncated entry list");
        trip.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        if (symmetric && i != j)
            trip.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace pqrlab
