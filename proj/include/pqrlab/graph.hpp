#ifndef PQRLAB_GRAPH_HPP
#define PQRLAB_GRAPH_HPP

#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "pqrlab/density.hpp"
#include "pqrlab/kernel.hpp"
#include "pqrlab/pqr_params.hpp"

namespace pqrlab {

/// Symmetric sparse matrix with zero diagonal; only the upper triangle
/// (j > i) is stored, sorted row-major, and mirrored on access.
struct SymmetricSparse {
    int n = 0;
    std::vector<int> row_ptr; ///< size n + 1
    std::vector<int> col;     ///< j > i per stored entry
    std::vector<double> val;

    std::size_t stored() const { return val.size(); }

    template <class F>
    void for_each_upper(F&& f) const {
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) f(i, col[k], val[k]);
    }

    /// Full row sums (degrees).
    std::vector<double> row_sums() const;

    /// Expansion to a full Eigen sparse matrix (both triangles).
    Eigen::SparseMatrix<double> to_eigen() const;
};

struct RawGraph {
    int n = 0;
    SymmetricSparse weights;     ///< W~ with entries eta_delta(|x_i - x_j|)
    std::vector<double> degrees; ///< d~
};

/// q-reweighted proximity graph: W_ij = W~_ij / (d~_i d~_j)^{1 - q/2}.
struct WeightedGraph {
    int n = 0;
    double q = 2.0;
    SymmetricSparse raw_weights;
    std::vector<double> raw_degrees;
    SymmetricSparse weights;
    std::vector<double> degrees;
};

/// Kernel-weighted proximity graph over the sample. Uses a uniform spatial
/// hash of cell size equal to the kernel support so only candidate pairs in
/// adjacent cells are examined. Throws ConfigError naming the vertex when a
/// raw degree vanishes.
RawGraph build_raw_graph(const SampleBatch& batch, const KernelSpec& kernel);

WeightedGraph reweight(const RawGraph& raw, double q);

/// Bandwidth rule delta(n) = (log n / n)^{1/3}.
double delta_rule(int n);

/// Discrete weighted Dirichlet energy
///   E_{N,delta}(u) = N^{2r-q}/(2 delta^2) sum_ij W_ij |u_i/d_i^e - u_j/d_j^e|^2
/// with e = r/(q-1) for q != 1 and e = 0 for q = 1.
double dirichlet_energy(const WeightedGraph& graph, const PQRParams& params,
                        std::span<const double> u, double delta);

} // namespace pqrlab

#endif
