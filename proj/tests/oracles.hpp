// Test-only reference implementations, kept independent of the library's
// optimized paths.
#ifndef PQRLAB_TESTS_ORACLES_HPP
#define PQRLAB_TESTS_ORACLES_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pqrlab/density.hpp"
#include "pqrlab/graph.hpp"
#include "pqrlab/kernel.hpp"

namespace pqrlab::test {

/// O(N^2) dense proximity-graph construction by a double loop.
inline Eigen::MatrixXd brute_force_weights(const SampleBatch& batch, const KernelSpec& kernel) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(batch.n, batch.n);
    for (int i = 0; i < batch.n; ++i)
        for (int j = 0; j < batch.n; ++j) {
            if (i == j) continue;
            const double dist = distance(batch.point(i), batch.point(j));
            if (dist > kernel.support_radius()) continue;
            w(i, j) = kernel.eval(dist);
        }
    return w;
}

/// Scalar-loop reweighting W_ij = W~_ij / (d_i d_j)^{1 - q/2}.
inline Eigen::MatrixXd brute_force_reweight(const Eigen::MatrixXd& raw, double q) {
    const Eigen::VectorXd deg = raw.rowwise().sum();
    Eigen::MatrixXd out = raw;
    for (int i = 0; i < raw.rows(); ++i)
        for (int j = 0; j < raw.cols(); ++j)
            out(i, j) = raw(i, j) / (std::pow(deg[i], 1.0 - q / 2.0) *
                                     std::pow(deg[j], 1.0 - q / 2.0));
    return out;
}

inline Eigen::MatrixXd dense_from(const SymmetricSparse& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.n, m.n);
    m.for_each_upper([&](int i, int j, double w) {
        out(i, j) = w;
        out(j, i) = w;
    });
    return out;
}

/// All eigenvalues of the dense pencil (A, diag(b)), ascending.
inline Eigen::VectorXd dense_pencil_eigenvalues(const Eigen::MatrixXd& a,
                                                const Eigen::VectorXd& b) {
    const Eigen::VectorXd isq = b.array().rsqrt();
    const Eigen::MatrixXd c = isq.asDiagonal() * a * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
    return es.eigenvalues();
}

} // namespace pqrlab::test

#endif
