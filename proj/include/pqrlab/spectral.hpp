#ifndef PQRLAB_SPECTRAL_HPP
#define PQRLAB_SPECTRAL_HPP

#include <iosfwd>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "json.hpp"

#include "pqrlab/graph.hpp"
#include "pqrlab/kernel.hpp"
#include "pqrlab/pqr_params.hpp"

namespace pqrlab {

/// Symmetric generalized eigenproblem (D - W) v = sigma B v equivalent to
/// L_N u = sigma u under the substitution u = D^{recover_exponent} v.
struct LaplacianSystem {
    Eigen::SparseMatrix<double> A; ///< D - W, symmetric PSD, A 1 = 0
    Eigen::VectorXd B_diag;        ///< d_i^{(p+r-1)/(q-1)}, ones for q = 1
    Eigen::VectorXd degrees;       ///< d_i, kept for the change of variable
    double recover_exponent = 0.0;
    PQRParams params;
    int n = 0;
};

/// Low-lying eigenpairs in ascending order. vectors_v are B-orthonormal,
/// vectors_u carry the change of variable back to the Laplacian eigenvectors.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors_v;
    Eigen::MatrixXd vectors_u;
    int k = 0;
    std::optional<double> scale_applied;
    Eigen::VectorXd residuals;
    int iterations = 0;

    Spectrum scaled(double factor) const;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& os) const; ///< index, sigma, residual
};

struct SolveOptions {
    int dense_threshold = 800;
    int max_iterations = 300;
    int block_pad = 4;
    bool force_iterative = false; ///< exercise the iterative path on small systems
};

LaplacianSystem assemble(const WeightedGraph& graph, const PQRParams& params);

/// k smallest generalized eigenpairs of (A, B). Dense symmetric reduction up
/// to dense_threshold unknowns, blocked preconditioned iteration on the
/// shifted pencil (A + mu B, B) beyond it. Throws NumericsError with the
/// attained residuals on non-convergence.
Spectrum solve_lowest(const LaplacianSystem& system, int k, double tol,
                      const SolveOptions& opts = {});

/// Discrete-to-continuum eigenvalue factor 2 s0^{p+r-q+1} / (delta^2 N^{q-p-r} s2).
double continuum_scale(const PQRParams& params, const KernelSpec& kernel, int n, double delta);

/// Solves the system for both parameter sets (which must share q and p + r)
/// and returns max_j |sigma_j^1 - sigma_j^2| / (1 + sigma_j^1) over j <= k.
double verify_pqr_invariance(const WeightedGraph& graph, const PQRParams& params1,
                             const PQRParams& params2, int k, double tol = 1e-8,
                             const SolveOptions& opts = {});

double rayleigh_quotient(const LaplacianSystem& system, const Eigen::VectorXd& v);

namespace detail {

/// Right-hand-side operator of the pencil: diagonal or sparse SPD.
class BOperator {
public:
    static BOperator diagonal(Eigen::VectorXd d);
    static BOperator sparse(Eigen::SparseMatrix<double> m);

    int size() const { return n_; }
    bool is_diagonal() const { return diag_.size() > 0; }
    const Eigen::VectorXd& diag() const { return diag_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Eigen::SparseMatrix<double> to_sparse() const;

private:
    int n_ = 0;
    Eigen::VectorXd diag_;
    Eigen::SparseMatrix<double> mat_;
};

struct PencilSolution {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; ///< B-orthonormal columns
    Eigen::VectorXd residuals;
    int iterations = 0;
};

/// Shared core for graph and finite-element systems. kernel_hint, when
/// given, must span the null space of A exactly (constants for Laplacians);
/// the corresponding pair is deflated and reported from its Rayleigh quotient.
PencilSolution solve_sym_pencil_lowest(const Eigen::SparseMatrix<double>& A, const BOperator& B,
                                       int k, double tol, const SolveOptions& opts,
                                       const Eigen::VectorXd* kernel_hint);

} // namespace detail

} // namespace pqrlab

#endif
