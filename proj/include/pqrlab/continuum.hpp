#ifndef PQRLAB_CONTINUUM_HPP
#define PQRLAB_CONTINUUM_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "pqrlab/density.hpp"
#include "pqrlab/spectral.hpp"

namespace pqrlab {

/// Uniform triangulation of a 2d box: (n+1)^2 nodes, 2 n^2 right triangles
/// per the usual diagonal split. Node coordinates follow from the index.
struct StructuredMesh {
    DomainBox domain;
    int n_cells = 0;

    StructuredMesh(DomainBox box, int n) : domain(std::move(box)), n_cells(n) {
        if (domain.dim() != 2) throw ConfigError("StructuredMesh: 2d domain required");
        if (n < 2) throw ConfigError("StructuredMesh: need at least 2 cells per axis");
    }

    int n_nodes() const { return (n_cells + 1) * (n_cells + 1); }
    int n_triangles() const { return 2 * n_cells * n_cells; }

    double hx() const { return domain.extent(0) / n_cells; }
    double hy() const { return domain.extent(1) / n_cells; }

    int node_index(int i, int j) const { return j * (n_cells + 1) + i; }

    std::array<double, 2> node_coords(int id) const {
        const int i = id % (n_cells + 1);
        const int j = id / (n_cells + 1);
        return {domain.lower[0] + i * hx(), domain.lower[1] + j * hy()};
    }

    /// Vertex node ids of triangle t (two per cell, lower then upper).
    std::array<int, 3> triangle(int t) const;
};

/// Weak form of the weighted elliptic eigenproblem in the scaled variable
/// v = u / rho^r:  K v = sigma M v with
///   K_ij = int rho^q grad(phi_i) . grad(phi_j),   M_ij = int rho^{p+r} phi_i phi_j.
struct ContinuumSystem {
    StructuredMesh mesh;
    DensityModel density;
    PQRParams params;
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> mass;
};

/// P1 assembly with the density powers evaluated at triangle centroids and
/// exact element integrals otherwise.
ContinuumSystem assemble_continuum(const StructuredMesh& mesh, const DensityModel& density,
                                   const PQRParams& params);

/// Same solver contract as solve_lowest with (A, B) := (K, M); the
/// eigenfunction u is recovered nodally as rho(node)^r v(node).
Spectrum solve_continuum(const ContinuumSystem& system, int k, double tol,
                         const SolveOptions& opts = {});

/// One-dimensional strictly positive density on an interval.
struct Density1D {
    std::function<double(double)> rho;
    double a = 0.0;
    double b = 1.0;

    static Density1D uniform();
    /// Two smoothed bumps over an epsilon floor, normalized on [0,1].
    static Density1D two_bump(double epsilon);
};

struct CheegerResult {
    double h = 0.0;           ///< infimum of the isoperimetric function over cuts
    double lower_bound = 0.0; ///< (h^2 / 4) inf rho^{p+r-q}
    double sigma2 = 0.0;
    bool pass = false;
};

/// Weighted Cheeger lower bound against the assembled sigma_2 in 1d.
/// Cuts are the 2048 left intervals (a, t) with at most half the rho^{p+r}
/// mass; the discrete min approximates the infimum from above.
CheegerResult cheeger_check_1d(const Density1D& profile, const PQRParams& params, int n_grid,
                               double tol = 1e-6);

/// Cluster layouts of the two/three/five-cluster experiments on (-1,1)^2.
std::vector<Cluster> paper_geometry(int n_clusters);
std::vector<Cluster> paper_geometry(const std::string& preset); ///< "paper-2", "paper-3", "paper-5"

struct EigenTableRow {
    double epsilon = 0.0;
    bool ok = false;
    std::string error;
    std::vector<double> sigmas;
};

/// Reference spectra sigma_{j,eps} for the cluster geometry over a
/// descending epsilon list. Solver failures are recorded per row and the
/// remaining rows still run.
std::vector<EigenTableRow> epsilon_reference_table(int n_clusters, const PQRParams& params,
                                                   const std::vector<double>& eps_list,
                                                   int n_cells, int k,
                                                   const SolveOptions& opts = {});

} // namespace pqrlab

#endif
