#include "pqrlab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pqrlab {

std::array<int, 3> StructuredMesh::triangle(int t) const {
    const int cell = t / 2;
    const int i = cell % n_cells;
    const int j = cell / n_cells;
    if (t % 2 == 0)
        return {node_index(i, j), node_index(i + 1, j), node_index(i, j + 1)};
    return {node_index(i + 1, j), node_index(i + 1, j + 1), node_index(i, j + 1)};
}

ContinuumSystem assemble_continuum(const StructuredMesh& mesh, const DensityModel& density,
                                   const PQRParams& params) {
    const int n_nodes = mesh.n_nodes();
    const int n_tri = mesh.n_triangles();

    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(static_cast<std::size_t>(n_tri) * 9);
    mt.reserve(static_cast<std::size_t>(n_tri) * 9);

    for (int t = 0; t < n_tri; ++t) {
        const auto vs = mesh.triangle(t);
        double x[3], y[3];
        for (int a = 0; a < 3; ++a) {
            const auto c = mesh.node_coords(vs[a]);
            x[a] = c[0];
            y[a] = c[1];
        }
        const double det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        const double area = 0.5 * std::abs(det);

        const double cx = (x[0] + x[1] + x[2]) / 3.0;
        const double cy = (y[0] + y[1] + y[2]) / 3.0;
        const double centroid[2] = {cx, cy};
        const double rho = density.eval(centroid);
        if (!(rho > 0.0)) {
            std::ostringstream os;
            os << "assemble_continuum: nonpositive density at the centroid of triangle " << t;
            throw ConfigError(os.str());
        }
        const double wk = std::pow(rho, params.q);
        const double wm = std::pow(rho, params.p + params.r);

        // P1 gradients: grad phi_a = (b_a, c_a) / det
        const double b[3] = {y[1] - y[2], y[2] - y[0], y[0] - y[1]};
        const double c[3] = {x[2] - x[1], x[0] - x[2], x[1] - x[0]};
        for (int a = 0; a < 3; ++a)
            for (int e = 0; e < 3; ++e) {
                const double kij = wk * area * (b[a] * b[e] + c[a] * c[e]) / (det * det);
                kt.emplace_back(vs[a], vs[e], kij);
                const double mij = wm * area / 12.0 * (a == e ? 2.0 : 1.0);
                mt.emplace_back(vs[a], vs[e], mij);
            }
    }

    ContinuumSystem sys{mesh, density, params, {}, {}};
    sys.stiffness.resize(n_nodes, n_nodes);
    sys.stiffness.setFromTriplets(kt.begin(), kt.end());
    sys.mass.resize(n_nodes, n_nodes);
    sys.mass.setFromTriplets(mt.begin(), mt.end());
    return sys;
}

Spectrum solve_continuum(const ContinuumSystem& system, int k, double tol,
                         const SolveOptions& opts) {
    const int n = system.mesh.n_nodes();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const auto B = detail::BOperator::sparse(system.mass);
    const auto sol = detail::solve_sym_pencil_lowest(system.stiffness, B, k, tol, opts, &ones);

    Spectrum spec;
    spec.k = k;
    spec.eigenvalues = sol.values;
    spec.vectors_v = sol.vectors;
    spec.residuals = sol.residuals;
    spec.iterations = sol.iterations;

    Eigen::VectorXd rho_r(n);
    for (int id = 0; id < n; ++id) {
        const auto c = system.mesh.node_coords(id);
        const double t[2] = {c[0], c[1]};
        rho_r[id] = std::pow(system.density.eval(t), system.params.r);
    }
    spec.vectors_u = rho_r.asDiagonal() * sol.vectors;
    return spec;
}

Density1D Density1D::uniform() {
    return {[](double) { return 1.0; }, 0.0, 1.0};
}

Density1D Density1D::two_bump(double epsilon) {
    // Smoothed indicator bumps at 0.3 and 0.7 with half-width 0.15 over an
    // epsilon floor, normalized by midpoint quadrature.
    const double c1 = 0.3, c2 = 0.7, theta = 0.15;
    auto raw = [=](double t) {
        const double b1 = 0.5 * (1.0 + std::erf((theta - std::abs(t - c1)) / epsilon));
        const double b2 = 0.5 * (1.0 + std::erf((theta - std::abs(t - c2)) / epsilon));
        return epsilon + b1 + b2;
    };
    const int g = 1 << 16;
    double z = 0.0;
    for (int i = 0; i < g; ++i) z += raw((i + 0.5) / g);
    z /= g;
    return {[raw, z](double t) { return raw(t) / z; }, 0.0, 1.0};
}

CheegerResult cheeger_check_1d(const Density1D& profile, const PQRParams& params, int n_grid,
                               double tol) {
    if (n_grid < 2) throw ConfigError("cheeger_check_1d: need at least 2 grid cells");
    const double a = profile.a, b = profile.b;
    const double len = b - a;
    const double pr = params.p + params.r;

    // cumulative rho^{p+r} mass and inf of rho^{p+r-q} on a fine grid
    const int fine = 1 << 16;
    const double h = len / fine;
    std::vector<double> cum(fine + 1, 0.0);
    double inf_weight = std::numeric_limits<double>::infinity();
    for (int i = 0; i < fine; ++i) {
        const double t = a + (i + 0.5) * h;
        const double rho = profile.rho(t);
        if (!(rho > 0.0)) throw ConfigError("cheeger_check_1d: density must be strictly positive");
        cum[i + 1] = cum[i] + std::pow(rho, pr) * h;
        inf_weight = std::min(inf_weight, std::pow(rho, pr - params.q));
    }
    const double total = cum[fine];

    // isoperimetric function over left-interval cuts (a, t):
    //   J(t) = rho(t)^q / |(a,t)|_{rho^{p+r}}  subject to mass(t) <= total/2
    const int cuts = 2048;
    double h_const = std::numeric_limits<double>::infinity();
    for (int c = 1; c < cuts; ++c) {
        const double t = a + len * c / cuts;
        const double pos = (t - a) / h;
        const auto cell = std::min(static_cast<std::size_t>(pos), cum.size() - 2);
        const double frac = pos - static_cast<double>(cell);
        const double mass = cum[cell] * (1.0 - frac) + cum[cell + 1] * frac;
        if (mass <= 0.0 || mass > 0.5 * total) continue;
        h_const = std::min(h_const, std::pow(profile.rho(t), params.q) / mass);
    }

    // 1d P1 assembly of the weak form in v = u / rho^r
    const int n = n_grid + 1;
    std::vector<Eigen::Triplet<double>> kt, mt;
    const double hc = len / n_grid;
    for (int e = 0; e < n_grid; ++e) {
        const double mid = a + (e + 0.5) * hc;
        const double rho = profile.rho(mid);
        const double wk = std::pow(rho, params.q) / hc;
        const double wm = std::pow(rho, pr) * hc / 6.0;
        const int i = e, j = e + 1;
        kt.emplace_back(i, i, wk);
        kt.emplace_back(j, j, wk);
        kt.emplace_back(i, j, -wk);
        kt.emplace_back(j, i, -wk);
        mt.emplace_back(i, i, 2.0 * wm);
        mt.emplace_back(j, j, 2.0 * wm);
        mt.emplace_back(i, j, wm);
        mt.emplace_back(j, i, wm);
    }
    Eigen::SparseMatrix<double> K(n, n), M(n, n);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    SolveOptions opts;
    const auto sol =
        detail::solve_sym_pencil_lowest(K, detail::BOperator::sparse(M), 2, 1e-10, opts, &ones);

    CheegerResult res;
    res.h = h_const;
    res.lower_bound = 0.25 * h_const * h_const * inf_weight;
    res.sigma2 = sol.values[1];
    res.pass = res.sigma2 >= res.lower_bound - tol;
    return res;
}

std::vector<Cluster> paper_geometry(int n_clusters) {
    std::vector<Cluster> cs = {
        {{-0.5, 0.0}, 0.25}, {{0.5, 0.3}, 0.25},   {{0.4, -0.5}, 0.15},
        {{-0.35, 0.65}, 0.20}, {{-0.6, -0.6}, 0.15},
    };
    if (n_clusters != 2 && n_clusters != 3 && n_clusters != 5)
        throw ConfigError("paper_geometry: presets exist for 2, 3 and 5 clusters");
    cs.resize(n_clusters);
    return cs;
}

std::vector<Cluster> paper_geometry(const std::string& preset) {
    if (preset == "paper-2") return paper_geometry(2);
    if (preset == "paper-3") return paper_geometry(3);
    if (preset == "paper-5") return paper_geometry(5);
    throw ConfigError("paper_geometry: unknown preset " + preset);
}

std::vector<EigenTableRow> epsilon_reference_table(int n_clusters, const PQRParams& params,
                                                   const std::vector<double>& eps_list,
                                                   int n_cells, int k, const SolveOptions& opts) {
    if (eps_list.empty()) throw ConfigError("epsilon_reference_table: empty epsilon list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("epsilon_reference_table: epsilon list must be descending");

    const auto clusters = paper_geometry(n_clusters);
    const StructuredMesh mesh(DomainBox::centered_square(), n_cells);

    std::vector<EigenTableRow> rows;
    for (const double eps : eps_list) {
        EigenTableRow row;
        row.epsilon = eps;
        try {
            const auto density = DensityModel::erf_clusters(DomainBox::centered_square(), eps, clusters);
            const auto system = assemble_continuum(mesh, density, params);
            const auto spec = solve_continuum(system, k, 1e-8, opts);
            row.sigmas.assign(spec.eigenvalues.data(), spec.eigenvalues.data() + k);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace pqrlab
