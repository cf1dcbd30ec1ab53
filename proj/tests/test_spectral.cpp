#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pqrlab/graph.hpp"
#include "pqrlab/rng.hpp"
#include "pqrlab/spectral.hpp"
#include "oracles.hpp"

using namespace pqrlab;

namespace {

SampleBatch batch_from_points(std::vector<std::array<double, 2>> pts) {
    SampleBatch b;
    b.n = static_cast<int>(pts.size());
    b.dim = 2;
    for (const auto& p : pts) {
        b.points.push_back(p[0]);
        b.points.push_back(p[1]);
    }
    b.labels.assign(b.n, -1);
    return b;
}

WeightedGraph random_graph(int n, double q, std::uint64_t seed, double delta = 0.25) {
    SampleBatch b;
    b.n = n;
    b.dim = 2;
    SplitMix64 rng(seed);
    for (int i = 0; i < 2 * n; ++i) b.points.push_back(rng.uniform01());
    b.labels.assign(n, -1);
    return reweight(build_raw_graph(b, KernelSpec(KernelProfile::Indicator, delta, 2)), q);
}

} // namespace

TEST_CASE("two-vertex system has the closed-form pencil") {
    const double delta = 1.0;
    const auto batch = batch_from_points({{0.0, 0.0}, {0.5, 0.0}});
    const auto graph = reweight(build_raw_graph(batch, KernelSpec(KernelProfile::Indicator, delta, 2)), 2.0);
    const double w = 1.0 / std::numbers::pi;

    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    CHECK(sys.recover_exponent == 0.0);
    CHECK(Eigen::MatrixXd(sys.A)(0, 0) == doctest::Approx(w).epsilon(1e-15));
    CHECK(Eigen::MatrixXd(sys.A)(0, 1) == doctest::Approx(-w).epsilon(1e-15));
    CHECK(sys.B_diag[0] == 1.0);
    CHECK(sys.B_diag[1] == 1.0);

    const auto evals = test::dense_pencil_eigenvalues(Eigen::MatrixXd(sys.A), sys.B_diag);
    CHECK(evals[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(evals[1] == doctest::Approx(2.0 * w).epsilon(1e-12));
}

TEST_CASE("path graph with unit weights and q = 1") {
    // build a 3-path with unit weights by hand
    RawGraph raw;
    raw.n = 3;
    raw.weights.n = 3;
    raw.weights.row_ptr = {0, 1, 2, 2};
    raw.weights.col = {1, 2};
    raw.weights.val = {1.0, 1.0};
    raw.degrees = raw.weights.row_sums();
    const auto graph = reweight(raw, 1.0);
    // q = 1 reweighting divides by sqrt(deg) products; rebuild unit weights
    WeightedGraph unit = graph;
    unit.weights = raw.weights;
    unit.degrees = raw.degrees;

    const auto sys = assemble(unit, PQRParams{1.0, 1.0, 0.0});
    CHECK((sys.B_diag.array() == 1.0).all());

    const auto evals = test::dense_pencil_eigenvalues(Eigen::MatrixXd(sys.A), sys.B_diag);
    CHECK(evals[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(evals[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(evals[2] == doctest::Approx(3.0).epsilon(1e-12));

    const auto spec = solve_lowest(sys, 2, 1e-10);
    CHECK(spec.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(spec.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("complete graph eigenvalue multiplicity") {
    const double delta = 10.0;
    const auto batch = batch_from_points({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
    const KernelSpec kernel(KernelProfile::Indicator, delta, 2);
    const auto graph = reweight(build_raw_graph(batch, kernel), 2.0);
    const double c = kernel.eval(1.0); // all pairs inside the plateau

    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    const auto spec = solve_lowest(sys, 3, 1e-10);
    CHECK(spec.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(spec.eigenvalues[1] == doctest::Approx(4.0 * c).epsilon(1e-10));
    CHECK(spec.eigenvalues[2] == doctest::Approx(4.0 * c).epsilon(1e-10));
}

TEST_CASE("assemble validates the q linkage") {
    const auto graph = random_graph(40, 2.0, 1);
    CHECK_THROWS_AS(assemble(graph, PQRParams{1.0, 1.5, 0.0}), ConfigError);
}

TEST_CASE("ground state and null vector") {
    const auto graph = random_graph(120, 2.0, 3);
    const auto sys = assemble(graph, PQRParams{1.5, 2.0, 0.5});
    const auto spec = solve_lowest(sys, 5, 1e-9);

    CHECK(std::abs(spec.eigenvalues[0]) <= 1e-10 * (1.0 + spec.eigenvalues[4]));

    // v1 proportional to ones, u1 to D^{r/(q-1)} ones
    const Eigen::VectorXd v1 = spec.vectors_v.col(0) / spec.vectors_v(0, 0);
    CHECK((v1.array() - 1.0).abs().maxCoeff() < 1e-8);
    const Eigen::VectorXd expected_u =
        sys.degrees.array().pow(sys.recover_exponent).matrix() * spec.vectors_u(0, 0) /
        std::pow(sys.degrees[0], sys.recover_exponent);
    CHECK((spec.vectors_u.col(0) - expected_u).cwiseAbs().maxCoeff() <
          1e-8 * expected_u.cwiseAbs().maxCoeff());

    // A annihilates constants row-wise
    double a_inf = 0.0;
    const Eigen::MatrixXd ad(sys.A);
    for (int i = 0; i < sys.n; ++i) a_inf = std::max(a_inf, ad.row(i).cwiseAbs().sum());
    CHECK((ad * Eigen::VectorXd::Ones(sys.n)).cwiseAbs().maxCoeff() <= 1e-12 * a_inf);
}

TEST_CASE("B-orthonormality of the reported eigenvectors") {
    const auto graph = random_graph(150, 1.5, 17);
    const auto sys = assemble(graph, PQRParams{1.0, 1.5, 0.3});
    const auto spec = solve_lowest(sys, 4, 1e-9);
    const Eigen::MatrixXd gram =
        spec.vectors_v.transpose() * sys.B_diag.asDiagonal() * spec.vectors_v;
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quadratic form identity") {
    const auto graph = random_graph(80, 2.0, 23);
    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    const auto dense = test::dense_from(graph.weights);
    SplitMix64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd v(graph.n);
        for (int i = 0; i < graph.n; ++i) v[i] = rng.uniform(-1.0, 1.0);
        double pairwise = 0.0;
        for (int i = 0; i < graph.n; ++i)
            for (int j = 0; j < graph.n; ++j)
                pairwise += 0.5 * dense(i, j) * (v[i] - v[j]) * (v[i] - v[j]);
        const double quad = v.dot(sys.A * v);
        CHECK(quad == doctest::Approx(pairwise).epsilon(1e-10));
    }
}

TEST_CASE("spectrum invariance under equal (p+r, q)") {
    const auto graph = random_graph(100, 2.0, 31);
    SUBCASE("matching pairs agree to round-off") {
        CHECK(verify_pqr_invariance(graph, PQRParams{1, 2, 1}, PQRParams{2, 2, 0}, 6) <= 1e-10);
        CHECK(verify_pqr_invariance(graph, PQRParams{1, 2, 0}, PQRParams{0.5, 2, 0.5}, 6) <= 1e-10);
    }
    SUBCASE("mismatched p + r is rejected") {
        CHECK_THROWS_AS(verify_pqr_invariance(graph, PQRParams{1, 2, 0}, PQRParams{1, 2, 1}, 4),
                        ConfigError);
        // the unnormalized/normalized pair differs in p + r and has distinct spectra
        CHECK_THROWS_AS(
            verify_pqr_invariance(graph, PQRParams{1, 2, 0}, PQRParams{1.5, 2, 0.5}, 4),
            ConfigError);
    }
    SUBCASE("mismatched q is rejected") {
        CHECK_THROWS_AS(verify_pqr_invariance(graph, PQRParams{1, 1.5, 1}, PQRParams{1, 2, 1}, 4),
                        ConfigError);
    }
}

TEST_CASE("rayleigh quotient and the min-max principle") {
    const auto graph = random_graph(130, 2.0, 41);
    const auto sys = assemble(graph, PQRParams{1.5, 2.0, 0.5});
    const auto spec = solve_lowest(sys, 3, 1e-10);

    CHECK(rayleigh_quotient(sys, Eigen::VectorXd::Ones(sys.n)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rayleigh_quotient(sys, spec.vectors_v.col(1)) ==
          doctest::Approx(spec.eigenvalues[1]).epsilon(1e-8));
    CHECK_THROWS_AS(rayleigh_quotient(sys, Eigen::VectorXd::Zero(sys.n)), ConfigError);

    // random B-orthogonal-to-constants vectors never dip below sigma_2
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n);
    const double ones_b = ones.dot((sys.B_diag.array() * ones.array()).matrix());
    SplitMix64 rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd v(sys.n);
        for (int i = 0; i < sys.n; ++i) v[i] = rng.uniform(-1.0, 1.0);
        const double coeff = v.dot((sys.B_diag.array() * ones.array()).matrix()) / ones_b;
        v -= coeff * ones;
        CHECK(rayleigh_quotient(sys, v) >= spec.eigenvalues[1] - 1e-8);
    }
}

TEST_CASE("dense and iterative paths agree") {
    const auto graph = random_graph(420, 2.0, 53, 0.2);
    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 1.0});
    const auto dense = solve_lowest(sys, 6, 1e-9);
    SolveOptions iter_opts;
    iter_opts.force_iterative = true;
    const auto iter = solve_lowest(sys, 6, 1e-9, iter_opts);
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(dense.eigenvalues[j] - iter.eigenvalues[j]) <=
              1e-8 * (1.0 + std::abs(dense.eigenvalues[j])));
        CHECK(iter.residuals[j] <= 1e-8);
    }
}

TEST_CASE("adding an edge never decreases eigenvalues for q = 1 (B = I)") {
    SplitMix64 rng(97);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 8 + static_cast<int>(rng.next_u64() % 8);
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform01() < 0.4) {
                    const double x = rng.uniform(0.1, 2.0);
                    w(i, j) = w(j, i) = x;
                }
        for (int i = 0; i < n; ++i) w(i, (i + 1) % n) = w((i + 1) % n, i) = 1.0; // connect

        auto laplacian = [&](const Eigen::MatrixXd& ww) {
            Eigen::MatrixXd a = -ww;
            for (int i = 0; i < n; ++i) a(i, i) = ww.row(i).sum();
            return a;
        };
        const Eigen::VectorXd ident = Eigen::VectorXd::Ones(n);
        const auto before = test::dense_pencil_eigenvalues(laplacian(w), ident);
        const int ei = static_cast<int>(rng.next_u64() % n);
        const int ej = (ei + 1 + static_cast<int>(rng.next_u64() % (n - 1))) % n;
        w(ei, ej) += 0.8;
        w(ej, ei) = w(ei, ej);
        const auto after = test::dense_pencil_eigenvalues(laplacian(w), ident);
        for (int j = 0; j < n; ++j) CHECK(after[j] >= before[j] - 1e-10);
    }
}

TEST_CASE("continuum scale factor") {
    const KernelSpec kernel(KernelProfile::Indicator, 0.1, 2);
    SUBCASE("balanced parameters are N-independent") {
        const PQRParams params{1.5, 2.0, 0.5};
        const double f100 = continuum_scale(params, kernel, 100, 0.1);
        const double f7 = continuum_scale(params, kernel, 7, 0.1);
        CHECK(f100 == doctest::Approx(8.0 / (0.1 * 0.1)).epsilon(1e-12));
        CHECK(f100 == doctest::Approx(f7).epsilon(1e-12));
    }
    SUBCASE("unnormalized parameters carry the N power") {
        const PQRParams params{1.0, 2.0, 0.0};
        CHECK(continuum_scale(params, kernel, 10, 0.1) == doctest::Approx(80.0).epsilon(1e-9));
        CHECK(continuum_scale(params, kernel, 100, 0.1) == doctest::Approx(8.0).epsilon(1e-9));
    }
}

TEST_CASE("non-convergence reports the attained residuals") {
    const auto graph = random_graph(90, 2.0, 67);
    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    SolveOptions opts;
    opts.force_iterative = true;
    opts.max_iterations = 1;
    try {
        solve_lowest(sys, 4, 1e-14, opts);
        FAIL("expected NumericsError");
    } catch (const NumericsError& e) {
        CHECK(e.attained_residuals.size() == 3); // non-kernel block
        for (const double r : e.attained_residuals) CHECK(r > 0.0);
    }
}

TEST_CASE("solver parameter validation") {
    const auto graph = random_graph(30, 2.0, 61);
    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    CHECK_THROWS_AS(solve_lowest(sys, 30, 1e-8), ConfigError);
    CHECK_THROWS_AS(solve_lowest(sys, 0, 1e-8), ConfigError);
    CHECK_THROWS_AS(solve_lowest(sys, 3, -1.0), ConfigError);
    CHECK_THROWS_AS(
        (PQRParams{std::numeric_limits<double>::infinity(), 2.0, 0.0}).validate(), ConfigError);
}

TEST_CASE("spectrum exports") {
    const auto graph = random_graph(50, 2.0, 71);
    const auto sys = assemble(graph, PQRParams{1.0, 2.0, 0.0});
    auto spec = solve_lowest(sys, 3, 1e-9);
    spec = spec.scaled(4.0);

    const auto j = spec.to_json();
    CHECK(j["eigenvalues"].size() == 3);
    CHECK(j["residuals"].size() == 3);
    CHECK(j["scale_applied"].get<double>() == 4.0);

    std::ostringstream os;
    spec.write_csv(os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "index,sigma,residual");
}
