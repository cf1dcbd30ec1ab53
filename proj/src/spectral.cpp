#include "pqrlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "pqrlab/rng.hpp"

namespace pqrlab {

namespace detail {

BOperator BOperator::diagonal(Eigen::VectorXd d) {
    BOperator b;
    b.n_ = static_cast<int>(d.size());
    b.diag_ = std::move(d);
    return b;
}

BOperator BOperator::sparse(Eigen::SparseMatrix<double> m) {
    BOperator b;
    b.n_ = static_cast<int>(m.rows());
    b.mat_ = std::move(m);
    return b;
}

Eigen::VectorXd BOperator::apply(const Eigen::VectorXd& x) const {
    return is_diagonal() ? (diag_.array() * x.array()).matrix() : Eigen::VectorXd(mat_ * x);
}

Eigen::MatrixXd BOperator::apply(const Eigen::MatrixXd& x) const {
    return is_diagonal() ? Eigen::MatrixXd(diag_.asDiagonal() * x) : Eigen::MatrixXd(mat_ * x);
}

Eigen::SparseMatrix<double> BOperator::to_sparse() const {
    if (!is_diagonal()) return mat_;
    Eigen::SparseMatrix<double> m(n_, n_);
    m.reserve(Eigen::VectorXi::Constant(n_, 1));
    for (int i = 0; i < n_; ++i) m.insert(i, i) = diag_[i];
    m.makeCompressed();
    return m;
}

namespace {

Eigen::VectorXd b_diagonal(const BOperator& B) {
    if (B.is_diagonal()) return B.diag();
    return Eigen::VectorXd(B.to_sparse().diagonal());
}

/// SVQB-style B-orthonormalization; drops near-dependent columns in place.
void b_orthonormalize(Eigen::MatrixXd& S, const BOperator& B) {
    for (int pass = 0; pass < 2; ++pass) {
        if (S.cols() == 0) return;
        Eigen::MatrixXd G = S.transpose() * B.apply(S);
        G = 0.5 * (G + G.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
        const double drop = lmax * 1e-12;
        int kept = 0;
        for (int i = 0; i < G.rows(); ++i)
            if (es.eigenvalues()[i] > drop) ++kept;
        Eigen::MatrixXd T(G.rows(), kept);
        int c = 0;
        for (int i = 0; i < G.rows(); ++i)
            if (es.eigenvalues()[i] > drop)
                T.col(c++) = es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()[i]);
        S = (S * T).eval();
    }
}

/// Removes the B-projection of the columns of Z onto the orthonormal block Q
/// and re-orthonormalizes Z; keeps the combined Rayleigh-Ritz basis well
/// conditioned near convergence.
void b_orthogonalize_against(Eigen::MatrixXd& Z, const Eigen::MatrixXd& Q, const BOperator& B) {
    if (Z.cols() == 0 || Q.cols() == 0) return;
    Z.noalias() -= Q * (Q.transpose() * B.apply(Z));
    Z.noalias() -= Q * (Q.transpose() * B.apply(Z));
}

/// Residual relative to the pair scale with an operator-scale floor, so the
/// zero ground state measures backward error instead of 0/0 noise.
Eigen::VectorXd pair_residuals(const Eigen::SparseMatrix<double>& A, const BOperator& B,
                               const Eigen::VectorXd& sigma, const Eigen::MatrixXd& V,
                               double a_norm_inf) {
    Eigen::VectorXd res(sigma.size());
    const Eigen::MatrixXd AV = A * V;
    const Eigen::MatrixXd BV = B.apply(V);
    for (int j = 0; j < sigma.size(); ++j) {
        const double num = (AV.col(j) - sigma[j] * BV.col(j)).norm();
        const double den = AV.col(j).norm() + std::abs(sigma[j]) * BV.col(j).norm() +
                           0.01 * a_norm_inf * V.col(j).norm();
        res[j] = num / den;
    }
    return res;
}

double inf_norm(const Eigen::SparseMatrix<double>& A) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            rows[it.row()] += std::abs(it.value());
    return rows.maxCoeff();
}

PencilSolution solve_dense(const Eigen::SparseMatrix<double>& A, const BOperator& B, int k,
                           double a_norm_inf) {
    const Eigen::MatrixXd Ad(A);
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    if (B.is_diagonal()) {
        const Eigen::VectorXd isq = B.diag().array().rsqrt();
        const Eigen::MatrixXd C = isq.asDiagonal() * Ad * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()));
        if (es.info() != Eigen::Success) throw NumericsError("dense eigensolver failed");
        values = es.eigenvalues().head(k);
        vectors = isq.asDiagonal() * es.eigenvectors().leftCols(k);
    } else {
        const Eigen::MatrixXd Bd(B.to_sparse());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Bd);
        if (es.info() != Eigen::Success) throw NumericsError("dense generalized eigensolver failed");
        values = es.eigenvalues().head(k);
        vectors = es.eigenvectors().leftCols(k);
    }
    PencilSolution out;
    out.values = std::move(values);
    out.vectors = std::move(vectors);
    out.residuals = pair_residuals(A, B, out.values, out.vectors, a_norm_inf);
    return out;
}

} // namespace

PencilSolution solve_sym_pencil_lowest(const Eigen::SparseMatrix<double>& A, const BOperator& B,
                                       int k, double tol, const SolveOptions& opts,
                                       const Eigen::VectorXd* kernel_hint) {
    const int n = static_cast<int>(A.rows());
    if (k < 1 || k >= n) throw ConfigError("solve_lowest: require 1 <= k <= n - 1");
    if (!(tol > 0.0)) throw ConfigError("solve_lowest: tolerance must be positive");

    const double a_norm_inf = inf_norm(A);

    if (n <= opts.dense_threshold && !opts.force_iterative) return solve_dense(A, B, k, a_norm_inf);

    // Deflate the known null vector and iterate on the B-orthogonal complement.
    Eigen::VectorXd b1;
    bool has_kernel = kernel_hint != nullptr;
    if (has_kernel) {
        b1 = *kernel_hint;
        b1 /= std::sqrt(b1.dot(B.apply(b1)));
    }
    auto project_out_kernel = [&](Eigen::MatrixXd& M) {
        if (!has_kernel) return;
        M.noalias() -= b1 * (b1.transpose() * B.apply(M));
    };

    const int want = k - (has_kernel ? 1 : 0);
    PencilSolution out;

    Eigen::VectorXd sigma;
    Eigen::MatrixXd V;
    int iterations = 0;
    if (want > 0) {
        const int m = std::min(want + opts.block_pad, n - 1 - (has_kernel ? 1 : 0));
        if (m < want) throw ConfigError("solve_lowest: k too large for the iterative block");

        // Shifted positive definite pencil (A + mu B, B); eigenvalues are
        // reported un-shifted as theta - mu. The shift must stay below the
        // target eigenvalues or the preconditioned iteration loses its gap;
        // 1e-6 of the mean B-normalized diagonal keeps the factorization
        // well posed at every problem size used here.
        const Eigen::VectorXd bdiag = b_diagonal(B);
        double mu = 0.0;
        for (int i = 0; i < n; ++i) mu += A.coeff(i, i) / bdiag[i];
        mu = std::max(mu / n * 1e-6, 1e-300);

        Eigen::SparseMatrix<double> As = A + mu * B.to_sparse();
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> precond;
        precond.compute(As);
        if (precond.info() != Eigen::Success)
            throw NumericsError("solve_lowest: preconditioner factorization failed");

        SplitMix64 rng(0x5EEDF00D5EEDULL);
        Eigen::MatrixXd X(n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) X(i, j) = rng.uniform(-1.0, 1.0);
        project_out_kernel(X);
        b_orthonormalize(X, B);

        Eigen::VectorXd theta;
        {
            Eigen::MatrixXd H = X.transpose() * (As * X);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
            theta = es.eigenvalues();
            X = (X * es.eigenvectors()).eval();
        }

        Eigen::MatrixXd P(n, 0);
        bool converged = false;
        for (int iter = 0; iter < opts.max_iterations && !converged; ++iter) {
            iterations = iter + 1;
            const Eigen::MatrixXd AX = As * X;
            const Eigen::MatrixXd BX = B.apply(X);
            Eigen::MatrixXd R = AX - BX * theta.asDiagonal();

            converged = true;
            for (int j = 0; j < want; ++j) {
                const double s = theta[j] - mu;
                const double num = R.col(j).norm();
                const double den = (AX.col(j) - mu * BX.col(j)).norm() +
                                   std::abs(s) * BX.col(j).norm() +
                                   0.01 * a_norm_inf * X.col(j).norm();
                if (num / den > tol) {
                    converged = false;
                    break;
                }
            }
            if (converged) break;

            Eigen::MatrixXd W = precond.solve(R);
            project_out_kernel(W);
            b_orthogonalize_against(W, X, B);
            b_orthonormalize(W, B);
            b_orthogonalize_against(P, X, B);
            b_orthogonalize_against(P, W, B);
            b_orthonormalize(P, B);

            Eigen::MatrixXd S(n, X.cols() + W.cols() + P.cols());
            S << X, W, P;

            Eigen::MatrixXd H = S.transpose() * (As * S);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
            const int take = std::min<int>(m, static_cast<int>(S.cols()));
            if (take < want)
                throw NumericsError("solve_lowest: iteration basis collapsed below the block size");
            const Eigen::MatrixXd C = es.eigenvectors().leftCols(take);
            theta = es.eigenvalues().head(take);

            Eigen::MatrixXd Xnew = S * C;
            Eigen::MatrixXd Cp = C;
            Cp.topRows(X.cols()).setZero();
            P = S * Cp;
            X = std::move(Xnew);
        }

        sigma = theta.head(want).array() - mu;
        V = X.leftCols(want);

        if (!converged) {
            const Eigen::VectorXd attained = pair_residuals(A, B, sigma, V, a_norm_inf);
            std::ostringstream os;
            os << "solve_lowest: no convergence after " << opts.max_iterations
               << " iterations (best residual " << attained.maxCoeff() << ")";
            throw NumericsError(os.str(), {attained.data(), attained.data() + attained.size()});
        }
    }

    out.values.resize(k);
    out.vectors.resize(n, k);
    int pos = 0;
    if (has_kernel) {
        out.values[0] = b1.dot(A * b1); // Rayleigh quotient of the exact kernel
        out.vectors.col(0) = b1;
        pos = 1;
    }
    for (int j = 0; j < want; ++j) {
        out.values[pos + j] = sigma[j];
        out.vectors.col(pos + j) = V.col(j);
    }
    out.residuals = pair_residuals(A, B, out.values, out.vectors, a_norm_inf);
    out.iterations = iterations;
    return out;
}

} // namespace detail

LaplacianSystem assemble(const WeightedGraph& graph, const PQRParams& params) {
    if (params.q != graph.q)
        throw ConfigError("assemble: params.q does not match the graph reweighting q");
    params.validate();

    LaplacianSystem sys;
    sys.n = graph.n;
    sys.params = params;
    sys.recover_exponent = params.recover_exponent();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * graph.weights.stored() + graph.n);
    graph.weights.for_each_upper([&](int i, int j, double w) {
        trip.emplace_back(i, j, -w);
        trip.emplace_back(j, i, -w);
    });
    for (int i = 0; i < graph.n; ++i) trip.emplace_back(i, i, graph.degrees[i]);
    sys.A.resize(graph.n, graph.n);
    sys.A.setFromTriplets(trip.begin(), trip.end());

    sys.degrees = Eigen::Map<const Eigen::VectorXd>(graph.degrees.data(), graph.n);
    const double be = params.b_exponent();
    sys.B_diag.resize(graph.n);
    for (int i = 0; i < graph.n; ++i)
        sys.B_diag[i] = be == 0.0 ? 1.0 : std::pow(graph.degrees[i], be);
    return sys;
}

Spectrum solve_lowest(const LaplacianSystem& system, int k, double tol, const SolveOptions& opts) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(system.n);
    const auto B = detail::BOperator::diagonal(system.B_diag);
    const auto sol = detail::solve_sym_pencil_lowest(system.A, B, k, tol, opts, &ones);

    Spectrum spec;
    spec.k = k;
    spec.eigenvalues = sol.values;
    spec.vectors_v = sol.vectors;
    spec.residuals = sol.residuals;
    spec.iterations = sol.iterations;

    spec.vectors_u = sol.vectors;
    if (system.recover_exponent != 0.0) {
        const Eigen::VectorXd scale =
            system.degrees.array().pow(system.recover_exponent).matrix();
        spec.vectors_u = scale.asDiagonal() * sol.vectors;
    }
    return spec;
}

double continuum_scale(const PQRParams& params, const KernelSpec& kernel, int n, double delta) {
    if (!(kernel.s0() > 0.0) || !(kernel.s2() > 0.0))
        throw ConfigError("continuum_scale: kernel moments must be positive");
    const double npow = std::pow(static_cast<double>(n), params.q - params.p - params.r);
    return 2.0 * std::pow(kernel.s0(), params.p + params.r - params.q + 1.0) /
           (delta * delta * npow * kernel.s2());
}

double verify_pqr_invariance(const WeightedGraph& graph, const PQRParams& params1,
                             const PQRParams& params2, int k, double tol,
                             const SolveOptions& opts) {
    if (params1.q != params2.q || params1.q != graph.q)
        throw ConfigError("verify_pqr_invariance: q must agree between both parameter sets and the graph");
    if (std::abs((params1.p + params1.r) - (params2.p + params2.r)) > 1e-12)
        throw ConfigError("verify_pqr_invariance: requires p1 + r1 == p2 + r2");

    const auto s1 = solve_lowest(assemble(graph, params1), k, tol, opts);
    const auto s2 = solve_lowest(assemble(graph, params2), k, tol, opts);
    double worst = 0.0;
    for (int j = 0; j < k; ++j)
        worst = std::max(worst, std::abs(s1.eigenvalues[j] - s2.eigenvalues[j]) /
                                    (1.0 + s1.eigenvalues[j]));
    return worst;
}

double rayleigh_quotient(const LaplacianSystem& system, const Eigen::VectorXd& v) {
    if (v.size() != system.n) throw ConfigError("rayleigh_quotient: dimension mismatch");
    const double den = v.dot((system.B_diag.array() * v.array()).matrix());
    if (!(den > 0.0)) throw ConfigError("rayleigh_quotient: vector has zero B-norm");
    return v.dot(system.A * v) / den;
}

Spectrum Spectrum::scaled(double factor) const {
    Spectrum s = *this;
    s.eigenvalues *= factor;
    s.scale_applied = factor;
    return s;
}

nlohmann::json Spectrum::to_json() const {
    nlohmann::json j;
    j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    j["residuals"] = std::vector<double>(residuals.data(), residuals.data() + residuals.size());
    j["scale_applied"] = scale_applied ? nlohmann::json(*scale_applied) : nlohmann::json();
    return j;
}

void Spectrum::write_csv(std::ostream& os) const {
    os << "index,sigma,residual\n";
    char buf[96];
    for (int j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", j + 1, eigenvalues[j], residuals[j]);
        os << buf;
    }
}

} // namespace pqrlab
