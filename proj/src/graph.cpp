#include "pqrlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace pqrlab {

std::vector<double> SymmetricSparse::row_sums() const {
    std::vector<double> sums(n, 0.0);
    for_each_upper([&](int i, int j, double w) {
        sums[i] += w;
        sums[j] += w;
    });
    return sums;
}

Eigen::SparseMatrix<double> SymmetricSparse::to_eigen() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * stored());
    for_each_upper([&](int i, int j, double w) {
        trip.emplace_back(i, j, w);
        trip.emplace_back(j, i, w);
    });
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

RawGraph build_raw_graph(const SampleBatch& batch, const KernelSpec& kernel) {
    if (batch.n < 2) throw ConfigError("build_raw_graph: need at least two points");
    if (batch.dim != kernel.dim())
        throw ConfigError("build_raw_graph: kernel dimension does not match points");

    const int n = batch.n;
    const int d = batch.dim;
    const double reach = kernel.support_radius();

    // Uniform hash grid with cell size equal to the kernel support.
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<int> cells_per_axis(d, 1);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) lo[a] = std::min(lo[a], batch.point(i)[a]);

    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) hi[a] = std::max(hi[a], batch.point(i)[a]);
    for (int a = 0; a < d; ++a)
        cells_per_axis[a] = std::max(1, static_cast<int>((hi[a] - lo[a]) / reach) + 1);

    auto cell_of = [&](std::span<const double> t) {
        long idx = 0;
        for (int a = 0; a < d; ++a) {
            int c = static_cast<int>((t[a] - lo[a]) / reach);
            c = std::clamp(c, 0, cells_per_axis[a] - 1);
            idx = idx * cells_per_axis[a] + c;
        }
        return idx;
    };

    std::unordered_map<long, std::vector<int>> buckets;
    buckets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) buckets[cell_of(batch.point(i))].push_back(i);

    RawGraph raw;
    raw.n = n;
    raw.weights.n = n;
    raw.weights.row_ptr.assign(n + 1, 0);
    raw.degrees.assign(n, 0.0);

    std::vector<std::pair<int, double>> row;
    std::vector<int> coords(d);
    for (int i = 0; i < n; ++i) {
        const auto pi = batch.point(i);
        for (int a = 0; a < d; ++a) {
            int c = static_cast<int>((pi[a] - lo[a]) / reach);
            coords[a] = std::clamp(c, 0, cells_per_axis[a] - 1);
        }
        row.clear();
        // scan the 3^d adjacent cells
        const int combos = [&] {
            int c = 1;
            for (int a = 0; a < d; ++a) c *= 3;
            return c;
        }();
        for (int m = 0; m < combos; ++m) {
            long idx = 0;
            int mm = m;
            bool valid = true;
            for (int a = 0; a < d; ++a) {
                const int off = mm % 3 - 1;
                mm /= 3;
                const int c = coords[a] + off;
                if (c < 0 || c >= cells_per_axis[a]) {
                    valid = false;
                    break;
                }
                idx = idx * cells_per_axis[a] + c;
            }
            if (!valid) continue;
            const auto it = buckets.find(idx);
            if (it == buckets.end()) continue;
            for (int j : it->second) {
                if (j <= i) continue;
                const double dist = distance(pi, batch.point(j));
                if (dist > reach) continue;
                const double w = kernel.eval(dist);
                if (w > 0.0) row.emplace_back(j, w);
            }
        }
        std::sort(row.begin(), row.end());
        for (const auto& [j, w] : row) {
            raw.weights.col.push_back(j);
            raw.weights.val.push_back(w);
        }
        raw.weights.row_ptr[i + 1] = static_cast<int>(raw.weights.col.size());
    }
    raw.degrees = raw.weights.row_sums();

    for (int i = 0; i < n; ++i)
        if (!(raw.degrees[i] > 0.0)) {
            std::ostringstream os;
            os << "build_raw_graph: vertex " << i << " is isolated (raw degree 0); "
               << "increase the kernel bandwidth delta=" << kernel.delta();
            throw ConfigError(os.str());
        }
    return raw;
}

WeightedGraph reweight(const RawGraph& raw, double q) {
    for (int i = 0; i < raw.n; ++i)
        if (!(raw.degrees[i] > 0.0))
            throw ConfigError("reweight: nonpositive raw degree at vertex " + std::to_string(i));

    WeightedGraph g;
    g.n = raw.n;
    g.q = q;
    g.raw_weights = raw.weights;
    g.raw_degrees = raw.degrees;

    const double e = 1.0 - 0.5 * q;
    std::vector<double> scale(raw.n);
    for (int i = 0; i < raw.n; ++i) scale[i] = std::pow(raw.degrees[i], e);

    g.weights = raw.weights;
    for (int i = 0; i < g.n; ++i)
        for (int k = g.weights.row_ptr[i]; k < g.weights.row_ptr[i + 1]; ++k)
            g.weights.val[k] = raw.weights.val[k] / (scale[i] * scale[g.weights.col[k]]);
    g.degrees = g.weights.row_sums();
    return g;
}

double delta_rule(int n) {
    if (n < 2) throw ConfigError("delta_rule: n must be >= 2");
    return std::cbrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
}

double dirichlet_energy(const WeightedGraph& graph, const PQRParams& params,
                        std::span<const double> u, double delta) {
    if (static_cast<int>(u.size()) != graph.n)
        throw ConfigError("dirichlet_energy: vector length does not match graph");
    if (params.q != graph.q)
        throw ConfigError("dirichlet_energy: params.q does not match the graph reweighting");

    const double e = params.recover_exponent();
    std::vector<double> s(graph.n);
    for (int i = 0; i < graph.n; ++i)
        s[i] = e == 0.0 ? u[i] : u[i] / std::pow(graph.degrees[i], e);

    double acc = 0.0;
    graph.weights.for_each_upper([&](int i, int j, double w) {
        const double diff = s[i] - s[j];
        acc += w * diff * diff;
    });
    const double n = static_cast<double>(graph.n);
    return std::pow(n, 2.0 * params.r - params.q) / (delta * delta) * acc;
}

} // namespace pqrlab
