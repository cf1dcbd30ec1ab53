#include "pqrlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pqrlab/rng.hpp"

namespace pqrlab {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

void check_clusters(const DomainBox& domain, const std::vector<Cluster>& clusters) {
    require(!clusters.empty(), "density: at least one cluster required");
    for (const auto& c : clusters) {
        require(static_cast<int>(c.center.size()) == domain.dim(),
                "density: cluster center dimension mismatch");
        require(c.radius > 0.0, "density: cluster radius must be positive");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string to_string(DensityVariant v) {
    switch (v) {
        case DensityVariant::ErfClusters: return "erf";
        case DensityVariant::PiecewiseConstant: return "piecewise";
        case DensityVariant::ExpMixture: return "expmix";
        case DensityVariant::MollifiedIndicator: return "mollified";
    }
    return "?";
}

DensityVariant density_variant_from_string(const std::string& s) {
    if (s == "erf") return DensityVariant::ErfClusters;
    if (s == "piecewise") return DensityVariant::PiecewiseConstant;
    if (s == "expmix") return DensityVariant::ExpMixture;
    if (s == "mollified") return DensityVariant::MollifiedIndicator;
    throw ConfigError("unknown density variant: " + s);
}

double midpoint_quadrature_2d(const DomainBox& box, int n,
                              const std::function<double(double, double)>& f) {
    const double hx = box.extent(0) / n;
    const double hy = box.extent(1) / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = box.lower[1] + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = box.lower[0] + (i + 0.5) * hx;
            row += f(x, y);
        }
        sum += row;
    }
    return sum * hx * hy;
}

void SampleBatch::write_csv(std::ostream& os) const {
    for (int a = 0; a < dim; ++a) os << "x" << a << ",";
    os << "label\n";
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < dim; ++a) os << format_double(points[static_cast<std::size_t>(i) * dim + a]) << ",";
        os << labels[i] << "\n";
    }
}

double DensityModel::RadialTable::operator()(double dist) const {
    if (values.empty()) return 0.0;
    const double last = step * static_cast<double>(values.size() - 1);
    if (dist >= last) return values.back();
    const double s = dist / step;
    const auto k = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(k);
    return values[k] * (1.0 - frac) + values[k + 1] * frac;
}

DensityModel DensityModel::erf_clusters(DomainBox domain, double epsilon,
                                        std::vector<Cluster> clusters) {
    require(domain.dim() == 2, "erf density: 2d domain required");
    require(epsilon > 0.0, "erf density: epsilon must be positive");
    check_clusters(domain, clusters);

    DensityModel m;
    m.variant_ = DensityVariant::ErfClusters;
    m.domain_ = std::move(domain);
    m.epsilon_ = epsilon;
    m.clusters_ = std::move(clusters);
    m.normalizer_ = midpoint_quadrature_2d(m.domain_, 1024, [&m](double x, double y) {
        const double t[2] = {x, y};
        return m.eval_unnormalized(t);
    });
    return m;
}

DensityModel DensityModel::piecewise_constant(double epsilon) {
    require(epsilon >= 0.0 && epsilon < 5.0 / 3.0,
            "piecewise density: epsilon must lie in [0, 5/3)");
    DensityModel m;
    m.variant_ = DensityVariant::PiecewiseConstant;
    m.domain_ = DomainBox::unit_square();
    m.epsilon_ = epsilon;
    m.normalizer_ = 1.0; // 0.6*eps + 0.4*(2.5 - 1.5*eps) == 1 exactly
    return m;
}

DensityModel DensityModel::exp_mixture(double omega) {
    require(omega > 0.0, "exp mixture: omega must be positive");
    DensityModel m;
    m.variant_ = DensityVariant::ExpMixture;
    m.domain_ = DomainBox::unit_square();
    m.omega_ = omega;
    m.normalizer_ = 1.0; // mixture of normalized truncated exponentials
    return m;
}

DensityModel DensityModel::mollified_indicator(DomainBox domain, double epsilon,
                                               std::vector<Cluster> clusters) {
    require(domain.dim() == 2, "mollified density: 2d domain required");
    require(epsilon > 0.0, "mollified density: epsilon must be positive");
    check_clusters(domain, clusters);

    DensityModel m;
    m.variant_ = DensityVariant::MollifiedIndicator;
    m.domain_ = std::move(domain);
    m.epsilon_ = epsilon;
    m.clusters_ = std::move(clusters);

    double ball_area = 0.0;
    for (const auto& c : m.clusters_) ball_area += kPi * c.radius * c.radius;
    m.indicator_level_ = 1.0 / ball_area;

    // The mollifier is radial, so the convolution with a ball indicator only
    // depends on the distance to the ball center. Integrate the mollifier
    // radially (2048-node midpoint, weights normalized to sum to one) and
    // resolve each shell's angular overlap with the ball in closed form:
    //   frac(d0, s) = acos((d0^2 + s^2 - theta^2) / (2 d0 s)) / pi.
    constexpr int kRadialNodes = 2048;
    std::vector<double> shell_r(kRadialNodes), shell_w(kRadialNodes);
    {
        double total = 0.0;
        for (int i = 0; i < kRadialNodes; ++i) {
            const double s = (i + 0.5) * epsilon / kRadialNodes;
            const double rr = (s / epsilon) * (s / epsilon);
            shell_r[i] = s;
            shell_w[i] = std::exp(-1.0 / (1.0 - rr)) * s;
            total += shell_w[i];
        }
        for (auto& w : shell_w) w /= total;
    }
    auto ball_fraction = [](double d0, double s, double theta) {
        if (d0 + s <= theta) return 1.0;                  // shell inside the ball
        if (d0 >= s + theta || s >= d0 + theta) return 0.0; // disjoint or enclosing
        const double u = (d0 * d0 + s * s - theta * theta) / (2.0 * d0 * s);
        return std::acos(std::clamp(u, -1.0, 1.0)) / kPi;
    };

    // One radial profile of g_eps * 1_ball per distinct radius.
    for (const auto& c : m.clusters_) {
        bool seen = false;
        for (const auto& t : m.conv_tables_) seen = seen || t.radius == c.radius;
        if (seen) continue;

        RadialTable table;
        table.radius = c.radius;
        constexpr int kTableSize = 4096;
        const double reach = c.radius + epsilon;
        table.step = reach / (kTableSize - 1);
        table.values.resize(kTableSize + 1);
        for (int k = 0; k <= kTableSize; ++k) {
            const double d0 = k * table.step;
            double acc = 0.0;
            for (int i = 0; i < kRadialNodes; ++i)
                acc += shell_w[i] * ball_fraction(d0, shell_r[i], c.radius);
            table.values[k] = acc;
        }
        m.conv_tables_.push_back(std::move(table));
    }

    m.normalizer_ = midpoint_quadrature_2d(m.domain_, 1024, [&m](double x, double y) {
        const double t[2] = {x, y};
        return m.eval_unnormalized(t);
    });
    return m;
}

std::string DensityModel::id() const {
    std::ostringstream os;
    os << to_string(variant_);
    if (variant_ == DensityVariant::ExpMixture)
        os << "(omega=" << omega_ << ")";
    else
        os << "(eps=" << epsilon_ << ")";
    if (!clusters_.empty()) os << "[K=" << clusters_.size() << "]";
    return os.str();
}

double DensityModel::mollified_convolution(std::span<const double> t) const {
    double acc = 0.0;
    for (const auto& c : clusters_) {
        const double dist = distance(t, c.center);
        if (dist >= c.radius + epsilon_) continue;
        for (const auto& tab : conv_tables_)
            if (tab.radius == c.radius) {
                acc += tab(dist);
                break;
            }
    }
    return acc * indicator_level_;
}

double DensityModel::eval_unnormalized(std::span<const double> t) const {
    switch (variant_) {
        case DensityVariant::ErfClusters: {
            double acc = epsilon_;
            for (const auto& c : clusters_) {
                const double dist = distance(t, c.center);
                acc += (1.0 + std::erf((c.radius - dist) / epsilon_)) /
                       (4.0 * kPi * c.radius * c.radius);
            }
            return acc;
        }
        case DensityVariant::PiecewiseConstant: {
            const double t1 = t[0];
            return (t1 > 0.2 && t1 < 0.8) ? epsilon_ : 2.5 - 1.5 * epsilon_;
        }
        case DensityVariant::ExpMixture: {
            const double t1 = t[0];
            const double c = 1.0 / (2.0 * omega_ * (1.0 - std::exp(-1.0 / omega_)));
            return c * (std::exp(-t1 / omega_) + std::exp((t1 - 1.0) / omega_));
        }
        case DensityVariant::MollifiedIndicator:
            return epsilon_ + mollified_convolution(t);
    }
    return 0.0;
}

double DensityModel::eval(std::span<const double> t) const {
    if (!domain_.contains(t)) throw ConfigError("density eval: point outside domain box");
    return eval_unnormalized(t) / normalizer_;
}

double DensityModel::rejection_bound() const {
    switch (variant_) {
        case DensityVariant::ErfClusters: {
            double b = epsilon_;
            for (const auto& c : clusters_) b += 1.0 / (2.0 * kPi * c.radius * c.radius);
            return b / normalizer_;
        }
        case DensityVariant::PiecewiseConstant:
            return std::max(epsilon_, 2.5 - 1.5 * epsilon_);
        case DensityVariant::MollifiedIndicator:
            return (epsilon_ + indicator_level_ * static_cast<double>(clusters_.size())) /
                   normalizer_;
        case DensityVariant::ExpMixture:
            break; // sampled by inverse CDF, no bound needed
    }
    return 0.0;
}

int DensityModel::label_of(std::span<const double> t) const {
    switch (variant_) {
        case DensityVariant::ErfClusters:
        case DensityVariant::MollifiedIndicator:
            for (std::size_t i = 0; i < clusters_.size(); ++i)
                if (distance(t, clusters_[i].center) <= clusters_[i].radius)
                    return static_cast<int>(i);
            return -1;
        case DensityVariant::PiecewiseConstant:
            if (t[0] <= 0.2) return 0;
            if (t[0] >= 0.8) return 1;
            return -1;
        case DensityVariant::ExpMixture:
            return t[0] < 0.5 ? 0 : 1;
    }
    return -1;
}

SampleBatch DensityModel::sample(int n, std::uint64_t seed) const {
    require(n >= 1, "sample: n must be >= 1");
    SampleBatch batch;
    batch.n = n;
    batch.dim = domain_.dim();
    batch.seed = seed;
    batch.density_id = id();
    batch.points.resize(static_cast<std::size_t>(n) * batch.dim);
    batch.labels.resize(n);

    SplitMix64 rng(mix_seed(0x6AB302E1C0FFEEULL, seed));

    if (variant_ == DensityVariant::ExpMixture) {
        const double tail = 1.0 - std::exp(-1.0 / omega_);
        for (int i = 0; i < n; ++i) {
            const bool left = rng.uniform01() < 0.5;
            const double s = -omega_ * std::log1p(-rng.uniform01() * tail);
            const double t1 = left ? s : 1.0 - s;
            batch.points[2 * static_cast<std::size_t>(i)] = t1;
            batch.points[2 * static_cast<std::size_t>(i) + 1] = rng.uniform01();
            batch.labels[i] = t1 < 0.5 ? 0 : 1;
        }
        return batch;
    }

    const double bound = rejection_bound();
    const int d = batch.dim;
    std::vector<double> t(d);
    std::uint64_t guard = 0;
    for (int i = 0; i < n; ++i) {
        for (;;) {
            if (++guard > (1ULL << 40))
                throw NumericsError("sample: rejection sampling failed to terminate");
            for (int a = 0; a < d; ++a)
                t[a] = rng.uniform(domain_.lower[a], domain_.upper[a]);
            const double f = eval_unnormalized(t) / normalizer_;
            if (rng.uniform01() * bound <= f) break;
        }
        for (int a = 0; a < d; ++a) batch.points[static_cast<std::size_t>(i) * d + a] = t[a];
        batch.labels[i] = label_of(t);
    }
    return batch;
}

AssumptionReport DensityModel::validate_assumptions() const {
    AssumptionReport rep;

    // positivity on an evaluation grid, plus the epsilon-floor where the
    // construction prescribes one
    const bool has_floor = variant_ == DensityVariant::ErfClusters ||
                           variant_ == DensityVariant::MollifiedIndicator;
    rep.floor_value = has_floor ? epsilon_ / normalizer_ : 0.0;
    {
        double mn = std::numeric_limits<double>::infinity();
        const int g = 256;
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i) {
                const double t[2] = {domain_.lower[0] + (i + 0.5) * domain_.extent(0) / g,
                                     domain_.lower[1] + (j + 0.5) * domain_.extent(1) / g};
                mn = std::min(mn, eval_unnormalized(t) / normalizer_);
            }
        rep.min_density = mn;
        rep.positivity_ok = mn > 0.0 && (!has_floor || mn >= rep.floor_value * (1.0 - 1e-9));
    }

    // normalization within 1e-6; separable variants integrate in 1d
    switch (variant_) {
        case DensityVariant::PiecewiseConstant:
            rep.integral = 0.6 * epsilon_ + 0.4 * (2.5 - 1.5 * epsilon_);
            break;
        case DensityVariant::ExpMixture: {
            const int g = 1 << 20;
            const double h = 1.0 / g;
            double acc = 0.0;
            for (int i = 0; i < g; ++i) {
                const double t[2] = {(i + 0.5) * h, 0.5};
                acc += eval_unnormalized(t);
            }
            rep.integral = acc * h;
            break;
        }
        default:
            rep.integral = midpoint_quadrature_2d(domain_, 1024, [this](double x, double y) {
                const double t[2] = {x, y};
                return eval_unnormalized(t) / normalizer_;
            });
    }
    rep.normalization_ok = std::abs(rep.integral - 1.0) <= 1e-6;

    // cluster separation: dist(Z+, Z-) > l > 0 and dist(Z+-, boundary) > l' > 0
    if (has_floor) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters_.size(); ++i)
            for (std::size_t j = i + 1; j < clusters_.size(); ++j)
                gap = std::min(gap, distance(clusters_[i].center, clusters_[j].center) -
                                        clusters_[i].radius - clusters_[j].radius);
        if (clusters_.size() < 2) gap = std::numeric_limits<double>::infinity();
        double bgap = std::numeric_limits<double>::infinity();
        for (const auto& c : clusters_)
            for (int a = 0; a < domain_.dim(); ++a) {
                bgap = std::min(bgap, c.center[a] - c.radius - domain_.lower[a]);
                bgap = std::min(bgap, domain_.upper[a] - c.center[a] - c.radius);
            }
        rep.min_cluster_gap = gap;
        rep.min_boundary_gap = bgap;
        rep.separation_ok = gap > 0.0 && bgap > 0.0;
        if (!rep.separation_ok) rep.notes.push_back("cluster balls overlap or touch the boundary");
    }

    if (variant_ == DensityVariant::PiecewiseConstant) {
        rep.perturbation_form_ok = false;
        rep.notes.push_back("violates smoothness assumption: density is discontinuous");
    }
    if (variant_ == DensityVariant::ExpMixture) {
        rep.perturbation_form_ok = false;
        rep.notes.push_back(
            "violates exact-floor assumption: exponential tails are not a constant times the scale");
    }
    rep.notes.push_back("gradient bound in the collar not checked");
    return rep;
}

DensityModel DensityModel::from_json(const nlohmann::json& j) {
    const auto variant = density_variant_from_string(j.at("variant").get<std::string>());
    DomainBox domain = DomainBox::unit_square();
    if (j.contains("domain")) {
        domain = DomainBox(j["domain"].at("lower").get<std::vector<double>>(),
                           j["domain"].at("upper").get<std::vector<double>>());
    } else if (variant == DensityVariant::ErfClusters ||
               variant == DensityVariant::MollifiedIndicator) {
        domain = DomainBox::centered_square();
    }

    std::vector<Cluster> clusters;
    if (j.contains("clusters"))
        for (const auto& cj : j["clusters"]) {
            Cluster c;
            c.center = cj.at("center").get<std::vector<double>>();
            c.radius = cj.at("radius").get<double>();
            clusters.push_back(std::move(c));
        }

    switch (variant) {
        case DensityVariant::ErfClusters:
            return erf_clusters(std::move(domain), j.at("epsilon").get<double>(),
                                std::move(clusters));
        case DensityVariant::MollifiedIndicator:
            return mollified_indicator(std::move(domain), j.at("epsilon").get<double>(),
                                       std::move(clusters));
        case DensityVariant::PiecewiseConstant: {
            if (j.contains("domain") && domain.volume() != 1.0)
                throw ConfigError("piecewise density is defined on the unit square");
            return piecewise_constant(j.at("epsilon").get<double>());
        }
        case DensityVariant::ExpMixture: {
            if (j.contains("domain") && domain.volume() != 1.0)
                throw ConfigError("exp mixture is defined on the unit square");
            return exp_mixture(j.at("omega").get<double>());
        }
    }
    throw ConfigError("unreachable density variant");
}

nlohmann::json DensityModel::to_json() const {
    nlohmann::json j;
    j["variant"] = to_string(variant_);
    j["domain"] = {{"lower", domain_.lower}, {"upper", domain_.upper}};
    if (variant_ == DensityVariant::ExpMixture)
        j["omega"] = omega_;
    else
        j["epsilon"] = epsilon_;
    if (!clusters_.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& c : clusters_)
            arr.push_back({{"center", c.center}, {"radius", c.radius}});
        j["clusters"] = arr;
    }
    return j;
}

DensityModel DensityModel::with_scale(double value) const {
    switch (variant_) {
        case DensityVariant::ErfClusters:
            return erf_clusters(domain_, value, clusters_);
        case DensityVariant::MollifiedIndicator:
            return mollified_indicator(domain_, value, clusters_);
        case DensityVariant::PiecewiseConstant:
            return piecewise_constant(value);
        case DensityVariant::ExpMixture:
            return exp_mixture(value);
    }
    throw ConfigError("unreachable density variant");
}

} // namespace pqrlab
