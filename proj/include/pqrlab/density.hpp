#ifndef PQRLAB_DENSITY_HPP
#define PQRLAB_DENSITY_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqrlab/geometry.hpp"

namespace pqrlab {

enum class DensityVariant { ErfClusters, PiecewiseConstant, ExpMixture, MollifiedIndicator };

std::string to_string(DensityVariant v);
DensityVariant density_variant_from_string(const std::string& s);

/// Circular cluster: center c_i and radius theta_i.
struct Cluster {
    std::vector<double> center;
    double radius = 0.0;
};

/// Point cloud drawn i.i.d. from a density, with generative ground truth.
struct SampleBatch {
    int n = 0;
    int dim = 0;
    std::vector<double> points; ///< row-major n x dim
    std::vector<int> labels;    ///< cluster index, -1 for background/strip
    std::uint64_t seed = 0;
    std::string density_id;

    std::span<const double> point(int i) const {
        return {points.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }

    /// CSV with header x0,...,x{d-1},label.
    void write_csv(std::ostream& os) const;
};

/// Structured result of checking a model against the clustered-density
/// assumptions. Report-only; nothing throws here.
struct AssumptionReport {
    bool positivity_ok = false;
    double min_density = 0.0;
    double floor_value = 0.0; ///< expected epsilon-floor level, 0 if not applicable

    bool normalization_ok = false;
    double integral = 0.0;

    bool separation_ok = true;      ///< pairwise and boundary gaps positive (erf/mollified)
    double min_cluster_gap = 0.0;   ///< l  = min over pairs of dist - theta_i - theta_j
    double min_boundary_gap = 0.0;  ///< l' = min over clusters of gap to the box boundary

    bool perturbation_form_ok = true; ///< false when the exact K2*eps floor / smoothness fails

    std::vector<std::string> notes;

    bool all_ok() const {
        return positivity_ok && normalization_ok && separation_ok && perturbation_form_ok;
    }
};

/// Parameterized clustered probability density on a rectangular domain.
/// Immutable after construction; cheap to share across threads.
class DensityModel {
public:
    /// Multi-cluster density with smoothed circular bumps over an epsilon
    /// floor on `domain`; the normalizer is fixed at construction by
    /// composite midpoint quadrature on a 1024 x 1024 grid.
    static DensityModel erf_clusters(DomainBox domain, double epsilon,
                                     std::vector<Cluster> clusters);

    /// Two-level mixture on (0,1)^2: eps inside the strip t1 in (0.2, 0.8),
    /// 2.5 - 1.5 eps on the side blocks. Normalized exactly by construction.
    static DensityModel piecewise_constant(double epsilon);

    /// Mixture of two truncated exponentials in t1 on [0,1]^2, uniform in t2;
    /// omega controls the overlap of the components.
    static DensityModel exp_mixture(double omega);

    /// (eps + g_eps * rho_0) / K_eps where rho_0 is the uniform density on the
    /// union of the cluster balls and g_eps the standard mollifier. The
    /// convolution is evaluated by 64 x 64 midpoint quadrature over the
    /// mollifier support and cached as a radial profile per cluster radius.
    static DensityModel mollified_indicator(DomainBox domain, double epsilon,
                                            std::vector<Cluster> clusters);

    DensityVariant variant() const { return variant_; }
    const DomainBox& domain() const { return domain_; }
    double epsilon() const { return epsilon_; }
    double omega() const { return omega_; }
    const std::vector<Cluster>& clusters() const { return clusters_; }
    double normalizer() const { return normalizer_; }

    /// Identifier echoed into SampleBatch and reports.
    std::string id() const;

    /// Density value at t. Throws ConfigError when t lies outside the closed
    /// domain box.
    double eval(std::span<const double> t) const;

    /// n i.i.d. draws; deterministic given seed.
    SampleBatch sample(int n, std::uint64_t seed) const;

    AssumptionReport validate_assumptions() const;

    /// Ground-truth label of a position (generative component; -1 background).
    int label_of(std::span<const double> t) const;

    static DensityModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    /// Returns a copy with the perturbation scale replaced (epsilon for
    /// erf/piecewise/mollified, omega for the exponential mixture) and the
    /// normalizer recomputed. Used by sweep drivers.
    DensityModel with_scale(double value) const;

private:
    DensityModel() = default;

    double eval_unnormalized(std::span<const double> t) const;
    double rejection_bound() const;

    DensityVariant variant_ = DensityVariant::ErfClusters;
    DomainBox domain_;
    double epsilon_ = 0.0;
    double omega_ = 0.0;
    std::vector<Cluster> clusters_;
    double normalizer_ = 1.0;

    // MollifiedIndicator: radial profile of g_eps * 1_ball per distinct
    // radius, sampled uniformly in distance and interpolated linearly.
    struct RadialTable {
        double radius = 0.0;
        double step = 0.0;
        std::vector<double> values;
        double operator()(double dist) const;
    };
    std::vector<RadialTable> conv_tables_;
    double indicator_level_ = 0.0; ///< rho_0 level on the cluster union

    double mollified_convolution(std::span<const double> t) const;
};

/// Composite midpoint quadrature of f over the box on an n x n grid (d = 2).
double midpoint_quadrature_2d(const DomainBox& box, int n,
                              const std::function<double(double, double)>& f);

} // namespace pqrlab

#endif
