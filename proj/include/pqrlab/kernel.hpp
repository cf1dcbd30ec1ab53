#ifndef PQRLAB_KERNEL_HPP
#define PQRLAB_KERNEL_HPP

#include <string>

#include "json.hpp"

namespace pqrlab {

enum class KernelProfile { Indicator, Gaussian, Epanechnikov };

std::string to_string(KernelProfile p);
KernelProfile kernel_profile_from_string(const std::string& s);

/// Radial edge-weight profile eta with bandwidth delta. The moments
///   s0 = int eta(|x|) dx,   s2 = int |e1 . x|^2 eta(|x|) dx
/// are evaluated by radial quadrature at construction and cross-checked at
/// two resolutions to 1e-6. The Gaussian profile is truncated at 4 delta and
/// s0, s2 refer to the truncated profile.
class KernelSpec {
public:
    KernelSpec(KernelProfile profile, double delta, int dim);

    KernelProfile profile() const { return profile_; }
    double delta() const { return delta_; }
    int dim() const { return dim_; }
    double s0() const { return s0_; }
    double s2() const { return s2_; }

    /// Base profile eta(t), t in units of the bandwidth.
    double base(double t) const;

    /// eta_delta(dist) = delta^-d eta(dist / delta).
    double eval(double dist) const;

    /// Radius beyond which eta_delta vanishes (4 delta for the truncated
    /// Gaussian, delta otherwise). Points at exactly this distance are
    /// included (closed ball).
    double support_radius() const;

    static KernelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    KernelProfile profile_;
    double delta_;
    int dim_;
    double s0_ = 0.0;
    double s2_ = 0.0;
};

} // namespace pqrlab

#endif
