#include "pqrlab/kernel.hpp"

#include <cmath>
#include <numbers>

#include "pqrlab/errors.hpp"

namespace pqrlab {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return kPi;
        case 3: return 4.0 * kPi / 3.0;
    }
    throw ConfigError("kernel: dimension must be 1, 2 or 3");
}

double unit_sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * kPi;
        case 3: return 4.0 * kPi;
    }
    throw ConfigError("kernel: dimension must be 1, 2 or 3");
}

/// Composite Simpson on [0, b] with n (even) intervals.
double simpson(double b, int n, const auto& f) {
    const double h = b / n;
    double acc = f(0.0) + f(b);
    for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

std::string to_string(KernelProfile p) {
    switch (p) {
        case KernelProfile::Indicator: return "indicator";
        case KernelProfile::Gaussian: return "gaussian";
        case KernelProfile::Epanechnikov: return "epanechnikov";
    }
    return "?";
}

KernelProfile kernel_profile_from_string(const std::string& s) {
    if (s == "indicator") return KernelProfile::Indicator;
    if (s == "gaussian") return KernelProfile::Gaussian;
    if (s == "epanechnikov") return KernelProfile::Epanechnikov;
    throw ConfigError("unknown kernel profile: " + s);
}

KernelSpec::KernelSpec(KernelProfile profile, double delta, int dim)
    : profile_(profile), delta_(delta), dim_(dim) {
    if (!(delta > 0.0)) throw ConfigError("kernel: delta must be positive");
    unit_ball_volume(dim); // validates dim

    const double support = profile_ == KernelProfile::Gaussian ? 4.0 : 1.0;
    const double area = unit_sphere_area(dim_);
    auto moments = [&](int n) {
        const double m0 = area * simpson(support, n, [&](double t) {
            return base(t) * std::pow(t, dim_ - 1);
        });
        const double m2 = area / dim_ * simpson(support, n, [&](double t) {
            return base(t) * std::pow(t, dim_ + 1);
        });
        return std::pair{m0, m2};
    };
    const auto [a0, a2] = moments(4096);
    const auto [b0, b2] = moments(8192);
    if (std::abs(a0 - b0) > 1e-6 * b0 || std::abs(a2 - b2) > 1e-6 * b2)
        throw NumericsError("kernel: moment quadrature did not converge to 1e-6");
    s0_ = b0;
    s2_ = b2;
}

double KernelSpec::base(double t) const {
    switch (profile_) {
        case KernelProfile::Indicator:
            return t <= 1.0 ? 1.0 / unit_ball_volume(dim_) : 0.0;
        case KernelProfile::Gaussian:
            return t <= 4.0 ? std::pow(2.0 * kPi, -0.5 * dim_) * std::exp(-0.5 * t * t) : 0.0;
        case KernelProfile::Epanechnikov:
            return t <= 1.0 ? 1.0 - t * t : 0.0;
    }
    return 0.0;
}

double KernelSpec::eval(double dist) const {
    return std::pow(delta_, -dim_) * base(dist / delta_);
}

double KernelSpec::support_radius() const {
    return (profile_ == KernelProfile::Gaussian ? 4.0 : 1.0) * delta_;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    const auto profile = kernel_profile_from_string(j.at("profile").get<std::string>());
    const double delta = j.at("delta").get<double>();
    const int dim = j.value("dim", 2);
    return KernelSpec(profile, delta, dim);
}

nlohmann::json KernelSpec::to_json() const {
    return {{"profile", to_string(profile_)},
            {"delta", delta_},
            {"dim", dim_},
            {"s0", s0_},
            {"s2", s2_}};
}

} // namespace pqrlab
