#ifndef PQRLAB_GEOMETRY_HPP
#define PQRLAB_GEOMETRY_HPP

#include <cmath>
#include <span>
#include <vector>

#include "pqrlab/errors.hpp"

namespace pqrlab {

/// Axis-aligned rectangular domain in d dimensions (d <= 3).
struct DomainBox {
    std::vector<double> lower;
    std::vector<double> upper;

    DomainBox() = default;
    DomainBox(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.empty() || lower.size() > 3)
            throw ConfigError("DomainBox: dimension must be 1, 2 or 3");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw ConfigError("DomainBox: lower[i] < upper[i] required");
    }

    static DomainBox unit_square() { return DomainBox({0.0, 0.0}, {1.0, 1.0}); }
    static DomainBox centered_square() { return DomainBox({-1.0, -1.0}, {1.0, 1.0}); }

    int dim() const { return static_cast<int>(lower.size()); }

    double extent(int axis) const { return upper[axis] - lower[axis]; }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim(); ++i) v *= extent(i);
        return v;
    }

    bool contains(std::span<const double> t) const {
        if (static_cast<int>(t.size()) != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (t[i] < lower[i] || t[i] > upper[i]) return false;
        return true;
    }
};

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(sq_distance(a, b));
}

} // namespace pqrlab

#endif
