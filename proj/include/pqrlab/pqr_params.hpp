#ifndef PQRLAB_PQR_PARAMS_HPP
#define PQRLAB_PQR_PARAMS_HPP

#include <cmath>

#include "pqrlab/errors.hpp"

namespace pqrlab {

/// The three normalization exponents of the graph Laplacian family
///   L_N = D^{(1-p)/(q-1)} (D - W) D^{-r/(q-1)}   (q != 1),
///   L_N = D - W                                  (q == 1).
struct PQRParams {
    double p = 1.0;
    double q = 2.0;
    double r = 0.0;

    /// Hypothesis of the spectral-gap theory; recorded, never enforced.
    bool theory_valid() const { return q > 0.0 && p + r > 0.0; }

    bool balanced() const { return q == p + r; }

    /// Exponent recovering u = D^e v from the symmetric reduction.
    double recover_exponent() const { return q == 1.0 ? 0.0 : r / (q - 1.0); }

    /// Exponent of the diagonal weight B = D^e in (D - W) v = sigma B v.
    double b_exponent() const { return q == 1.0 ? 0.0 : (p + r - 1.0) / (q - 1.0); }

    void validate() const {
        if (q != 1.0) {
            const double e1 = (1.0 - p) / (q - 1.0);
            if (!std::isfinite(e1) || !std::isfinite(recover_exponent()) ||
                !std::isfinite(b_exponent()))
                throw ConfigError("pqr params: normalization exponents are not finite");
        }
    }
};

} // namespace pqrlab

#endif
