#pragma once

#include <array>

namespace fabdry {

/// Evaporation kinetics. k is in 1/(K s) so that kappa(M) * (T - T_evap) is a rate in 1/s.
/// beta is held fixed during calibration; only (k, M_b, gamma) are fitted.
struct EvapParams {
    double k = 5e-4;       ///< evaporation rate coefficient, 1/(K s)
    double M_b = 0.1;      ///< moisture level at which drying slows down
    double gamma = 70.0;   ///< steepness of the moisture logistic
    double beta = 3.0;     ///< steepness of the temperature logistic, 1/K

    /// k >= 0 (k = 0 switches evaporation off), M_b >= 0, gamma > 0, beta > 0, all finite.
    void validate() const;

    std::array<double, 3> fitted() const noexcept { return {k, M_b, gamma}; }
    static EvapParams from_fitted(const std::array<double, 3>& p, double beta = 3.0) noexcept {
        return {p[0], p[1], p[2], beta};
    }

    bool operator==(const EvapParams&) const = default;
};

/// Numerically stable logistic 1 / (1 + exp(-z)). Only exp of a non-positive
/// argument is ever taken, so no intermediate overflows for any finite z.
double logistic(double z) noexcept;

/// Smooth replacement for max(delta_T, 0): delta_T / (1 + exp(-beta delta_T)).
/// Throws DomainError for non-finite delta_T or beta <= 0.
double smoothed_max(double delta_T, double beta);

/// kappa(M) = k / (1 + exp(-gamma (M - M_b))). Strictly increasing in M, range (0, k).
double evap_rate(double M, const EvapParams& params);

/// d kappa / dM.
double evap_rate_derivative(double M, const EvapParams& params);

/// dM/dt = -kappa(M) * smoothed_max(T - T_evap, beta).
double moisture_rhs(double T, double M, const EvapParams& params, double T_evap);

}  // namespace fabdry
