#include "fabdry/kinetics.hpp"

#include <cmath>
#include <string>

#include "fabdry/errors.hpp"

namespace fabdry {

void EvapParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(k) || k < 0.0) throw DomainError("kinetics.k must be finite and >= 0");
    if (!finite(M_b) || M_b < 0.0) throw DomainError("kinetics.M_b must be finite and >= 0");
    if (!finite(gamma) || gamma <= 0.0) throw DomainError("kinetics.gamma must be finite and > 0");
    if (!finite(beta) || beta <= 0.0) throw DomainError("kinetics.beta must be finite and > 0");
}

double logistic(double z) noexcept {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double smoothed_max(double delta_T, double beta) {
    if (!std::isfinite(delta_T)) {
        throw DomainError("smoothed_max: non-finite temperature difference");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError("smoothed_max: beta must be finite and positive");
    }
    return delta_T * logistic(beta * delta_T);
}

double evap_rate(double M, const EvapParams& params) {
    if (!std::isfinite(M) || M < 0.0) {
        throw DomainError("evap_rate: moisture must be finite and non-negative, got " + std::to_string(M));
    }
    return params.k * logistic(params.gamma * (M - params.M_b));
}

double evap_rate_derivative(double M, const EvapParams& params) {
    const double s = logistic(params.gamma * (M - params.M_b));
    return params.k * params.gamma * s * (1.0 - s);
}

double moisture_rhs(double T, double M, const EvapParams& params, double T_evap) {
    return -evap_rate(M, params) * smoothed_max(T - T_evap, params.beta);
}

}  // namespace fabdry
