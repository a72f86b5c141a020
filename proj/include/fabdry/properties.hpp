#pragma once

// Effective thermophysical properties of a wet fabric, treated as a single
// fibre + liquid continuum whose properties depend on the local moisture
// content M = m_liquid / m_fibre.

namespace fabdry {

inline constexpr double kZeroCelsius = 273.15;

constexpr double celsius_to_kelvin(double celsius) noexcept { return celsius + kZeroCelsius; }
constexpr double kelvin_to_celsius(double kelvin) noexcept { return kelvin - kZeroCelsius; }

/// Liquid permeating the fabric. Defaults: water near 45 C (steam-table values),
/// i.e. saturation at roughly 0.1 bar.
struct FluidProps {
    double c_l = 4180.0;         ///< specific heat, J/(kg K)
    double lambda_l = 0.637;     ///< thermal conductivity, W/(m K)
    double rho_l = 990.2;        ///< density, kg/m^3
    double h_lv = 2.394e6;       ///< latent heat of vaporization, J/kg
    double T_evap = 318.15;      ///< evaporation temperature at operating pressure, K
    double lambda_vap = 0.02;    ///< vapour thermal conductivity, W/(m K)

    /// Throws DomainError unless every field is finite and strictly positive.
    void validate() const;

    bool operator==(const FluidProps&) const = default;
};

/// Dry fabric. Defaults are generic cotton values; rho_f is a bulk (porous) density.
struct FabricProps {
    double c_f = 1300.0;      ///< specific heat, J/(kg K)
    double lambda_f = 0.06;   ///< thermal conductivity, W/(m K)
    double rho_f = 400.0;     ///< bulk density, kg/m^3
    double M_c = 2.0;         ///< critical moisture above which conductivity equals the liquid's

    void validate() const;

    bool operator==(const FabricProps&) const = default;
};

/// Also checks lambda_f < lambda_l, which the linear conductivity law assumes.
void validate(const FluidProps& fluid, const FabricProps& fabric);

/// Mass-weighted specific heat (M c_l + c_f) / (M + 1), J/(kg K).
double heat_capacity(double M, const FluidProps& fluid, const FabricProps& fabric);

/// Linear in M from lambda_f at M = 0 to lambda_l at M = M_c, then constant at
/// lambda_l. The kink at M_c is the only non-smooth point.
double thermal_conductivity(double M, const FluidProps& fluid, const FabricProps& fabric);

/// Mixture density (M + 1) rho_l rho_f / (M rho_f + rho_l), kg/m^3.
double density(double M, const FluidProps& fluid, const FabricProps& fabric);

/// Volumetric heat capacity c(M) rho(M), J/(m^3 K).
inline double volumetric_heat_capacity(double M, const FluidProps& fluid, const FabricProps& fabric) {
    return heat_capacity(M, fluid, fabric) * density(M, fluid, fabric);
}

}  // namespace fabdry
