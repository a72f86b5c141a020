#pragma once

// Exchange coefficient for the free (non-contact) face of the fabric:
// z_ht = h_conv + h_irr, with a mixed-convection Nusselt correlation and
// grey-body radiation between a cylinder and a concentric cylindrical enclosure.

namespace fabdry {

/// CODATA 2018.
inline constexpr double kStefanBoltzmann = 5.670374419e-8;  // W/(m^2 K^4)

struct ExchangeConfig {
    double D_cyl = 0.5;     ///< heated cylinder diameter, m
    double D_env = 1.0;     ///< enclosure diameter, m
    double eps_cyl = 0.9;   ///< cylinder-side emissivity, (0, 1]
    double eps_env = 0.9;   ///< enclosure emissivity, (0, 1]
    double Re = 100.0;      ///< Reynolds number
    double Gr = 1.0e6;      ///< Grashof number
    double Pr = 0.7;        ///< Prandtl number
    double T_env = 318.15;  ///< environment temperature, K

    /// Enclosure-to-cylinder view factor, taken as the diameter ratio.
    double view_factor() const noexcept { return D_cyl / D_env; }

    /// Throws DomainError on D_cyl >= D_env, emissivities outside (0, 1],
    /// negative dimensionless groups or non-positive T_env.
    void validate() const;

    bool operator==(const ExchangeConfig&) const = default;
};

/// Nu = 0.11 (0.5 Re^2 + Gr Pr)^0.35. A zero argument is rejected.
double nusselt(double Re, double Gr, double Pr);

/// Nu lambda_vap / D_cyl.
double h_conv(double Nu, double lambda_vap, double D_cyl);

/// Linearized radiative coefficient q / (T_cyl - T_env), written in the
/// factored form so that T_cyl == T_env is regular. Symmetric in the two temperatures.
double h_irr(double T_cyl, double T_env, const ExchangeConfig& cfg);

/// h_conv + h_irr, evaluated once per simulation at the cylinder temperature.
double z_ht(double T_cyl, const ExchangeConfig& cfg, double lambda_vap);

}  // namespace fabdry
