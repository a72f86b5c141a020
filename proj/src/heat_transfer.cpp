#include "fabdry/heat_transfer.hpp"

#include <cmath>
#include <string>

#include "fabdry/errors.hpp"

namespace fabdry {

namespace {

bool valid_emissivity(double eps) { return std::isfinite(eps) && eps > 0.0 && eps <= 1.0; }

}  // namespace

void ExchangeConfig::validate() const {
    if (!std::isfinite(D_cyl) || D_cyl <= 0.0) throw DomainError("exchange.D_cyl must be positive");
    if (!std::isfinite(D_env) || !(D_cyl < D_env)) throw DomainError("exchange.D_env must exceed exchange.D_cyl");
    if (!valid_emissivity(eps_cyl)) throw DomainError("exchange.eps_cyl must lie in (0, 1]");
    if (!valid_emissivity(eps_env)) throw DomainError("exchange.eps_env must lie in (0, 1]");
    if (!std::isfinite(Re) || Re < 0.0) throw DomainError("exchange.Re must be >= 0");
    if (!std::isfinite(Gr) || Gr < 0.0) throw DomainError("exchange.Gr must be >= 0");
    if (!std::isfinite(Pr) || Pr < 0.0) throw DomainError("exchange.Pr must be >= 0");
    if (!std::isfinite(T_env) || T_env <= 0.0) throw DomainError("exchange.T_env must be a positive absolute temperature");
}

double nusselt(double Re, double Gr, double Pr) {
    if (!(Re >= 0.0) || !(Gr >= 0.0) || !(Pr >= 0.0)) {
        throw DomainError("nusselt: Re, Gr and Pr must be non-negative");
    }
    const double arg = 0.5 * Re * Re + Gr * Pr;
    if (!(arg > 0.0) || !std::isfinite(arg)) {
        throw DomainError("nusselt: 0.5 Re^2 + Gr Pr must be positive and finite");
    }
    return 0.11 * std::pow(arg, 0.35);
}

double h_conv(double Nu, double lambda_vap, double D_cyl) {
    if (!(D_cyl > 0.0)) {
        throw DomainError("h_conv: cylinder diameter must be positive");
    }
    return Nu * lambda_vap / D_cyl;
}

double h_irr(double T_cyl, double T_env, const ExchangeConfig& cfg) {
    if (!(T_cyl > 0.0) || !(T_env > 0.0)) {
        throw DomainError("h_irr: temperatures must be absolute (positive kelvin)");
    }
    if (!valid_emissivity(cfg.eps_cyl) || !valid_emissivity(cfg.eps_env)) {
        throw DomainError("h_irr: emissivities must lie in (0, 1]");
    }
    const double F = cfg.view_factor();
    const double resistance =
        (1.0 - cfg.eps_cyl) / cfg.eps_cyl + 1.0 + F * (1.0 - cfg.eps_env) / cfg.eps_env;
    return kStefanBoltzmann * (T_cyl * T_cyl + T_env * T_env) * (T_cyl + T_env) / resistance;
}

double z_ht(double T_cyl, const ExchangeConfig& cfg, double lambda_vap) {
    const double Nu = nusselt(cfg.Re, cfg.Gr, cfg.Pr);
    return h_conv(Nu, lambda_vap, cfg.D_cyl) + h_irr(T_cyl, cfg.T_env, cfg);
}

}  // namespace fabdry
