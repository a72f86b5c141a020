#include "fabdry/properties.hpp"

#include <cmath>
#include <string>

#include "fabdry/errors.hpp"

namespace fabdry {

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw DomainError(std::string(name) + " must be finite and positive, got " + std::to_string(value));
    }
}

void require_moisture(double M) {
    if (!(M >= 0.0) || !std::isfinite(M)) {
        throw DomainError("moisture content must be finite and non-negative, got " + std::to_string(M));
    }
}

}  // namespace

void FluidProps::validate() const {
    require_positive(c_l, "fluid.c_l");
    require_positive(lambda_l, "fluid.lambda_l");
    require_positive(rho_l, "fluid.rho_l");
    require_positive(h_lv, "fluid.h_lv");
    require_positive(T_evap, "fluid.T_evap");
    require_positive(lambda_vap, "fluid.lambda_vap");
}

void FabricProps::validate() const {
    require_positive(c_f, "fabric.c_f");
    require_positive(lambda_f, "fabric.lambda_f");
    require_positive(rho_f, "fabric.rho_f");
    require_positive(M_c, "fabric.M_c");
}

void validate(const FluidProps& fluid, const FabricProps& fabric) {
    fluid.validate();
    fabric.validate();
    if (!(fabric.lambda_f < fluid.lambda_l)) {
        throw DomainError("fabric.lambda_f must be below fluid.lambda_l");
    }
}

double heat_capacity(double M, const FluidProps& fluid, const FabricProps& fabric) {
    require_moisture(M);
    return (M * fluid.c_l + fabric.c_f) / (M + 1.0);
}

double thermal_conductivity(double M, const FluidProps& fluid, const FabricProps& fabric) {
    require_moisture(M);
    if (M >= fabric.M_c) {
        return fluid.lambda_l;
    }
    return M * (fluid.lambda_l - fabric.lambda_f) / fabric.M_c + fabric.lambda_f;
}

double density(double M, const FluidProps& fluid, const FabricProps& fabric) {
    require_moisture(M);
    return (M + 1.0) * fluid.rho_l * fabric.rho_f / (M * fabric.rho_f + fluid.rho_l);
}

}  // namespace fabdry
