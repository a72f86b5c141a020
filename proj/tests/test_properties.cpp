#include <doctest.h>

#include <cmath>
#include <limits>

#include "fabdry/errors.hpp"
#include "fabdry/properties.hpp"

using namespace fabdry;

namespace {

FluidProps water(double c_l, double lambda_l, double rho_l) {
    FluidProps f;
    f.c_l = c_l;
    f.lambda_l = lambda_l;
    f.rho_l = rho_l;
    return f;
}

}  // namespace

TEST_CASE("heat capacity: dry limit, hand value and asymptote") {
    const FluidProps fluid = water(4186.0, 0.63, 990.0);
    const FabricProps fabric;
    CHECK(heat_capacity(0.0, fluid, fabric) == doctest::Approx(fabric.c_f).epsilon(1e-15));
    // (1 * 4186 + 1300) / 2
    CHECK(heat_capacity(1.0, fluid, fabric) == doctest::Approx(2743.0).epsilon(1e-15));
    // c_l - c(M) = (c_l - c_f) / (M + 1): the gap closes like 1/M
    for (double M : {1e3 * fabric.c_f / fluid.c_l, 1e3, 1e6}) {
        const double gap = (fluid.c_l - heat_capacity(M, fluid, fabric)) / fluid.c_l;
        CHECK(gap == doctest::Approx((fluid.c_l - fabric.c_f) / (fluid.c_l * (M + 1.0))).epsilon(1e-9));
    }
    CHECK((fluid.c_l - heat_capacity(1e3, fluid, fabric)) / fluid.c_l <= 1e-3);
}

TEST_CASE("conductivity: dry limit, saturation at M_c, linear law, clamp") {
    const FluidProps fluid = water(4186.0, 0.63, 990.0);
    FabricProps fabric;
    fabric.lambda_f = 0.06;
    fabric.M_c = 2.0;
    CHECK(thermal_conductivity(0.0, fluid, fabric) == doctest::Approx(0.06).epsilon(1e-15));
    CHECK(thermal_conductivity(2.0, fluid, fabric) == doctest::Approx(0.63).epsilon(1e-15));
    // 1 * (0.63 - 0.06) / 2 + 0.06
    CHECK(thermal_conductivity(1.0, fluid, fabric) == doctest::Approx(0.345).epsilon(1e-14));
    CHECK(thermal_conductivity(7.5, fluid, fabric) == 0.63);
}

TEST_CASE("density: dry limit, hand value, asymptote") {
    const FluidProps fluid = water(4186.0, 0.63, 990.0);
    FabricProps fabric;
    fabric.rho_f = 400.0;
    CHECK(density(0.0, fluid, fabric) == doctest::Approx(400.0).epsilon(1e-15));
    // 2 * 990 * 400 / (400 + 990)
    CHECK(density(1.0, fluid, fabric) == doctest::Approx(569.7841726618705).epsilon(1e-13));
    CHECK(density(1e9, fluid, fabric) == doctest::Approx(990.0).epsilon(1e-6));
}

TEST_CASE("negative or non-finite moisture is a domain error") {
    const FluidProps fluid;
    const FabricProps fabric;
    CHECK_THROWS_AS(heat_capacity(-1e-9, fluid, fabric), DomainError);
    CHECK_THROWS_AS(thermal_conductivity(-1.0, fluid, fabric), DomainError);
    CHECK_THROWS_AS(density(-0.5, fluid, fabric), DomainError);
    CHECK_THROWS_AS(density(std::numeric_limits<double>::quiet_NaN(), fluid, fabric), DomainError);
}

TEST_CASE("property sets are validated") {
    FluidProps fluid;
    FabricProps fabric;
    CHECK_NOTHROW(validate(fluid, fabric));
    fabric.lambda_f = fluid.lambda_l;
    CHECK_THROWS_AS(validate(fluid, fabric), DomainError);
    fabric = FabricProps{};
    fabric.M_c = 0.0;
    CHECK_THROWS_AS(validate(fluid, fabric), DomainError);
    fluid.h_lv = -1.0;
    CHECK_THROWS_AS(fluid.validate(), DomainError);
}

TEST_CASE("properties are finite, positive and monotone on [0, 5]") {
    const FluidProps fluid;
    const FabricProps fabric;
    const bool c_up = fluid.c_l > fabric.c_f;
    const bool rho_up = fluid.rho_l > fabric.rho_f;
    double c_prev = heat_capacity(0.0, fluid, fabric);
    double rho_prev = density(0.0, fluid, fabric);
    for (int i = 1; i <= 500; ++i) {
        const double M = 0.01 * i;
        const double c = heat_capacity(M, fluid, fabric);
        const double rho = density(M, fluid, fabric);
        const double lam = thermal_conductivity(M, fluid, fabric);
        REQUIRE(std::isfinite(c));
        REQUIRE(std::isfinite(rho));
        REQUIRE(std::isfinite(lam));
        CHECK(c > 0.0);
        CHECK(rho > 0.0);
        CHECK(lam > 0.0);
        CHECK((c_up ? c > c_prev : c < c_prev));
        CHECK((rho_up ? rho > rho_prev : rho < rho_prev));
        CHECK(rho >= std::min(fluid.rho_l, fabric.rho_f));
        CHECK(rho <= std::max(fluid.rho_l, fabric.rho_f));
        c_prev = c;
        rho_prev = rho;
    }
}

TEST_CASE("conductivity is piecewise linear and continuous at M_c") {
    const FluidProps fluid;
    const FabricProps fabric;
    for (double a = 0.05; a + 0.2 < fabric.M_c; a += 0.1) {
        const double h = 0.1;
        const double second = thermal_conductivity(a, fluid, fabric) - 2.0 * thermal_conductivity(a + h, fluid, fabric) +
                              thermal_conductivity(a + 2 * h, fluid, fabric);
        CHECK(std::abs(second) <= 4.0 * std::numeric_limits<double>::epsilon() * fluid.lambda_l);
    }
    const double below = thermal_conductivity(std::nextafter(fabric.M_c, 0.0), fluid, fabric);
    const double above = thermal_conductivity(std::nextafter(fabric.M_c, 10.0), fluid, fabric);
    CHECK(std::abs(above - below) <= 1e-12);
}

TEST_CASE("celsius conversion") {
    CHECK(celsius_to_kelvin(45.0) == doctest::Approx(318.15));
    CHECK(kelvin_to_celsius(celsius_to_kelvin(130.0)) == doctest::Approx(130.0));
}
