#include <doctest.h>

#include <cmath>
#include <limits>

#include "fabdry/errors.hpp"
#include "fabdry/kinetics.hpp"

using namespace fabdry;

TEST_CASE("smoothed max: zero, cold anchor, saturation") {
    CHECK(smoothed_max(0.0, 3.0) == 0.0);
    // -30 / (1 + e^90) = -2.4582e-38
    const double cold = smoothed_max(-30.0, 3.0);
    CHECK(cold == doctest::Approx(-2.4582037871971546e-38).epsilon(1e-12));
    CHECK(std::abs(cold - (-2.5e-38)) <= 0.05 * 2.5e-38);
    CHECK(std::abs(smoothed_max(50.0, 3.0) - 50.0) / 50.0 <= 1e-15);
}

TEST_CASE("smoothed max is overflow safe and rejects bad input") {
    const double v = smoothed_max(-1e6, 3.0);
    CHECK(std::isfinite(v));
    CHECK(v <= 0.0);
    CHECK(v >= -1e-300);
    CHECK(smoothed_max(1e6, 3.0) == 1e6);
    CHECK_THROWS_AS(smoothed_max(std::numeric_limits<double>::quiet_NaN(), 3.0), DomainError);
    CHECK_THROWS_AS(smoothed_max(std::numeric_limits<double>::infinity(), 3.0), DomainError);
    CHECK_THROWS_AS(smoothed_max(1.0, 0.0), DomainError);
}

TEST_CASE("smoothed max is smooth: centred differences converge at second order") {
    for (double x : {-5.0, 0.0, 5.0}) {
        // Exact derivative of x s(bx): s + b x s (1 - s)
        const double s = 1.0 / (1.0 + std::exp(-3.0 * x));
        const double exact = s + 3.0 * x * s * (1.0 - s);
        double prev_err = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double h = 0.1 / std::pow(2.0, k);
            const double fd = (smoothed_max(x + h, 3.0) - smoothed_max(x - h, 3.0)) / (2.0 * h);
            const double err = std::abs(fd - exact);
            if (k > 0 && prev_err > 1e-11) {
                CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.1));
            }
            prev_err = err;
        }
    }
}

TEST_CASE("evaporation rate: midpoint, saturation, hand value") {
    EvapParams p;
    p.k = 7e-4;
    p.M_b = 0.1;
    p.gamma = 70.0;
    CHECK(evap_rate(p.M_b, p) == doctest::Approx(p.k / 2).epsilon(1e-15));
    CHECK(std::abs(evap_rate(p.M_b + 50.0 / p.gamma, p) - p.k) / p.k <= 1e-15);

    const EvapParams t1 = EvapParams::from_fitted({9.99e-4, 9.75e-2, 149.0});
    // 9.99e-4 / (1 + exp(-149 * 0.0225)), evaluated to 30 digits
    CHECK(evap_rate(0.12, t1) == doctest::Approx(9.652204196131062e-4).epsilon(1e-12));
    CHECK_THROWS_AS(evap_rate(-0.01, t1), DomainError);
}

TEST_CASE("evaporation rate is strictly increasing with range (0, k)") {
    const EvapParams p = EvapParams::from_fitted({9.99e-4, 9.75e-2, 149.0});
    double prev = evap_rate(0.0, p);
    CHECK(prev > 0.0);
    for (int i = 1; i <= 200; ++i) {
        const double v = evap_rate(0.001 * i, p);
        CHECK(v > prev);
        CHECK(v < p.k);
        prev = v;
    }
}

TEST_CASE("rate derivative matches finite differences") {
    const EvapParams p = EvapParams::from_fitted({9.99e-4, 9.75e-2, 149.0});
    for (double M : {0.02, 0.09, 0.0975, 0.11, 0.3}) {
        const double h = 1e-6;
        const double fd = (evap_rate(M + h, p) - evap_rate(M - h, p)) / (2 * h);
        CHECK(evap_rate_derivative(M, p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("moisture rhs: examples") {
    const EvapParams p = EvapParams::from_fitted({9.99e-4, 9.75e-2, 149.0});
    const double T_evap = 318.15;
    CHECK(moisture_rhs(T_evap, 0.4, p, T_evap) == 0.0);
    CHECK(moisture_rhs(T_evap + 10.0, 2.0, p, T_evap) == doctest::Approx(-10.0 * p.k).epsilon(1e-12));
    CHECK(std::abs(moisture_rhs(T_evap - 30.0, 0.5, p, T_evap)) <= p.k * 2.5e-38);
    for (double dT = -25.0; dT > -200.0; dT -= 5.0) {
        CHECK(std::abs(moisture_rhs(T_evap + dT, 0.5, p, T_evap)) < p.k * std::abs(dT) * 1e-30);
    }
}

TEST_CASE("moisture rhs sign and monotonicity on a grid") {
    const EvapParams p = EvapParams::from_fitted({5e-4, 0.1, 100.0});
    const double T_evap = 318.15;
    for (double dT = 0.0; dT <= 120.0; dT += 2.5) {
        double prev = 0.0;
        for (double M = 0.0; M <= 1.0; M += 0.01) {
            const double r = moisture_rhs(T_evap + dT, M, p, T_evap);
            CHECK(r <= 0.0);
            CHECK(std::abs(r) >= prev);
            prev = std::abs(r);
        }
    }
    for (double M = 0.0; M <= 1.0; M += 0.1) {
        double prev = 0.0;
        for (double dT = 0.1; dT <= 120.0; dT += 0.7) {
            const double r = std::abs(moisture_rhs(T_evap + dT, M, p, T_evap));
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("parameter validation") {
    EvapParams p;
    CHECK_NOTHROW(p.validate());
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = EvapParams{};
    p.gamma = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = EvapParams{};
    p.k = 0.0;  // evaporation switched off
    CHECK_NOTHROW(p.validate());
}
