// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fabdry/estimation.hpp"
#include "fabdry/kinetics.hpp"
#include "fabdry/pde_solver.hpp"
#include "fabdry/workbench.hpp"
#include "oracles/conduction_series.hpp"

using namespace fabdry;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& text) {
    std::printf("       %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

const ParamVector kTable1{9.99e-4, 9.75e-2, 149.0};

ProcessInputs sample3() { return {30.0, 6.3e-4, 403.15, 0.63}; }
ProcessInputs sample14() { return {60.0, 4.2e-4, 403.15, 0.58}; }

// Seventeen process settings spanning 20-60 s, 0.35-0.5 mm, 393-408 K; entries 3 and
// 14 are the two samples whose inputs are published. Same inputs as data/synthetic_samples.csv.
std::vector<Sample> synthetic_inputs() {
    const double taus[] = {20, 25, 30, 35, 40, 45, 50, 55, 60};
    std::vector<Sample> ds;
    for (int i = 0; i < 17; ++i) {
        Sample s;
        s.key = std::to_string(i + 1);
        s.tau = taus[i % 9];
        s.thickness = (3.5 + 0.25 * (i % 7)) * 1e-4;
        s.T_cyl = 393.15 + 5.0 * (i % 4);
        s.M0 = 0.55 + 0.01 * (i % 9);
        if (i == 2) {
            const ProcessInputs p = sample3();
            s.tau = p.tau, s.thickness = p.thickness, s.T_cyl = p.T_cyl, s.M0 = p.M0;
        }
        if (i == 13) {
            const ProcessInputs p = sample14();
            s.tau = p.tau, s.thickness = p.thickness, s.T_cyl = p.T_cyl, s.M0 = p.M0;
        }
        ds.push_back(s);
    }
    return ds;
}

void criterion_1_2() {
    const auto t0 = Clock::now();
    const FixtureCheck check = check_fixtures();
    const double elapsed = seconds_since(t0);

    bool metrics_ok = true;
    std::string detail;
    std::size_t label_errors = 0;
    for (const FixtureTableCheck& t : check.tables) {
        metrics_ok = metrics_ok && t.mse_ok && t.mae_ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s MAE %.4f MSE %.3e; ", std::string(t.name).c_str(), t.mae, t.mse);
        detail += buf;
        label_errors += t.label_mismatches.size();
    }
    detail += fmt("%.3f s", elapsed);
    report(1, "fixture metrics", metrics_ok && elapsed < 1.0, detail);
    report(2, "fixture labels", label_errors == 0 && elapsed < 1.0,
           std::to_string(51 - label_errors) + "/51 labels reproduced");
}

void criterion_3() {
    const auto t0 = Clock::now();
    const double v = smoothed_max(-30.0, 3.0);
    const double elapsed = seconds_since(t0);
    report(3, "logistic anchor", v >= -3e-38 && v <= -2e-38 && elapsed < 1.0,
           fmt("smoothed_max(-30, 3) = %.4e", v));
}

struct ConductionCase {
    double worst = 0.0;    // max |T - T_ref| over all nodes and steps, K
    double late = 0.0;     // same, restricted to t > 0.1 s
    double scale = 0.0;    // max |T_ref(x, t) - T_ref(x, 0)|, K
};

// Dry slab with constant properties, Dirichlet at the contact face and Robin at the
// free face, compared with the eigenfunction series after every step.
ConductionCase conduction(double z, const std::vector<double>& modes) {
    const std::size_t n = 201;
    const double L = 6.3e-4, T_cyl = 403.15, T_env = 318.15;
    const Materials mat;
    const double lam = mat.fabric.lambda_f;
    const double alpha = lam / (mat.fabric.rho_f * mat.fabric.c_f);
    oracle::ConductionSeries ref(L, alpha, lam, z, T_cyl, T_env, T_cyl);
    if (!modes.empty()) ref = ref.with_modes(modes);

    EvapParams off;
    off.k = 0.0;
    StageSpec spec;
    spec.T_cyl = T_cyl;
    spec.T_env = T_env;
    spec.z_ht = z;
    spec.duration = 30.0;
    spec.dt = 1e-3;
    const Grid g(L, n);
    FabricState s0 = init_state(g, T_cyl, 0.0);
    std::vector<double> T0(n);
    for (std::size_t j = 0; j < n; ++j) T0[j] = modes.empty() ? T_cyl : ref.initial(g.x(j));
    s0.T = T0;

    ConductionCase c;
    (void)solve_stage(s0, spec, mat, off, StageOptions{}, [&](const FabricState& s) {
        for (std::size_t j = 0; j < n; ++j) {
            const double r = ref(g.x(j), s.t);
            const double e = std::abs(s.T[j] - r);
            c.worst = std::max(c.worst, e);
            if (s.t > 0.1) c.late = std::max(c.late, e);
            c.scale = std::max(c.scale, std::abs(r - T0[j]));
        }
    });
    return c;
}

void criterion_4() {
    const auto t0 = Clock::now();
    const double z_default = z_ht(403.15, ExchangeConfig{}, FluidProps{}.lambda_vap);
    const std::vector<double> modes{30.0, -10.0, 4.0};
    bool ok = true;
    std::string detail;
    for (double z : {z_default, 200.0}) {
        const ConductionCase c = conduction(z, modes);
        const double rel = c.worst / c.scale;
        ok = ok && rel <= 1e-3;
        detail += "z = " + fmt("%.2f", z) + ": " + fmt("%.2e", rel) + "; ";
    }
    const double elapsed = seconds_since(t0);
    report(4, "conduction oracle", ok && elapsed < 30.0,
           "relative Linf over 30000 steps x 201 nodes, " + detail + fmt("%.1f s", elapsed));
    info("initial state: steady profile plus three Robin eigenmodes (30, -10, 4 K); error divided by the largest change of the reference");
    for (double z : {z_default, 200.0}) {
        const ConductionCase c = conduction(z, {});
        info("uniform start at T_cyl, z = " + fmt("%.2f", z) + ": " + fmt("%.2e", c.worst / c.scale) +
             " (first-step layer at the free face), " + fmt("%.2e", c.late / c.scale) + " for t > 0.1 s");
    }
}

double final_moisture(const ProcessInputs& in, std::size_t n, double dt) {
    MachineConfig cfg;
    cfg.n_nodes = n;
    cfg.dt = dt;
    return predicted_moisture(simulate_machine(in, EvapParams::from_fitted(kTable1), cfg), cfg.averaging);
}

void criterion_5() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    std::string order_note;
    for (const auto& [name, in] : {std::pair{"sample 3", sample3()}, std::pair{"sample 14", sample14()}}) {
        const double coarse = final_moisture(in, 101, 0.01);
        const double fine = final_moisture(in, 201, 0.005);
        const double change = std::abs(fine - coarse);
        ok = ok && change <= 1e-4;
        detail += std::string(name) + " " + fmt("%.5f", coarse) + " -> " + fmt("%.5f", fine) + " (" +
                  fmt("%.1e", change) + "); ";
        // time-step order at fixed grid
        const double a = final_moisture(in, 101, 0.02), b = final_moisture(in, 101, 0.01),
                     c = final_moisture(in, 101, 0.005);
        order_note += std::string(name) + " dt-order " + fmt("%.2f", std::log2(std::abs(a - b) / std::abs(b - c))) + "; ";
    }
    const double elapsed = seconds_since(t0);
    report(5, "self-convergence", ok && elapsed < 120.0, detail + fmt("%.1f s", elapsed));
    info(order_note);
}

void criterion_6() {
    const auto t0 = Clock::now();
    const MachineConfig cfg;
    double worst_increase = 0.0, min_M = std::numeric_limits<double>::infinity();
    double worst_T_low = 0.0, worst_T_high = 0.0;
    std::size_t runs = 0, steps = 0;
    for (const FixtureTable& table : fixture_tables()) {
        const EvapParams params = EvapParams::from_fitted(table.params);
        for (const Sample& s : synthetic_inputs()) {
            const double T_lo = std::min(cfg.T0, cfg.exchange.T_env) - 1e-6;
            const double T_hi = std::max(s.T_cyl, cfg.T0) + 1e-6;
            std::vector<double> prev(cfg.n_nodes, s.M0);
            (void)simulate_machine_traced(s.inputs(), params, cfg, StageOptions{}, [&](std::size_t, const FabricState& st) {
                ++steps;
                for (std::size_t j = 0; j < st.M.size(); ++j) {
                    worst_increase = std::max(worst_increase, st.M[j] - prev[j]);
                    min_M = std::min(min_M, st.M[j]);
                    worst_T_low = std::max(worst_T_low, T_lo - st.T[j]);
                    worst_T_high = std::max(worst_T_high, st.T[j] - T_hi);
                }
                prev = st.M;
            });
            ++runs;
        }
    }
    const bool ok = worst_increase <= 0.0 && min_M >= -1e-12 && worst_T_low <= 0.0 && worst_T_high <= 0.0;
    report(6, "physical invariants", ok,
           std::to_string(runs) + " runs, " + std::to_string(steps) + " steps; max dM " + fmt("%.1e", worst_increase) +
               ", min M " + fmt("%.1e", min_M) + ", T outside band by " +
               fmt("%.1e", std::max(worst_T_low, worst_T_high)) + " K; " + fmt("%.1f s", seconds_since(t0)));
}

void criterion_7() {
    const auto t0 = Clock::now();
    const EvapParams p = EvapParams::from_fitted(kTable1);
    const MachineConfig cfg;
    const FabricState s3 = simulate_machine(sample3(), p, cfg);
    const FabricState s14 = simulate_machine(sample14(), p, cfg);

    // Interior nodes only: both faces have touched a cylinder and sit at M = 0.
    auto spread = [](const FabricState& s) {
        const auto [lo, hi] = std::minmax_element(s.M.begin() + 1, s.M.end() - 1);
        return *hi - *lo;
    };
    const auto peak = std::max_element(s3.M.begin(), s3.M.end());
    const std::size_t j = static_cast<std::size_t>(peak - s3.M.begin());
    const std::size_t n = s3.M.size();
    const bool bell = j > 1 && j + 2 < n && s3.M[0] < *peak && s3.M[n - 1] < *peak && s3.M[1] < *peak &&
                      s3.M[n - 2] < *peak;
    const bool flatter = spread(s14) < spread(s3);
    report(7, "profile shapes", bell && flatter,
           "sample 3 peak " + fmt("%.4f", *peak) + " at x/L = " + fmt("%.2f", static_cast<double>(j) / (n - 1)) +
               ", near-face values " + fmt("%.4f", s3.M[1]) + " / " + fmt("%.4f", s3.M[n - 2]) +
               "; interior spread sample 3 " + fmt("%.2e", spread(s3)) + " vs sample 14 " + fmt("%.2e", spread(s14)) +
               "; " + fmt("%.1f s", seconds_since(t0)));
}

void criteria_8_9() {
    MachineConfig cfg;
    cfg.n_nodes = 51;
    cfg.dt = 0.05;
    std::vector<Sample> ds = synthetic_inputs();
    const std::vector<double> truth = predict(EvapParams::from_fitted(kTable1), ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) ds[i].M_tau = truth[i];
    double cost_star = 0.0;
    for (double r : residuals(EvapParams::from_fitted(kTable1), ds, cfg)) cost_star += r * r;

    const Bounds bounds;
    const BatchResidual inner = dataset_residual(ds, cfg);
    std::vector<std::size_t> batch_sizes;
    bool all_feasible = true;
    const BatchResidual model = [&](std::span<const ParamVector> pts) {
        batch_sizes.push_back(pts.size());
        for (const ParamVector& p : pts) all_feasible = all_feasible && bounds.contains(p);
        return inner(pts);
    };

    FitOptions opt;
    opt.ftol = opt.xtol = opt.gtol = 1e-12;
    const auto t0 = Clock::now();
    const FitResult r = fit(model, bounds, EvapParams{}.fitted(), opt);
    const double elapsed = seconds_since(t0);

    const double k_err = std::abs(r.params.k - kTable1[0]) / kTable1[0];
    const double mb_err = std::abs(r.params.M_b - kTable1[1]) / kTable1[1];
    const bool ok8 = r.cost <= cost_star + 1e-10 && k_err <= 0.05 && mb_err <= 0.05 &&
                     bounds.contains(r.params.fitted()) && elapsed < 600.0;
    report(8, "synthetic recovery", ok8,
           "k " + fmt("%.5e", r.params.k) + " (" + fmt("%.1e", k_err) + "), M_b " + fmt("%.5e", r.params.M_b) + " (" +
               fmt("%.1e", mb_err) + "), gamma " + fmt("%.2f", r.params.gamma) + ", cost " + fmt("%.2e", r.cost) +
               " vs cost(p*) " + fmt("%.1e", cost_star) + ", " + std::to_string(r.n_iterations) + " iterations, " +
               std::string(to_string(r.converged)) + "; " + fmt("%.1f s", elapsed));
    info("tolerances ftol = xtol = gtol = 1e-12");

    bool four_each = std::all_of(batch_sizes.begin(), batch_sizes.end(), [](std::size_t s) { return s == 4; });
    four_each = four_each && batch_sizes.size() == r.n_iterations && r.n_residual_evals == 4 * r.n_iterations;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const FitIteration& it : r.history) {
        if (!it.accepted) continue;
        monotone = monotone && it.cost <= prev;
        prev = it.cost;
    }
    report(9, "optimizer accounting", four_each && all_feasible && monotone,
           std::to_string(r.n_residual_evals) + " residual evaluations over " + std::to_string(r.n_iterations) +
               " iterations, every batch of 4: " + (four_each ? "yes" : "no") +
               "; all points feasible: " + (all_feasible ? "yes" : "no") +
               "; accepted cost non-increasing: " + (monotone ? "yes" : "no"));

    // Same fit with the default tolerances, for reference.
    const auto t1 = Clock::now();
    const FitResult d = fit(ds, bounds, EvapParams{}, cfg, FitOptions{});
    info("default tolerances (1e-8): k " + fmt("%.5e", d.params.k) + ", M_b " + fmt("%.5e", d.params.M_b) +
         ", gamma " + fmt("%.2f", d.params.gamma) + ", cost " + fmt("%.2e", d.cost) + ", " +
         std::string(to_string(d.converged)) + " after " + std::to_string(d.n_iterations) + " iterations; " +
         fmt("%.1f s", seconds_since(t1)));
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    criterion_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criteria_8_9();
    std::printf("%s: %d criteria failed; %.1f s total\n", failures == 0 ? "ALL PASS" : "FAILURES", failures,
                seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
