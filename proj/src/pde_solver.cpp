#include "fabdry/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "fabdry/errors.hpp"

namespace fabdry {

Grid::Grid(double thickness, std::size_t n_nodes) : thickness_(thickness), n_nodes_(n_nodes) {
    if (!std::isfinite(thickness) || thickness <= 0.0) {
        throw DomainError("grid: thickness must be finite and positive");
    }
    if (n_nodes < 3) {
        throw DomainError("grid: at least 3 nodes are required");
    }
}

std::vector<double> Grid::nodes() const {
    std::vector<double> xs(n_nodes_);
    for (std::size_t j = 0; j < n_nodes_; ++j) xs[j] = x(j);
    xs.back() = thickness_;
    return xs;
}

void StageSpec::validate() const {
    if (!std::isfinite(T_cyl) || T_cyl <= 0.0) throw DomainError("stage: T_cyl must be a positive absolute temperature");
    if (!std::isfinite(T_env) || T_env <= 0.0) throw DomainError("stage: T_env must be a positive absolute temperature");
    if (!std::isfinite(duration) || duration < 0.0) throw DomainError("stage: duration must be >= 0");
    if (!std::isfinite(dt) || dt <= 0.0) throw DomainError("stage: dt must be > 0");
    if (!std::isfinite(z_ht) || z_ht < 0.0) throw DomainError("stage: z_ht must be >= 0");
}

FabricState init_state(const Grid& grid, double T0, double M0) {
    if (!std::isfinite(T0) || T0 <= 0.0) throw DomainError("init_state: T0 must be a positive absolute temperature");
    if (!std::isfinite(M0) || M0 < 0.0) throw DomainError("init_state: M0 must be >= 0");
    return FabricState{grid, std::vector<double>(grid.size(), T0), std::vector<double>(grid.size(), M0), 0.0};
}

bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return true;
    std::vector<double> c(n);
    double pivot = diag[0];
    if (pivot == 0.0) return false;
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) return false;
        c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    return true;
}

namespace {

// Backward Euler on dM/dt = -kappa(M) a with a lagged activation a, i.e. the
// root of g(M) = M - M_old + dt a kappa(M), confined to [0, M_old].
double advance_moisture(double M_old, double activation, double dt, const EvapParams& params) {
    if (activation <= 0.0 || M_old <= 0.0) {
        return M_old;
    }
    const double drive = dt * activation;
    if (drive * params.k == 0.0) {
        return M_old;
    }
    auto g = [&](double M) { return M - M_old + drive * evap_rate(M, params); };

    double lo = std::max(0.0, M_old - drive * params.k);
    double hi = M_old;
    if (lo == 0.0 && g(0.0) >= 0.0) {
        return 0.0;
    }
    double M = hi;
    for (int it = 0; it < 100; ++it) {
        const double gM = g(M);
        if (gM == 0.0) return M;
        if (gM > 0.0) hi = M; else lo = M;
        const double slope = 1.0 + drive * evap_rate_derivative(M, params);
        double next = M - gM / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - M) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(M) ||
            hi - lo <= std::numeric_limits<double>::min()) {
            return next;
        }
        M = next;
    }
    return M;
}

}  // namespace

FabricState step(const FabricState& state, const StageSpec& spec, const Materials& materials,
                 const EvapParams& params) {
    const std::size_t n = state.grid.size();
    if (state.T.size() != n || state.M.size() != n) {
        throw SolverError("state profile sizes do not match the grid");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(state.T[j]) || !std::isfinite(state.M[j]) || state.M[j] < 0.0) {
            throw SolverError("invalid state at node " + std::to_string(j));
        }
    }
    const double dt = spec.dt;
    const double dx = state.grid.spacing();
    const FluidProps& fluid = materials.fluid;
    const FabricProps& fabric = materials.fabric;

    const std::size_t contact = spec.contact == ContactSide::Start ? 0 : n - 1;
    const std::size_t free_end = spec.contact == ContactSide::Start ? n - 1 : 0;

    FabricState next = state;
    next.t = state.t + dt;

    // Moisture, with temperature lagged at the step start.
    for (std::size_t j = 0; j < n; ++j) {
        if (j == contact) {
            next.M[j] = 0.0;
            continue;
        }
        const double activation = smoothed_max(state.T[j] - fluid.T_evap, params.beta);
        next.M[j] = advance_moisture(state.M[j], activation, dt, params);
    }

    // Coefficients frozen at the step-start moisture.
    std::vector<double> cap(n), lam(n);
    for (std::size_t j = 0; j < n; ++j) {
        cap[j] = volumetric_heat_capacity(state.M[j], fluid, fabric);
        lam[j] = thermal_conductivity(state.M[j], fluid, fabric);
    }
    auto face = [&](std::size_t a, std::size_t b) { return 0.5 * (lam[a] + lam[b]) / dx; };

    const double latent = fluid.h_lv * fluid.rho_l;
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == contact) {
            diag[j] = 1.0;
            rhs[j] = spec.T_cyl;
            continue;
        }
        const double sink = latent * (next.M[j] - state.M[j]) / dt;  // <= 0
        if (j == free_end) {
            const std::size_t nb = (j == 0) ? 1 : j - 1;
            const double mass = cap[j] * 0.5 * dx / dt;
            const double g = face(j, nb);
            diag[j] = mass + g + spec.z_ht;
            (j == 0 ? upper[j] : lower[j]) = -g;
            rhs[j] = mass * state.T[j] + spec.z_ht * spec.T_env + 0.5 * dx * sink;
        } else {
            const double mass = cap[j] * dx / dt;
            const double gm = face(j - 1, j);
            const double gp = face(j, j + 1);
            lower[j] = -gm;
            upper[j] = -gp;
            diag[j] = mass + gm + gp;
            rhs[j] = mass * state.T[j] + dx * sink;
        }
    }
    if (!solve_tridiagonal(lower, diag, upper, rhs)) {
        throw SolverError("tridiagonal solve failed");
    }
    next.T = std::move(rhs);
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(next.T[j]) || !std::isfinite(next.M[j])) {
            throw SolverError("non-finite state at node " + std::to_string(j));
        }
    }
    return next;
}

StageResult solve_stage(const FabricState& state, const StageSpec& spec, const Materials& materials,
                        const EvapParams& params, const StageOptions& options,
                        const std::function<void(const FabricState&)>& on_step) {
    spec.validate();
    params.validate();
    validate(materials.fluid, materials.fabric);

    StageResult result{state, {}};
    auto snapshot = [&](const FabricState& s) {
        result.trajectory.push_back(Snapshot{s.t, s.T, s.M});
    };
    if (options.record) snapshot(state);
    if (spec.duration == 0.0) {
        return result;
    }

    const double t0 = state.t;
    const auto n_steps = static_cast<std::size_t>(
        std::max(1.0, std::ceil(spec.duration / spec.dt * (1.0 - 1e-12))));
    double elapsed = 0.0;
    double last_snapshot = t0;
    StageSpec sub = spec;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double target = (i + 1 == n_steps) ? spec.duration
                                                 : std::min(spec.duration, static_cast<double>(i + 1) * spec.dt);
        sub.dt = target - elapsed;
        try {
            result.state = step(result.state, sub, materials, params);
        } catch (const SolverError& e) {
            throw e.at_step(i);
        }
        elapsed = target;
        result.state.t = t0 + elapsed;
        if (on_step) on_step(result.state);
        if (options.record) {
            const bool last = i + 1 == n_steps;
            if (last || result.state.t - last_snapshot >= options.snapshot_interval) {
                snapshot(result.state);
                last_snapshot = result.state.t;
            }
        }
    }
    return result;
}

StageResult solve_stage(const FabricState& state, const StageSpec& spec, const Materials& materials,
                        const EvapParams& params, const StageOptions& options) {
    return solve_stage(state, spec, materials, params, options, {});
}

FabricState flip(const FabricState& state) {
    FabricState out = state;
    std::reverse(out.T.begin(), out.T.end());
    std::reverse(out.M.begin(), out.M.end());
    return out;
}

double average_moisture(const FabricState& state) {
    if (state.M.empty()) return 0.0;
    return std::accumulate(state.M.begin(), state.M.end(), 0.0) / static_cast<double>(state.M.size());
}

double interior_average_moisture(const FabricState& state) {
    const std::size_t n = state.M.size();
    if (n < 3) return average_moisture(state);
    return std::accumulate(state.M.begin() + 1, state.M.end() - 1, 0.0) / static_cast<double>(n - 2);
}

double predicted_moisture(const FabricState& state, MoistureAverage rule) {
    return rule == MoistureAverage::AllNodes ? average_moisture(state) : interior_average_moisture(state);
}

void MachineConfig::validate() const {
    fabdry::validate(materials.fluid, materials.fabric);
    exchange.validate();
    if (!std::isfinite(T0) || T0 <= 0.0) throw DomainError("T0 must be a positive absolute temperature");
    if (n_nodes < 3) throw DomainError("solver.n_nodes must be >= 3");
    if (!std::isfinite(dt) || dt <= 0.0) throw DomainError("solver.dt must be > 0");
    if (stage_fractions.empty()) throw DomainError("solver.stage_fractions must not be empty");
    for (double w : stage_fractions) {
        if (!std::isfinite(w) || w <= 0.0) throw DomainError("solver.stage_fractions entries must be > 0");
    }
}

MachineTrace simulate_machine_traced(const ProcessInputs& inputs, const EvapParams& params,
                                     const MachineConfig& config, const StageOptions& options,
                                     const StepObserver& observer) {
    config.validate();
    if (!std::isfinite(inputs.tau) || inputs.tau < 0.0) throw DomainError("tau must be >= 0");
    if (!std::isfinite(inputs.T_cyl) || inputs.T_cyl <= 0.0) throw DomainError("T_cyl must be a positive absolute temperature");

    const Grid grid(inputs.thickness, config.n_nodes);
    FabricState state = init_state(grid, config.T0, inputs.M0);
    const double z = z_ht(inputs.T_cyl, config.exchange, config.materials.fluid.lambda_vap);
    const double total_weight =
        std::accumulate(config.stage_fractions.begin(), config.stage_fractions.end(), 0.0);

    MachineTrace trace{state, {}};
    for (std::size_t stage = 0; stage < config.stage_fractions.size(); ++stage) {
        if (stage > 0) state = flip(state);
        const bool reversed = stage % 2 == 1;

        StageSpec spec;
        spec.T_cyl = inputs.T_cyl;
        spec.duration = inputs.tau * config.stage_fractions[stage] / total_weight;
        spec.z_ht = z;
        spec.T_env = config.exchange.T_env;
        spec.dt = config.dt;

        std::function<void(const FabricState&)> on_step;
        if (observer) {
            on_step = [&](const FabricState& s) { observer(stage, reversed ? flip(s) : s); };
        }
        StageOptions stage_options = options;
        StageResult res = solve_stage(state, spec, config.materials, params, stage_options, on_step);
        for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
            if (stage > 0 && i == 0) continue;  // same instant as the previous stage's last snapshot
            Snapshot snap = std::move(res.trajectory[i]);
            if (reversed) {
                std::reverse(snap.T.begin(), snap.T.end());
                std::reverse(snap.M.begin(), snap.M.end());
            }
            trace.trajectory.push_back(std::move(snap));
        }
        state = std::move(res.state);
    }
    trace.final_state = std::move(state);
    return trace;
}

FabricState simulate_machine(const ProcessInputs& inputs, const EvapParams& params,
                             const MachineConfig& config) {
    return simulate_machine_traced(inputs, params, config, StageOptions{}).final_state;
}

void write_trajectory_csv(std::ostream& out, const Grid& grid, std::span<const Snapshot> trajectory) {
    out << "t,x,T,M\n";
    const std::vector<double> xs = grid.nodes();
    char line[128];
    for (const Snapshot& snap : trajectory) {
        for (std::size_t j = 0; j < xs.size() && j < snap.T.size(); ++j) {
            std::snprintf(line, sizeof line, "%.6g,%.9g,%.9g,%.9g\n", snap.t, xs[j], snap.T[j], snap.M[j]);
            out << line;
        }
    }
}

}  // namespace fabdry
