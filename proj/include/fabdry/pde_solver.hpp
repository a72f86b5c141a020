#pragma once

// Method-of-lines solver for the coupled temperature / moisture problem across
// the fabric thickness, plus the three-cylinder machine pass built from it.
//
// Discretization per time step (semi-implicit splitting):
//   1. c, rho, lambda are frozen at the step-start moisture;
//   2. each node's moisture is advanced by backward Euler on dM/dt = rhs(T^n, M),
//      solved with a safeguarded scalar Newton iteration, and confined to
//      [0, M^n] (the dry state is absorbing and moisture never grows);
//   3. temperature is advanced by backward Euler on the conservative
//      finite-volume form, with the latent sink h_lv rho_l (M^{n+1} - M^n) / dt.
// The contact node carries T = T_cyl and M = 0. The free node carries a
// half-cell energy balance whose outgoing flux is z_ht (T - T_env).

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fabdry/heat_transfer.hpp"
#include "fabdry/kinetics.hpp"
#include "fabdry/properties.hpp"

namespace fabdry {

/// Uniform grid on [0, L]; node 0 is x = 0, node n-1 is x = L.
class Grid {
public:
    /// Throws DomainError unless L > 0 and n_nodes >= 3.
    Grid(double thickness, std::size_t n_nodes);

    double thickness() const noexcept { return thickness_; }
    std::size_t size() const noexcept { return n_nodes_; }
    double spacing() const noexcept { return thickness_ / static_cast<double>(n_nodes_ - 1); }
    double x(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }
    std::vector<double> nodes() const;

    bool operator==(const Grid&) const = default;

private:
    double thickness_;
    std::size_t n_nodes_;
};

struct FabricState {
    Grid grid;
    std::vector<double> T;  ///< K, one value per node
    std::vector<double> M;  ///< moisture content, one value per node
    double t = 0.0;         ///< elapsed time, s

    bool operator==(const FabricState&) const = default;
};

struct Materials {
    FluidProps fluid;
    FabricProps fabric;

    bool operator==(const Materials&) const = default;
};

/// Which grid end touches the heated cylinder.
enum class ContactSide { Start, End };

struct StageSpec {
    double T_cyl = 403.15;   ///< K
    double duration = 10.0;  ///< s
    double z_ht = 10.0;      ///< W/(m^2 K)
    double T_env = 318.15;   ///< K
    double dt = 0.01;        ///< s
    ContactSide contact = ContactSide::Start;

    void validate() const;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> T;
    std::vector<double> M;
};

struct StageOptions {
    bool record = false;
    /// Minimum spacing between recorded snapshots; 0 records every step.
    double snapshot_interval = 0.0;
};

struct StageResult {
    FabricState state;
    std::vector<Snapshot> trajectory;  ///< includes the initial and final states when recording
};

/// Uniform profiles T = T0, M = M0 at t = 0.
FabricState init_state(const Grid& grid, double T0, double M0);

/// One step of length spec.dt. Throws SolverError on a failed linear solve or
/// a non-finite state.
FabricState step(const FabricState& state, const StageSpec& spec, const Materials& materials,
                 const EvapParams& params);

/// Steps until state.t advances by spec.duration; the last step is shortened to
/// land exactly on it. A zero duration returns the state unchanged.
StageResult solve_stage(const FabricState& state, const StageSpec& spec, const Materials& materials,
                        const EvapParams& params, const StageOptions& options = {});

/// As above, calling on_step with the state after every step.
StageResult solve_stage(const FabricState& state, const StageSpec& spec, const Materials& materials,
                        const EvapParams& params, const StageOptions& options,
                        const std::function<void(const FabricState&)>& on_step);

/// Reverses both profiles in x (node j <-> n-1-j). An involution.
FabricState flip(const FabricState& state);

/// Arithmetic mean of M over all grid nodes.
double average_moisture(const FabricState& state);

/// Arithmetic mean of M over nodes 1..n-2. The end nodes hold the contact-face
/// value M = 0 once they have touched a cylinder; leaving them out removes an
/// O(dx) bias of about 2 M / n from the nodal mean.
double interior_average_moisture(const FabricState& state);

/// How a final state is reduced to the predicted average moisture.
enum class MoistureAverage { InteriorNodes, AllNodes };

double predicted_moisture(const FabricState& state, MoistureAverage rule);

/// Process inputs of one drying run.
struct ProcessInputs {
    double tau = 30.0;          ///< total time in the machine, s
    double thickness = 6.3e-4;  ///< m
    double T_cyl = 403.15;      ///< K
    double M0 = 0.63;

    bool operator==(const ProcessInputs&) const = default;
};

struct MachineConfig {
    Materials materials;
    ExchangeConfig exchange;
    double T0 = 288.15;  ///< initial fabric temperature, K
    std::size_t n_nodes = 101;
    double dt = 0.01;
    /// Relative weights of the stage durations; one entry per heated cylinder.
    std::vector<double> stage_fractions{1.0, 1.0, 1.0};
    MoistureAverage averaging = MoistureAverage::InteriorNodes;

    void validate() const;

    bool operator==(const MachineConfig&) const = default;
};

/// Per-step observer: (stage index, state after the step in the material frame).
using StepObserver = std::function<void(std::size_t, const FabricState&)>;

struct MachineTrace {
    FabricState final_state;
    /// Snapshots in the material frame: x = 0 is the face that touches the first cylinder.
    std::vector<Snapshot> trajectory;
};

/// Runs the cylinders in sequence, flipping the fabric between consecutive
/// stages, and returns the state after the last stage (material frame when the
/// stage count is odd, as with the default three cylinders).
FabricState simulate_machine(const ProcessInputs& inputs, const EvapParams& params,
                             const MachineConfig& config);

/// As simulate_machine, optionally recording snapshots and calling the
/// observer after every step.
MachineTrace simulate_machine_traced(const ProcessInputs& inputs, const EvapParams& params,
                                     const MachineConfig& config, const StageOptions& options,
                                     const StepObserver& observer = {});

/// Writes the comma-separated trajectory (`t,x,T,M`, one row per snapshot and node).
void write_trajectory_csv(std::ostream& out, const Grid& grid, std::span<const Snapshot> trajectory);

/// Solves a tridiagonal system in place (Thomas algorithm). lower[0] and
/// upper[n-1] are ignored. Returns false on a zero pivot.
bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

}  // namespace fabdry
