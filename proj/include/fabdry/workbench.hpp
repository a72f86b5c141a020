#pragma once

// Plumbing around the solver and the fitter: run configuration files, the
// experimental dataset format, the results report and the published result
// tables kept as reference data.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fabdry/estimation.hpp"
#include "fabdry/pde_solver.hpp"

namespace fabdry {

// ---------------------------------------------------------------------------
// Configuration

/// Everything a CLI run needs. Temperatures are held in kelvin.
struct RunConfig {
    MachineConfig machine;       ///< materials, exchange (incl. T_env), T0, grid and time step
    ProcessInputs operating;     ///< defaults for `simulate` without a dataset
    double pressure_bar = 0.1;   ///< chamber pressure; informational only, T_evap is set directly
    EvapParams kinetics;         ///< parameters for `simulate` and `predict`
    Bounds bounds;
    EvapParams fit_init;         ///< starting point of `fit`
    FitOptions fit_options;
    std::string dataset_path;
    std::string output_dir = "out";

    /// Checks every numeric constraint of the owning modules; throws ConfigError.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parses the flat `section.key = value` format. Lines starting with `#` (and
/// trailing `# ...`) are comments. Unknown or repeated keys are errors. With
/// `units.temperature = celsius` the temperature keys are read in degrees
/// Celsius and stored in kelvin. Throws ConfigError with the line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Writes every key in kelvin with round-trip precision, so that
/// serialize(parse(serialize(c))) == serialize(c).
std::string serialize_config(const RunConfig& config);

/// All accepted keys, in serialization order.
std::span<const std::string_view> config_keys();

// ---------------------------------------------------------------------------
// Dataset

/// Reads `key,tau_s,thickness_m,T_cyl_K,M0,M_tau` (a `T_cyl_C` column in place
/// of `T_cyl_K` is converted to kelvin). Blank and `#` lines are skipped.
/// Throws DatasetError: "empty dataset" without data rows, otherwise with the
/// line number and the offending field.
std::vector<Sample> parse_dataset(std::string_view text);
std::vector<Sample> load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, std::span<const Sample> dataset);

// ---------------------------------------------------------------------------
// Report

struct ReportRow {
    std::string key;
    double truth = 0.0;
    double pred = 0.0;
};

struct FitSummary {
    std::size_t n_iterations = 0;
    std::size_t n_residual_evals = 0;
    FitStatus status = FitStatus::MaxIterations;
    double cost = 0.0;
};

struct Report {
    std::vector<ReportRow> rows;
    EvapParams params;
    std::optional<FitSummary> fit;
};

Report make_report(std::span<const Sample> dataset, std::span<const double> predicted, const EvapParams& params);

/// Six-column table (KEY, TRUE, PRED, RELATIVE ERROR, ABSOLUTE ERROR,
/// UNDER-OVER DRIED) followed by MSE, MAE and the parameter triple. Values
/// print as %.2e, errors as %.4f. Throws std::invalid_argument when empty.
void emit_report(std::ostream& out, const Report& report);

/// Writes the report to `path`; throws std::runtime_error on I/O failure.
void write_report(const std::filesystem::path& path, const Report& report);

// ---------------------------------------------------------------------------
// Reference tables

struct FixtureRow {
    int key = 0;
    double truth = 0.0;
    double pred = 0.0;
    double relative = 0.0;  ///< as printed
    double absolute = 0.0;  ///< as printed
    DryingLabel label = DryingLabel::CorrectlyDried;
};

struct FixtureTable {
    std::string_view name;
    ParamVector params{};
    double mse = 0.0;  ///< caption value
    double mae = 0.0;  ///< caption value
    std::array<FixtureRow, 17> rows{};
};

/// The three published result tables: 17 samples each, one per parameter set.
std::span<const FixtureTable> fixture_tables();

struct FixtureTableCheck {
    std::string_view name;
    double mse = 0.0;
    double mae = 0.0;
    bool mse_ok = false;
    bool mae_ok = false;
    std::vector<int> label_mismatches;  ///< keys
    std::vector<int> error_mismatches;  ///< keys whose printed error columns are inconsistent
};

struct FixtureCheck {
    std::vector<FixtureTableCheck> tables;
    bool passed() const;
};

inline constexpr double kFixtureMaeTolerance = 5e-4;
inline constexpr double kFixtureMseTolerance = 5e-6;

/// Recomputes MSE/MAE, labels and error columns of every table.
FixtureCheck check_fixtures();

void print_fixture_check(std::ostream& out, const FixtureCheck& check);

}  // namespace fabdry
