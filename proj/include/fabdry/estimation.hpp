#pragma once

// Calibration of the evaporation kinetics (k, M_b, gamma) against measured final
// moisture, by bound-constrained nonlinear least squares with forward-difference
// Jacobians and a trust-region reflective method.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fabdry/kinetics.hpp"
#include "fabdry/pde_solver.hpp"

namespace fabdry {

/// One experimental record.
struct Sample {
    std::string key;
    double tau = 0.0;        ///< total drying time, s
    double thickness = 0.0;  ///< m
    double T_cyl = 0.0;      ///< K
    double M0 = 0.0;         ///< initial moisture
    double M_tau = 0.0;      ///< measured final average moisture

    ProcessInputs inputs() const { return {tau, thickness, T_cyl, M0}; }

    /// tau, thickness, T_cyl > 0 and M0 > M_tau >= 0. Throws DatasetError naming the field.
    void validate() const;

    bool operator==(const Sample&) const = default;
};

/// Fitted parameters in the order (k, M_b, gamma).
using ParamVector = std::array<double, 3>;
inline constexpr std::size_t kFittedParams = 3;

struct Bounds {
    ParamVector lower{1e-4, 0.02, 10.0};
    ParamVector upper{1e-3, 0.2, 150.0};

    /// Throws std::invalid_argument unless lower < upper componentwise.
    void validate() const;
    bool contains(const ParamVector& p) const noexcept;

    bool operator==(const Bounds&) const = default;
};

struct FitOptions {
    double ftol = 1e-8;
    double xtol = 1e-8;
    double gtol = 1e-8;
    std::size_t max_iterations = 100;
    unsigned threads = 0;  ///< 0: one worker per hardware thread

    bool operator==(const FitOptions&) const = default;
};

enum class FitStatus { GradientTolerance, StepTolerance, CostTolerance, MaxIterations };

std::string_view to_string(FitStatus status);

/// One trust-region iteration: a trial point and the 1 + 3 residual evaluations at it.
struct FitIteration {
    ParamVector point{};
    double cost = 0.0;  ///< ||f||^2 at the trial point
    bool accepted = false;
    double radius = 0.0;  ///< trust radius used to produce the point (scaled units)
    std::size_t residual_evaluations = 0;
};

struct FitResult {
    EvapParams params;
    std::vector<double> residuals;
    double cost = 0.0;  ///< ||f||^2
    double mse = 0.0;
    double mae = 0.0;
    std::size_t n_iterations = 0;
    std::size_t n_residual_evals = 0;
    FitStatus converged = FitStatus::MaxIterations;
    std::vector<FitIteration> history;
};

enum class DryingLabel { CorrectlyDried, OverDried, UnderDried };

std::string_view to_string(DryingLabel label);

/// With diff = M_true - M_pred: |diff| <= threshold is correctly dried,
/// diff > threshold over-dried (the model dries too much), diff < -threshold under-dried.
DryingLabel classify(double M_true, double M_pred, double threshold = 0.015);

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    std::vector<double> absolute;                 ///< |true - pred|
    std::vector<std::optional<double>> relative;  ///< |true - pred| / pred, absent when pred == 0
};

/// Throws std::invalid_argument on empty or mismatched inputs.
Metrics metrics(std::span<const double> truth, std::span<const double> predicted);

/// Evaluates the residual vector at each of a batch of parameter points.
using BatchResidual = std::function<std::vector<std::vector<double>>(std::span<const ParamVector>)>;

/// Predicted final average moisture per sample, in dataset order. Samples are
/// simulated concurrently; a failure is rethrown naming the sample key.
std::vector<double> predict(const EvapParams& params, std::span<const Sample> dataset,
                            const MachineConfig& config, unsigned threads = 0);

/// f_i = M_tau_i - predicted_i.
std::vector<double> residuals(const EvapParams& params, std::span<const Sample> dataset,
                              const MachineConfig& config, unsigned threads = 0);

/// Residual model over a dataset; all (point, sample) simulations of one batch
/// run concurrently. beta is held at the given value.
BatchResidual dataset_residual(std::vector<Sample> dataset, MachineConfig config, double beta = 3.0,
                               unsigned threads = 0);

struct FdJacobian {
    std::vector<double> base;  ///< f(x)
    Eigen::MatrixXd J;         ///< N x 3, physical units
    ParamVector steps{};       ///< signed increments actually used
};

/// sqrt(eps) * max(|x_m|, upper_m - lower_m), negated where the forward step would leave the box.
ParamVector fd_steps(const ParamVector& x, const Bounds& bounds);

/// Forward differences: one batch of 4 points (x and x + h_m e_m).
FdJacobian fd_jacobian(const BatchResidual& model, const ParamVector& x, const Bounds& bounds);

FdJacobian fd_jacobian(const EvapParams& params, std::span<const Sample> dataset,
                       const MachineConfig& config, const Bounds& bounds = {}, unsigned threads = 0);

/// Minimizes ||f||^2 over the box. Throws std::invalid_argument when init lies
/// outside the bounds or the box is degenerate (lower >= upper in any component).
FitResult fit(const BatchResidual& model, const Bounds& bounds, const ParamVector& init,
              const FitOptions& options = {}, double beta = 3.0);

FitResult fit(std::span<const Sample> dataset, const Bounds& bounds, const EvapParams& init,
              const MachineConfig& config, const FitOptions& options = {});

}  // namespace fabdry
