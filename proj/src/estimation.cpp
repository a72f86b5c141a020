#include "fabdry/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fabdry/errors.hpp"
#include "fabdry/parallel.hpp"

namespace fabdry {

void Sample::validate() const {
    auto fail = [&](const char* field, const char* rule) {
        throw DatasetError("sample '" + key + "': " + field + " " + rule);
    };
    if (!std::isfinite(tau) || tau <= 0.0) fail("tau", "must be positive");
    if (!std::isfinite(thickness) || thickness <= 0.0) fail("L", "(thickness) must be positive");
    if (!std::isfinite(T_cyl) || T_cyl <= 0.0) fail("T_cyl", "must be a positive absolute temperature");
    if (!std::isfinite(M_tau) || M_tau < 0.0) fail("M_tau", "must be non-negative");
    if (!std::isfinite(M0) || !(M0 > M_tau)) fail("M0", "must exceed M_tau");
}

void Bounds::validate() const {
    for (std::size_t m = 0; m < kFittedParams; ++m) {
        if (!std::isfinite(lower[m]) || !std::isfinite(upper[m]) || !(lower[m] < upper[m])) {
            throw std::invalid_argument("bounds: lower must be strictly below upper for every parameter");
        }
    }
}

bool Bounds::contains(const ParamVector& p) const noexcept {
    for (std::size_t m = 0; m < kFittedParams; ++m) {
        if (!(p[m] >= lower[m] && p[m] <= upper[m])) return false;
    }
    return true;
}

std::string_view to_string(FitStatus status) {
    switch (status) {
        case FitStatus::GradientTolerance: return "gradient-tol";
        case FitStatus::StepTolerance: return "step-tol";
        case FitStatus::CostTolerance: return "cost-tol";
        case FitStatus::MaxIterations: return "max-iter";
    }
    return "unknown";
}

std::string_view to_string(DryingLabel label) {
    switch (label) {
        case DryingLabel::CorrectlyDried: return "correctly dried";
        case DryingLabel::OverDried: return "over-dried";
        case DryingLabel::UnderDried: return "under-dried";
    }
    return "unknown";
}

DryingLabel classify(double M_true, double M_pred, double threshold) {
    const double diff = M_true - M_pred;
    if (diff > threshold) return DryingLabel::OverDried;
    if (diff < -threshold) return DryingLabel::UnderDried;
    return DryingLabel::CorrectlyDried;
}

Metrics metrics(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.empty() || truth.size() != predicted.size()) {
        throw std::invalid_argument("metrics: inputs must be non-empty and of equal length");
    }
    Metrics out;
    const auto n = truth.size();
    out.absolute.reserve(n);
    out.relative.reserve(n);
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = truth[i] - predicted[i];
        se += diff * diff;
        ae += std::abs(diff);
        out.absolute.push_back(std::abs(diff));
        if (predicted[i] != 0.0) {
            out.relative.emplace_back(std::abs(diff) / std::abs(predicted[i]));
        } else {
            out.relative.emplace_back(std::nullopt);
        }
    }
    out.mse = se / static_cast<double>(n);
    out.mae = ae / static_cast<double>(n);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset residuals

namespace {

double simulate_sample(const Sample& sample, const EvapParams& params, const MachineConfig& config) {
    try {
        const FabricState final_state = simulate_machine(sample.inputs(), params, config);
        return predicted_moisture(final_state, config.averaging);
    } catch (const SolverError& e) {
        throw SolverError("sample '" + sample.key + "': " + e.message(), e.step_index());
    } catch (const std::exception& e) {
        throw SolverError("sample '" + sample.key + "': " + e.what());
    }
}

}  // namespace

std::vector<double> predict(const EvapParams& params, std::span<const Sample> dataset,
                            const MachineConfig& config, unsigned threads) {
    if (dataset.empty()) throw std::invalid_argument("predict: empty dataset");
    std::vector<double> out(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) { out[i] = simulate_sample(dataset[i], params, config); });
    return out;
}

std::vector<double> residuals(const EvapParams& params, std::span<const Sample> dataset,
                              const MachineConfig& config, unsigned threads) {
    std::vector<double> f = predict(params, dataset, config, threads);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dataset[i].M_tau - f[i];
    return f;
}

BatchResidual dataset_residual(std::vector<Sample> dataset, MachineConfig config, double beta, unsigned threads) {
    if (dataset.empty()) throw std::invalid_argument("residual model: empty dataset");
    return [dataset = std::move(dataset), config = std::move(config), beta,
            threads](std::span<const ParamVector> points) {
        const std::size_t n = dataset.size();
        std::vector<std::vector<double>> out(points.size(), std::vector<double>(n));
        parallel_for(points.size() * n, threads, [&](std::size_t task) {
            const std::size_t p = task / n;
            const std::size_t i = task % n;
            const EvapParams params = EvapParams::from_fitted(points[p], beta);
            out[p][i] = dataset[i].M_tau - simulate_sample(dataset[i], params, config);
        });
        return out;
    };
}

// ---------------------------------------------------------------------------
// Finite-difference Jacobian

ParamVector fd_steps(const ParamVector& x, const Bounds& bounds) {
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    ParamVector h{};
    for (std::size_t m = 0; m < kFittedParams; ++m) {
        const double scale = std::max(std::abs(x[m]), bounds.upper[m] - bounds.lower[m]);
        h[m] = root_eps * scale;
        if (x[m] + h[m] > bounds.upper[m]) h[m] = -h[m];
    }
    return h;
}

FdJacobian fd_jacobian(const BatchResidual& model, const ParamVector& x, const Bounds& bounds) {
    const ParamVector h = fd_steps(x, bounds);
    std::array<ParamVector, 1 + kFittedParams> points;
    points[0] = x;
    ParamVector used{};
    for (std::size_t m = 0; m < kFittedParams; ++m) {
        points[m + 1] = x;
        points[m + 1][m] = x[m] + h[m];
        used[m] = points[m + 1][m] - x[m];  // exactly representable increment
    }
    std::vector<std::vector<double>> f = model(points);
    if (f.size() != points.size()) throw std::logic_error("residual model returned the wrong batch size");

    FdJacobian out;
    out.steps = used;
    out.base = std::move(f[0]);
    const auto rows = static_cast<Eigen::Index>(out.base.size());
    out.J.resize(rows, static_cast<Eigen::Index>(kFittedParams));
    for (std::size_t m = 0; m < kFittedParams; ++m) {
        if (f[m + 1].size() != out.base.size()) throw std::logic_error("residual length changed between points");
        for (Eigen::Index i = 0; i < rows; ++i) {
            out.J(i, static_cast<Eigen::Index>(m)) = (f[m + 1][static_cast<std::size_t>(i)] - out.base[static_cast<std::size_t>(i)]) / used[m];
        }
    }
    return out;
}

FdJacobian fd_jacobian(const EvapParams& params, std::span<const Sample> dataset, const MachineConfig& config,
                       const Bounds& bounds, unsigned threads) {
    const BatchResidual model =
        dataset_residual(std::vector<Sample>(dataset.begin(), dataset.end()), config, params.beta, threads);
    return fd_jacobian(model, params.fitted(), bounds);
}

// ---------------------------------------------------------------------------
// Trust-region reflective least squares.
//
// The iteration runs in box-normalized coordinates u = (x - lower) / (upper - lower),
// so the box is [0, 1]^3. Scaling of the trust region follows Coleman and Li:
// v_m is the distance to the bound the negative gradient points at, and the
// step is taken in the variables u_hat = u / sqrt(v). Steps that would leave the
// box are either truncated, reflected off the hit bound, or replaced by a
// truncated Cauchy step, whichever gives the lowest model value.

namespace {

using Vec = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Point {
    Vec u;
    Eigen::VectorXd f;
    Mat J;  // d f / d u
    double half_cost = 0.0;
};

struct Scaling {
    Vec v;
    Vec dv;
};

Scaling cl_scaling(const Vec& u, const Vec& g) {
    Scaling s{Vec::Ones(), Vec::Zero()};
    for (int m = 0; m < 3; ++m) {
        if (g[m] < 0.0) {
            s.v[m] = 1.0 - u[m];
            s.dv[m] = -1.0;
        } else if (g[m] > 0.0) {
            s.v[m] = u[m];
            s.dv[m] = 1.0;
        }
    }
    return s;
}

Vec strictly_feasible(Vec u, double rstep) {
    for (int m = 0; m < 3; ++m) {
        u[m] = std::clamp(u[m], 0.0, 1.0);
        if (u[m] <= 0.0) u[m] = rstep > 0.0 ? rstep : std::nextafter(0.0, 1.0);
        if (u[m] >= 1.0) u[m] = rstep > 0.0 ? 1.0 - rstep : std::nextafter(1.0, 0.0);
    }
    return u;
}

bool in_box(const Vec& u) { return (u.array() >= 0.0).all() && (u.array() <= 1.0).all(); }

// Largest t with u + t s in the box, and which components hit (sign of s) at that t.
std::pair<double, Vec> step_to_bound(const Vec& u, const Vec& s) {
    Vec steps = Vec::Constant(std::numeric_limits<double>::infinity());
    for (int m = 0; m < 3; ++m) {
        if (s[m] != 0.0) steps[m] = std::max((0.0 - u[m]) / s[m], (1.0 - u[m]) / s[m]);
    }
    const double t = steps.minCoeff();
    Vec hits = Vec::Zero();
    for (int m = 0; m < 3; ++m) {
        if (steps[m] == t) hits[m] = (s[m] > 0.0) - (s[m] < 0.0);
    }
    return {t, hits};
}

// Both roots t of ||x + t s|| = Delta, smaller first.
std::pair<double, double> intersect_trust_region(const Vec& x, const Vec& s, double Delta) {
    const double a = s.squaredNorm();
    const double b = x.dot(s);
    const double c = x.squaredNorm() - Delta * Delta;
    const double d = std::sqrt(std::max(0.0, b * b - a * c));
    const double q = -(b + std::copysign(d, b));
    double t1 = q / a;
    double t2 = q != 0.0 ? c / q : -t1;
    if (t1 > t2) std::swap(t1, t2);
    return {t1, t2};
}

// Model m(s) = 0.5 ||J s||^2 + 0.5 s' diag s + g' s.
double evaluate_quadratic(const Mat& J, const Vec& g, const Vec& s, const Vec& diag) {
    const Eigen::VectorXd Js = J * s;
    return 0.5 * (Js.squaredNorm() + s.dot(diag.cwiseProduct(s))) + g.dot(s);
}

// Coefficients of m(s0 + t s) = a t^2 + b t + c.
struct Quadratic1d {
    double a, b, c;
};

Quadratic1d quadratic_along(const Mat& J, const Vec& g, const Vec& s, const Vec& diag, const Vec& s0) {
    const Eigen::VectorXd v = J * s;
    const Eigen::VectorXd w = J * s0;
    Quadratic1d q{};
    q.a = 0.5 * (v.squaredNorm() + s.dot(diag.cwiseProduct(s)));
    q.b = g.dot(s) + w.dot(v) + s0.dot(diag.cwiseProduct(s));
    q.c = 0.5 * (w.squaredNorm() + s0.dot(diag.cwiseProduct(s0))) + g.dot(s0);
    return q;
}

std::pair<double, double> minimize_quadratic_1d(const Quadratic1d& q, double lo, double hi) {
    double best_t = lo;
    double best_y = lo * (q.a * lo + q.b) + q.c;
    auto consider = [&](double t) {
        const double y = t * (q.a * t + q.b) + q.c;
        if (y < best_y) {
            best_y = y;
            best_t = t;
        }
    };
    consider(hi);
    if (q.a != 0.0) {
        const double extremum = -0.5 * q.b / q.a;
        if (lo < extremum && extremum < hi) consider(extremum);
    }
    return {best_t, best_y};
}

// Solves min ||J_aug p + f_aug|| s.t. ||p|| <= Delta given the thin SVD of J_aug
// (uf = U' f_aug), by the More-Sorensen iteration on the Levenberg parameter.
Vec solve_trust_region_subproblem(std::size_t rows, const Eigen::VectorXd& uf, const Eigen::VectorXd& s,
                                  const Mat& V, double Delta, double& alpha) {
    const Eigen::VectorXd suf = s.cwiseProduct(uf);
    const bool full_rank = rows >= 3 && s[2] > kEps * static_cast<double>(rows) * s[0];
    if (full_rank) {
        const Vec p = -V * uf.cwiseQuotient(s);
        if (p.norm() <= Delta) {
            alpha = 0.0;
            return p;
        }
    }
    auto phi_and_derivative = [&](double a) {
        const Eigen::ArrayXd denom = s.array().square() + a;
        const double p_norm = (suf.array() / denom).matrix().norm();
        const double phi = p_norm - Delta;
        const double phi_prime = -(suf.array().square() / denom.cube()).sum() / p_norm;
        return std::pair{phi, phi_prime};
    };
    double alpha_upper = suf.norm() / Delta;
    double alpha_lower = 0.0;
    if (full_rank) {
        const auto [phi, phi_prime] = phi_and_derivative(0.0);
        alpha_lower = -phi / phi_prime;
    }
    if (!full_rank && alpha == 0.0) {
        alpha = std::max(0.001 * alpha_upper, std::sqrt(alpha_lower * alpha_upper));
    }
    for (int it = 0; it < 10; ++it) {
        if (alpha < alpha_lower || alpha > alpha_upper) {
            alpha = std::max(0.001 * alpha_upper, std::sqrt(alpha_lower * alpha_upper));
        }
        const auto [phi, phi_prime] = phi_and_derivative(alpha);
        if (phi < 0.0) alpha_upper = alpha;
        const double ratio = phi / phi_prime;
        alpha_lower = std::max(alpha_lower, alpha - ratio);
        alpha -= (phi + Delta) * ratio / Delta;
        if (std::abs(phi) < 0.01 * Delta) break;
    }
    Vec p = -V * (suf.array() / (s.array().square() + alpha)).matrix();
    const double norm = p.norm();
    if (norm > 0.0) p *= Delta / norm;
    return p;
}

struct SelectedStep {
    Vec step;
    Vec step_hat;
    double predicted_reduction;
};

SelectedStep select_step(const Vec& u, const Mat& J_h, const Vec& diag_h, const Vec& g_h, Vec p, Vec p_h,
                         const Vec& d, double Delta, double theta) {
    if (in_box(u + p)) {
        return {p, p_h, -evaluate_quadratic(J_h, g_h, p_h, diag_h)};
    }
    const auto [p_stride, hits] = step_to_bound(u, p);

    // Reflection off the first bound hit.
    Vec r_h = p_h;
    for (int m = 0; m < 3; ++m) {
        if (hits[m] != 0.0) r_h[m] = -r_h[m];
    }
    Vec r = d.cwiseProduct(r_h);
    p *= p_stride;
    p_h *= p_stride;
    const Vec u_on_bound = u + p;

    const double to_tr = intersect_trust_region(p_h, r_h, Delta).second;
    const double to_bound = step_to_bound(u_on_bound, r).first;
    const double r_stride = std::min(to_bound, to_tr);
    double r_lo = 0.0, r_hi = -1.0;
    if (r_stride > 0.0) {
        r_lo = (1.0 - theta) * p_stride / r_stride;
        r_hi = (r_stride == to_bound) ? theta * to_bound : to_tr;
    }
    double r_value = std::numeric_limits<double>::infinity();
    if (r_lo <= r_hi) {
        const Quadratic1d q = quadratic_along(J_h, g_h, r_h, diag_h, p_h);
        const auto [t, value] = minimize_quadratic_1d(q, r_lo, r_hi);
        r_h = p_h + t * r_h;
        r = d.cwiseProduct(r_h);
        r_value = value;
    }

    // Truncated Newton step, pulled back to stay strictly inside.
    p *= theta;
    p_h *= theta;
    const double p_value = evaluate_quadratic(J_h, g_h, p_h, diag_h);

    // Cauchy step along the scaled anti-gradient.
    Vec ag_h = -g_h;
    Vec ag = d.cwiseProduct(ag_h);
    const double ag_to_tr = Delta / ag_h.norm();
    const double ag_to_bound = step_to_bound(u, ag).first;
    const double ag_limit = ag_to_bound < ag_to_tr ? theta * ag_to_bound : ag_to_tr;
    const Quadratic1d qa = quadratic_along(J_h, g_h, ag_h, diag_h, Vec::Zero());
    const auto [ag_t, ag_value] = minimize_quadratic_1d(qa, 0.0, ag_limit);
    ag_h *= ag_t;
    ag *= ag_t;

    if (p_value < r_value && p_value < ag_value) return {p, p_h, -p_value};
    if (r_value < p_value && r_value < ag_value) return {r, r_h, -r_value};
    return {ag, ag_h, -ag_value};
}

}  // namespace

FitResult fit(const BatchResidual& model, const Bounds& bounds, const ParamVector& init,
              const FitOptions& options, double beta) {
    bounds.validate();
    if (!bounds.contains(init)) {
        throw std::invalid_argument("fit: initial guess lies outside the bounds");
    }
    Vec width, lower;
    for (int m = 0; m < 3; ++m) {
        lower[m] = bounds.lower[static_cast<std::size_t>(m)];
        width[m] = bounds.upper[static_cast<std::size_t>(m)] - bounds.lower[static_cast<std::size_t>(m)];
    }
    auto to_physical = [&](const Vec& u) {
        ParamVector x{};
        for (int m = 0; m < 3; ++m) {
            const auto i = static_cast<std::size_t>(m);
            x[i] = std::clamp(lower[m] + u[m] * width[m], bounds.lower[i], bounds.upper[i]);
        }
        return x;
    };

    FitResult result;
    auto evaluate = [&](const Vec& u) {
        const ParamVector x = to_physical(u);
        FdJacobian fd = fd_jacobian(model, x, bounds);
        Point pt;
        pt.u = u;
        pt.f = Eigen::Map<const Eigen::VectorXd>(fd.base.data(), static_cast<Eigen::Index>(fd.base.size()));
        pt.J = fd.J * width.asDiagonal();
        pt.half_cost = 0.5 * pt.f.squaredNorm();
        result.n_iterations += 1;
        result.n_residual_evals += 1 + kFittedParams;
        return pt;
    };
    auto record = [&](const Point& pt, bool accepted, double radius) {
        result.history.push_back(
            FitIteration{to_physical(pt.u), 2.0 * pt.half_cost, accepted, radius, 1 + kFittedParams});
    };

    Vec u0;
    for (int m = 0; m < 3; ++m) u0[m] = (init[static_cast<std::size_t>(m)] - lower[m]) / width[m];
    Point current = evaluate(strictly_feasible(u0, 1e-10));
    record(current, true, 0.0);

    std::optional<FitStatus> status;
    if (current.half_cost == 0.0) status = FitStatus::CostTolerance;

    Vec g = current.J.transpose() * current.f;
    double Delta = 1.0;
    {
        const Scaling sc = cl_scaling(current.u, g);
        Delta = current.u.cwiseQuotient(sc.v.cwiseSqrt()).norm();
        if (Delta == 0.0 || !std::isfinite(Delta)) Delta = 1.0;
    }
    double alpha = 0.0;

    while (!status) {
        const Scaling sc = cl_scaling(current.u, g);
        const double g_norm = g.cwiseProduct(sc.v).cwiseAbs().maxCoeff();
        if (g_norm < options.gtol) {
            status = FitStatus::GradientTolerance;
            break;
        }
        if (result.n_iterations >= options.max_iterations) {
            status = FitStatus::MaxIterations;
            break;
        }

        const Vec d = sc.v.cwiseSqrt();
        const Vec diag_h = g.cwiseProduct(sc.dv);
        const Vec g_h = d.cwiseProduct(g);
        const Mat J_h = current.J * d.asDiagonal();

        const Eigen::Index m_rows = J_h.rows();
        Mat J_aug = Mat::Zero(m_rows + 3, 3);
        J_aug.topRows(m_rows) = J_h;
        J_aug.bottomRows(3) = diag_h.cwiseSqrt().asDiagonal();
        Eigen::VectorXd f_aug = Eigen::VectorXd::Zero(m_rows + 3);
        f_aug.head(m_rows) = current.f;

        const Eigen::JacobiSVD<Mat> svd(J_aug, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd uf = svd.matrixU().transpose() * f_aug;
        const double theta = std::max(0.995, 1.0 - g_norm);

        const Vec p_h = solve_trust_region_subproblem(static_cast<std::size_t>(J_aug.rows()), uf,
                                                      svd.singularValues(), svd.matrixV(), Delta, alpha);
        const Vec p = d.cwiseProduct(p_h);
        const SelectedStep chosen = select_step(current.u, J_h, diag_h, g_h, p, p_h, d, Delta, theta);

        const Vec u_new = strictly_feasible(current.u + chosen.step, 0.0);
        Point trial = evaluate(u_new);

        const double actual = current.half_cost - trial.half_cost;
        const double step_h_norm = chosen.step_hat.norm();

        double ratio = 0.0;
        if (chosen.predicted_reduction > 0.0) {
            ratio = actual / chosen.predicted_reduction;
        } else if (chosen.predicted_reduction == 0.0 && actual == 0.0) {
            ratio = 1.0;
        }
        double Delta_new = Delta;
        if (ratio < 0.25) {
            Delta_new = 0.25 * step_h_norm;
        } else if (ratio > 0.75 && step_h_norm > 0.95 * Delta) {
            Delta_new = 2.0 * Delta;
        }

        const double step_norm = (u_new - current.u).norm();
        const bool ftol_hit = actual < options.ftol * current.half_cost && ratio > 0.25;
        const bool xtol_hit = step_norm < options.xtol * (options.xtol + current.u.norm());

        const bool accepted = actual > 0.0;
        record(trial, accepted, Delta);
        if (accepted) {
            current = std::move(trial);
            g = current.J.transpose() * current.f;
        }
        if (ftol_hit) {
            status = FitStatus::CostTolerance;
        } else if (xtol_hit) {
            status = FitStatus::StepTolerance;
        }
        if (Delta_new > 0.0) alpha *= Delta / Delta_new;
        Delta = Delta_new;
        if (Delta == 0.0 && !status) status = FitStatus::StepTolerance;
    }

    result.converged = *status;
    result.params = EvapParams::from_fitted(to_physical(current.u), beta);
    result.residuals.assign(current.f.data(), current.f.data() + current.f.size());
    result.cost = 2.0 * current.half_cost;
    const std::vector<double> zeros(result.residuals.size(), 0.0);
    const Metrics mt = metrics(result.residuals, zeros);
    result.mse = mt.mse;
    result.mae = mt.mae;
    return result;
}

FitResult fit(std::span<const Sample> dataset, const Bounds& bounds, const EvapParams& init,
              const MachineConfig& config, const FitOptions& options) {
    if (dataset.empty()) throw std::invalid_argument("fit: empty dataset");
    for (const Sample& s : dataset) s.validate();
    config.validate();
    const BatchResidual model = dataset_residual(std::vector<Sample>(dataset.begin(), dataset.end()), config,
                                                 init.beta, options.threads);
    return fit(model, bounds, init.fitted(), options, init.beta);
}

}  // namespace fabdry
