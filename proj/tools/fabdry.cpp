// Command-line front end: simulate, predict, fit, check-fixtures.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fabdry/errors.hpp"
#include "fabdry/estimation.hpp"
#include "fabdry/workbench.hpp"

namespace fs = std::filesystem;
using namespace fabdry;

namespace {

struct CommonFlags {
    std::string config;
    std::string dataset;
    std::string out;
    std::string params;
    std::optional<std::size_t> nodes;
    std::optional<double> dt;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "run configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--dataset", f.dataset, "dataset CSV (key,tau_s,thickness_m,T_cyl_K,M0,M_tau)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--params", f.params, "kinetic parameters as k,Mb,gamma");
    cmd->add_option("--nodes", f.nodes, "grid nodes across the thickness")->check(CLI::Range(3, 1000000));
    cmd->add_option("--dt", f.dt, "time step, s")->check(CLI::PositiveNumber);
}

ParamVector parse_params(const std::string& text) {
    ParamVector p{};
    std::istringstream in(text);
    std::string item;
    std::size_t n = 0;
    while (std::getline(in, item, ',')) {
        if (n == 3) throw ConfigError("--params expects exactly three values k,Mb,gamma");
        std::size_t used = 0;
        try {
            p[n] = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("--params: cannot parse '" + item + "'");
        ++n;
    }
    if (n != 3) throw ConfigError("--params expects exactly three values k,Mb,gamma");
    return p;
}

RunConfig resolve(const CommonFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.dataset.empty()) c.dataset_path = f.dataset;
    if (!f.out.empty()) c.output_dir = f.out;
    if (f.nodes) c.machine.n_nodes = *f.nodes;
    if (f.dt) c.machine.dt = *f.dt;
    c.validate();
    return c;
}

std::vector<Sample> require_dataset(const RunConfig& c) {
    if (c.dataset_path.empty()) throw ConfigError("no dataset given (use --dataset or paths.dataset)");
    return load_dataset(c.dataset_path);
}

fs::path output_dir(const RunConfig& c) {
    const fs::path dir = c.output_dir.empty() ? fs::path(".") : fs::path(c.output_dir);
    fs::create_directories(dir);
    return dir;
}

int run_simulate(const CommonFlags& f, const std::string& sample_key, std::optional<double> tau,
                 std::optional<double> thickness, std::optional<double> M0, std::optional<double> T_cyl,
                 bool trajectory, double snapshot_interval) {
    const RunConfig c = resolve(f);
    EvapParams params = c.kinetics;
    if (!f.params.empty()) params = EvapParams::from_fitted(parse_params(f.params), c.kinetics.beta);
    params.validate();

    ProcessInputs inputs = c.operating;
    std::string label = "config";
    if (!sample_key.empty()) {
        const std::vector<Sample> ds = require_dataset(c);
        const auto it = std::find_if(ds.begin(), ds.end(), [&](const Sample& s) { return s.key == sample_key; });
        if (it == ds.end()) throw DatasetError("sample '" + sample_key + "' not found in " + c.dataset_path);
        inputs = it->inputs();
        label = "sample " + sample_key;
    }
    if (tau) inputs.tau = *tau;
    if (thickness) inputs.thickness = *thickness;
    if (M0) inputs.M0 = *M0;
    if (T_cyl) inputs.T_cyl = *T_cyl;

    StageOptions options;
    options.record = trajectory;
    options.snapshot_interval = snapshot_interval;
    const MachineTrace trace = simulate_machine_traced(inputs, params, c.machine, options);
    const FabricState& s = trace.final_state;

    std::printf("inputs: %s, tau = %g s, L = %g m, T_cyl = %g K, M0 = %g\n", label.c_str(), inputs.tau,
                inputs.thickness, inputs.T_cyl, inputs.M0);
    std::printf("parameters: k = %.6g, M_b = %.6g, gamma = %.6g, beta = %g\n", params.k, params.M_b, params.gamma,
                params.beta);
    std::printf("grid: %zu nodes, dt = %g s\n", c.machine.n_nodes, c.machine.dt);
    std::printf("initial average moisture: %.6f\n", inputs.M0);
    std::printf("final average moisture: %.6f\n", predicted_moisture(s, c.machine.averaging));
    std::printf("final nodal mean moisture: %.6f\n", average_moisture(s));
    std::printf("final temperature: x=0 %.3f K, x=L %.3f K\n", s.T.front(), s.T.back());

    if (trajectory) {
        const fs::path path = output_dir(c) / "trajectory.csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_trajectory_csv(out, s.grid, trace.trajectory);
        std::printf("trajectory: %s\n", path.string().c_str());
    }
    return 0;
}

int run_predict(const CommonFlags& f) {
    const RunConfig c = resolve(f);
    EvapParams params = c.kinetics;
    if (!f.params.empty()) params = EvapParams::from_fitted(parse_params(f.params), c.kinetics.beta);
    params.validate();
    const std::vector<Sample> ds = require_dataset(c);
    const std::vector<double> pred = predict(params, ds, c.machine, c.fit_options.threads);
    const Report report = make_report(ds, pred, params);
    const fs::path path = output_dir(c) / "report.txt";
    write_report(path, report);
    emit_report(std::cout, report);
    std::printf("report: %s\n", path.string().c_str());
    return 0;
}

int run_fit(const CommonFlags& f) {
    const RunConfig c = resolve(f);
    EvapParams init = c.fit_init;
    if (!f.params.empty()) init = EvapParams::from_fitted(parse_params(f.params), c.fit_init.beta);
    const std::vector<Sample> ds = require_dataset(c);

    const FitResult r = fit(ds, c.bounds, init, c.machine, c.fit_options);
    std::vector<double> pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) pred[i] = ds[i].M_tau - r.residuals[i];
    Report report = make_report(ds, pred, r.params);
    report.fit = FitSummary{r.n_iterations, r.n_residual_evals, r.converged, r.cost};

    const fs::path dir = output_dir(c);
    write_report(dir / "report.txt", report);
    {
        std::ofstream hist(dir / "fit_history.csv");
        if (!hist) throw std::runtime_error("cannot write " + (dir / "fit_history.csv").string());
        hist << "iteration,k,M_b,gamma,cost,accepted,radius,residual_evaluations\n";
        char buf[256];
        for (std::size_t i = 0; i < r.history.size(); ++i) {
            const FitIteration& h = r.history[i];
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%zu\n", i, h.point[0], h.point[1],
                          h.point[2], h.cost, h.accepted ? 1 : 0, h.radius, h.residual_evaluations);
            hist << buf;
        }
    }
    emit_report(std::cout, report);
    std::printf("report: %s\n", (dir / "report.txt").string().c_str());
    return 0;
}

int run_check_fixtures() {
    const FixtureCheck check = check_fixtures();
    print_fixture_check(std::cout, check);
    return check.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact drying of fabrics on heated cylinders: simulation and parameter fitting"};
    app.require_subcommand(1);

    CommonFlags sim_flags, pred_flags, fit_flags;
    std::string sample_key;
    std::optional<double> tau, thickness, M0, T_cyl;
    bool trajectory = false;
    double snapshot_interval = 0.1;

    CLI::App* sim = app.add_subcommand("simulate", "simulate one drying run and print the final state");
    add_common(sim, sim_flags);
    sim->add_option("--sample", sample_key, "take the process inputs of this dataset key");
    sim->add_option("--tau", tau, "total drying time, s")->check(CLI::NonNegativeNumber);
    sim->add_option("--thickness", thickness, "fabric thickness, m")->check(CLI::PositiveNumber);
    sim->add_option("--M0", M0, "initial moisture content")->check(CLI::NonNegativeNumber);
    sim->add_option("--T-cyl", T_cyl, "cylinder temperature, K")->check(CLI::PositiveNumber);
    sim->add_flag("--trajectory", trajectory, "write trajectory.csv to the output directory");
    sim->add_option("--snapshot-interval", snapshot_interval, "trajectory spacing, s (0: every step)")
        ->check(CLI::NonNegativeNumber);

    CLI::App* pred = app.add_subcommand("predict", "predict a dataset with fixed parameters and write a report");
    add_common(pred, pred_flags);

    CLI::App* fitc = app.add_subcommand("fit", "fit k, M_b, gamma to a dataset and write a report");
    add_common(fitc, fit_flags);

    app.add_subcommand("check-fixtures", "recompute metrics and labels of the reference tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_flags, sample_key, tau, thickness, M0, T_cyl, trajectory,
                                               snapshot_interval);
        if (pred->parsed()) return run_predict(pred_flags);
        if (fitc->parsed()) return run_fit(fit_flags);
        return run_check_fixtures();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fabdry: error: %s\n", e.what());
        return 2;
    }
}
