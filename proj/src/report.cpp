#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fabdry/workbench.hpp"

namespace fabdry {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

Report make_report(std::span<const Sample> dataset, std::span<const double> predicted, const EvapParams& params) {
    if (dataset.size() != predicted.size()) throw std::invalid_argument("report: prediction count mismatch");
    Report r;
    r.params = params;
    r.rows.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) r.rows.push_back({dataset[i].key, dataset[i].M_tau, predicted[i]});
    return r;
}

void emit_report(std::ostream& out, const Report& report) {
    if (report.rows.empty()) throw std::invalid_argument("report: no rows");

    std::vector<double> truth, pred;
    for (const ReportRow& row : report.rows) {
        truth.push_back(row.truth);
        pred.push_back(row.pred);
    }
    const Metrics m = metrics(truth, pred);

    const std::array<std::string, 6> header{"KEY", "TRUE", "PRED", "RELATIVE ERROR", "ABSOLUTE ERROR",
                                            "UNDER-OVER DRIED"};
    std::vector<std::array<std::string, 6>> cells;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ReportRow& row = report.rows[i];
        cells.push_back({row.key, fmt("%.2e", row.truth), fmt("%.2e", row.pred),
                         m.relative[i] ? fmt("%.4f", *m.relative[i]) : std::string("n/a"),
                         fmt("%.4f", m.absolute[i]), std::string(to_string(classify(row.truth, row.pred)))});
    }
    std::array<std::size_t, 6> width{};
    for (std::size_t c = 0; c < 6; ++c) {
        width[c] = header[c].size();
        for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::array<std::string, 6>& r) {
        std::string s;
        for (std::size_t c = 0; c < 6; ++c) s += c + 1 < 6 ? pad(r[c], width[c]) + "  " : r[c];
        out << s << '\n';
    };
    line(header);
    for (const auto& r : cells) line(r);

    out << '\n';
    out << "Mean Squared Error: " << fmt("%.6f", m.mse) << '\n';
    out << "Mean Absolute Error: " << fmt("%.4f", m.mae) << '\n';
    out << "Parameters: k = " << fmt("%.3e", report.params.k) << ", M_b = " << fmt("%.3e", report.params.M_b)
        << ", gamma = " << fmt("%.3e", report.params.gamma) << '\n';
    if (report.fit) {
        out << "Fit: status = " << to_string(report.fit->status) << ", iterations = " << report.fit->n_iterations
            << ", residual evaluations = " << report.fit->n_residual_evals
            << ", cost = " << fmt("%.6e", report.fit->cost) << '\n';
    }
}

void write_report(const std::filesystem::path& path, const Report& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
    emit_report(out, report);
    out.flush();
    if (!out) throw std::runtime_error("failed writing report '" + path.string() + "'");
}

}  // namespace fabdry
