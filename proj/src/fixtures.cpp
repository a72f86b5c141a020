#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fabdry/workbench.hpp"

namespace fabdry {

namespace {

// Published result tables for the 17 calibration samples, one per parameter
// set. Columns: key, TRUE, PRED, RELATIVE ERROR, ABSOLUTE ERROR, label.
// The source prints decimal commas ("4,76E-02"); they are stored here with
// decimal points, digits otherwise unchanged.
constexpr std::array<FixtureTable, 3> kTables{{
    {"table-1",
     {9.99e-4, 9.75e-2, 149.0},
     0.000289,
     0.0135,
     {{
          {1, 4.76E-02, 5.23E-02, 0.0886, 0.0046, DryingLabel::CorrectlyDried},
          {2, 4.35E-02, 5.21E-02, 0.1648, 0.0086, DryingLabel::CorrectlyDried},
          {3, 6.84E-02, 6.54E-02, 0.0467, 0.0031, DryingLabel::CorrectlyDried},
          {4, 4.55E-02, 6.05E-02, 0.2486, 0.0150, DryingLabel::CorrectlyDried},
          {5, 5.88E-02, 5.97E-02, 0.0153, 0.0009, DryingLabel::CorrectlyDried},
          {6, 4.60E-02, 5.95E-02, 0.2277, 0.0136, DryingLabel::CorrectlyDried},
          {7, 7.78E-02, 5.53E-02, 0.4062, 0.0225, DryingLabel::OverDried},
          {8, 5.19E-02, 5.43E-02, 0.0456, 0.0025, DryingLabel::CorrectlyDried},
          {9, 6.25E-02, 5.28E-02, 0.1833, 0.0097, DryingLabel::CorrectlyDried},
          {10, 9.29E-02, 5.95E-02, 0.5614, 0.0334, DryingLabel::OverDried},
          {11, 4.52E-02, 5.73E-02, 0.2105, 0.0121, DryingLabel::CorrectlyDried},
          {12, 6.21E-02, 6.55E-02, 0.0516, 0.0034, DryingLabel::CorrectlyDried},
          {13, 6.86E-02, 5.24E-02, 0.3094, 0.0162, DryingLabel::OverDried},
          {14, 7.84E-02, 5.83E-02, 0.3448, 0.0201, DryingLabel::OverDried},
          {15, 3.79E-02, 6.62E-02, 0.4275, 0.0283, DryingLabel::UnderDried},
          {16, 5.56E-02, 5.36E-02, 0.0361, 0.0019, DryingLabel::CorrectlyDried},
          {17, 3.33E-02, 6.68E-02, 0.5012, 0.0335, DryingLabel::UnderDried},
     }}},
    {"table-2",
     {5e-4, 1e-1, 100.0},
     0.000379,
     0.0151,
     {{
          {1, 4.76E-02, 4.32E-02, 0.1023, 0.0044, DryingLabel::CorrectlyDried},
          {2, 4.35E-02, 4.31E-02, 0.0083, 0.0004, DryingLabel::CorrectlyDried},
          {3, 6.84E-02, 6.79E-02, 0.0084, 0.0006, DryingLabel::CorrectlyDried},
          {4, 4.55E-02, 5.67E-02, 0.1983, 0.0112, DryingLabel::CorrectlyDried},
          {5, 5.88E-02, 5.53E-02, 0.0639, 0.0035, DryingLabel::CorrectlyDried},
          {6, 4.60E-02, 5.49E-02, 0.1618, 0.0089, DryingLabel::CorrectlyDried},
          {7, 7.78E-02, 4.83E-02, 0.6100, 0.0295, DryingLabel::OverDried},
          {8, 5.19E-02, 4.62E-02, 0.1226, 0.0057, DryingLabel::CorrectlyDried},
          {9, 6.25E-02, 4.38E-02, 0.4263, 0.0187, DryingLabel::OverDried},
          {10, 9.29E-02, 5.48E-02, 0.6945, 0.0381, DryingLabel::OverDried},
          {11, 4.52E-02, 5.10E-02, 0.1138, 0.0058, DryingLabel::CorrectlyDried},
          {12, 6.21E-02, 6.78E-02, 0.0838, 0.0057, DryingLabel::CorrectlyDried},
          {13, 6.86E-02, 4.32E-02, 0.5897, 0.0255, DryingLabel::OverDried},
          {14, 7.84E-02, 5.28E-02, 0.4863, 0.0257, DryingLabel::OverDried},
          {15, 3.79E-02, 6.59E-02, 0.4252, 0.0280, DryingLabel::UnderDried},
          {16, 5.56E-02, 4.55E-02, 0.2202, 0.0100, DryingLabel::CorrectlyDried},
          {17, 3.33E-02, 6.89E-02, 0.5163, 0.0356, DryingLabel::UnderDried},
     }}},
    {"table-3",
     {1e-3, 1e-1, 150.0},
     0.000328,
     0.0144,
     {{
          {1, 4.76E-02, 5.47E-02, 0.1291, 0.0071, DryingLabel::CorrectlyDried},
          {2, 4.35E-02, 5.45E-02, 0.2019, 0.0110, DryingLabel::CorrectlyDried},
          {3, 6.84E-02, 6.76E-02, 0.0127, 0.0009, DryingLabel::CorrectlyDried},
          {4, 4.55E-02, 6.29E-02, 0.2774, 0.0174, DryingLabel::UnderDried},
          {5, 5.88E-02, 6.21E-02, 0.0534, 0.0033, DryingLabel::CorrectlyDried},
          {6, 4.60E-02, 6.19E-02, 0.2576, 0.0160, DryingLabel::UnderDried},
          {7, 7.78E-02, 5.78E-02, 0.3468, 0.0200, DryingLabel::OverDried},
          {8, 5.19E-02, 5.67E-02, 0.0861, 0.0049, DryingLabel::CorrectlyDried},
          {9, 6.25E-02, 5.52E-02, 0.1318, 0.0073, DryingLabel::CorrectlyDried},
          {10, 9.29E-02, 6.19E-02, 0.5006, 0.0310, DryingLabel::OverDried},
          {11, 4.52E-02, 6.79E-02, 0.3343, 0.0227, DryingLabel::UnderDried},
          {12, 6.21E-02, 5.48E-02, 0.1337, 0.0073, DryingLabel::CorrectlyDried},
          {13, 6.86E-02, 6.07E-02, 0.1302, 0.0079, DryingLabel::CorrectlyDried},
          {14, 7.84E-02, 6.85E-02, 0.1445, 0.0099, DryingLabel::CorrectlyDried},
          {15, 3.79E-02, 5.60E-02, 0.3241, 0.0182, DryingLabel::UnderDried},
          {16, 5.56E-02, 6.92E-02, 0.1967, 0.0136, DryingLabel::CorrectlyDried},
          {17, 3.33E-02, 7.97E-02, 0.5817, 0.0464, DryingLabel::UnderDried},
     }}},
}};

// Half a unit in the last printed digit: TRUE and PRED carry three significant
// figures of a number in [1e-2, 1e-1), the error columns four decimals.
constexpr double kValueHalfUlp = 5e-5;
constexpr double kErrorHalfUlp = 5e-5;

struct Interval {
    double lo, hi;
    bool overlaps(double v, double half_width) const { return v + half_width >= lo && v - half_width <= hi; }
};

// Range of |t - p| for all t, p that round to the printed values.
Interval abs_diff_range(double t, double p) {
    const double lo = t - p - 2.0 * kValueHalfUlp;
    const double hi = t - p + 2.0 * kValueHalfUlp;
    if (lo > 0.0) return {lo, hi};
    if (hi < 0.0) return {-hi, -lo};
    return {0.0, std::max(-lo, hi)};
}

}  // namespace

std::span<const FixtureTable> fixture_tables() { return kTables; }

bool FixtureCheck::passed() const {
    return std::all_of(tables.begin(), tables.end(), [](const FixtureTableCheck& t) {
        return t.mse_ok && t.mae_ok && t.label_mismatches.empty() && t.error_mismatches.empty();
    });
}

FixtureCheck check_fixtures() {
    FixtureCheck out;
    for (const FixtureTable& table : kTables) {
        std::vector<double> truth, pred;
        for (const FixtureRow& row : table.rows) {
            truth.push_back(row.truth);
            pred.push_back(row.pred);
        }
        const Metrics m = metrics(truth, pred);
        FixtureTableCheck c;
        c.name = table.name;
        c.mse = m.mse;
        c.mae = m.mae;
        c.mse_ok = std::abs(m.mse - table.mse) <= kFixtureMseTolerance;
        c.mae_ok = std::abs(m.mae - table.mae) <= kFixtureMaeTolerance;
        for (const FixtureRow& row : table.rows) {
            if (classify(row.truth, row.pred) != row.label) c.label_mismatches.push_back(row.key);
            const Interval a = abs_diff_range(row.truth, row.pred);
            const Interval r{a.lo / (row.pred + kValueHalfUlp), a.hi / (row.pred - kValueHalfUlp)};
            if (!a.overlaps(row.absolute, kErrorHalfUlp) || !r.overlaps(row.relative, kErrorHalfUlp)) {
                c.error_mismatches.push_back(row.key);
            }
        }
        out.tables.push_back(std::move(c));
    }
    return out;
}

void print_fixture_check(std::ostream& out, const FixtureCheck& check) {
    char buf[200];
    for (std::size_t i = 0; i < check.tables.size(); ++i) {
        const FixtureTableCheck& c = check.tables[i];
        const FixtureTable& t = kTables[i];
        std::snprintf(buf, sizeof buf, "%s: MSE %.4e (caption %.4e) %s, MAE %.4f (caption %.4f) %s, labels %zu/17, error columns %zu/17\n",
                      std::string(c.name).c_str(), c.mse, t.mse, c.mse_ok ? "ok" : "MISMATCH", c.mae, t.mae,
                      c.mae_ok ? "ok" : "MISMATCH", 17 - c.label_mismatches.size(), 17 - c.error_mismatches.size());
        out << buf;
        for (int key : c.label_mismatches) out << "  label mismatch at key " << key << '\n';
        for (int key : c.error_mismatches) out << "  error column mismatch at key " << key << '\n';
    }
    out << (check.passed() ? "fixtures: PASS" : "fixtures: FAIL") << '\n';
}

}  // namespace fabdry
