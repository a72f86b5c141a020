#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fabdry/errors.hpp"
#include "fabdry/properties.hpp"
#include "fabdry/workbench.hpp"

namespace fabdry {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw DatasetError("dataset line " + std::to_string(line) + ": " + what);
}

double number(const std::string& s, std::size_t line, std::string_view field) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        fail(line, std::string(field) + ": expected a finite number, got '" + s + "'");
    }
    return v;
}

}  // namespace

std::vector<Sample> parse_dataset(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool celsius = false;
    std::vector<Sample> out;
    std::set<std::string> keys;

    static const char* const kelvin_header[] = {"key", "tau_s", "thickness_m", "T_cyl_K", "M0", "M_tau"};

    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const std::vector<std::string> cells = split(body);

        if (!have_header) {
            bool ok = cells.size() == 6;
            for (std::size_t i = 0; ok && i < 6; ++i) {
                if (i == 3 && cells[i] == "T_cyl_C") {
                    celsius = true;
                    continue;
                }
                ok = cells[i] == kelvin_header[i];
            }
            if (!ok) fail(line_no, "expected header 'key,tau_s,thickness_m,T_cyl_K,M0,M_tau'");
            have_header = true;
            continue;
        }

        if (cells.size() != 6) {
            fail(line_no, "expected 6 fields, found " + std::to_string(cells.size()));
        }
        Sample s;
        s.key = cells[0];
        if (s.key.empty()) fail(line_no, "key: must not be empty");
        s.tau = number(cells[1], line_no, "tau");
        s.thickness = number(cells[2], line_no, "L");
        s.T_cyl = number(cells[3], line_no, "T_cyl");
        if (celsius) s.T_cyl = celsius_to_kelvin(s.T_cyl);
        s.M0 = number(cells[4], line_no, "M0");
        s.M_tau = number(cells[5], line_no, "M_tau");
        try {
            s.validate();
        } catch (const DatasetError& e) {
            fail(line_no, e.what());
        }
        if (!keys.insert(s.key).second) fail(line_no, "duplicate key '" + s.key + "'");
        out.push_back(std::move(s));
    }
    if (out.empty()) throw DatasetError("empty dataset");
    return out;
}

std::vector<Sample> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_dataset(buf.str());
    } catch (const DatasetError& e) {
        throw DatasetError(path.string() + ": " + e.what());
    }
}

void write_dataset(std::ostream& out, std::span<const Sample> dataset) {
    out << "key,tau_s,thickness_m,T_cyl_K,M0,M_tau\n";
    auto shortest = [](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    for (const Sample& s : dataset) {
        out << s.key << ',' << shortest(s.tau) << ',' << shortest(s.thickness) << ',' << shortest(s.T_cyl) << ','
            << shortest(s.M0) << ',' << shortest(s.M_tau) << '\n';
    }
}

}  // namespace fabdry
