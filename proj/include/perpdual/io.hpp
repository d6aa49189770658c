#pragma once
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "perpdual/boundary.hpp"
#include "perpdual/calibration.hpp"
#include "perpdual/duality.hpp"
#include "perpdual/fundamental.hpp"
#include "perpdual/rational.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual::io {

/// Fixed-width scientific formatting; identical configs must produce
/// byte-identical files, so all data values funnel through here.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct CsvTable {
    std::vector<std::string> meta;      // "# key: value" lines
    std::string header;                 // comma-separated column names
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_tags;  // optional text column
    std::size_t tag_column = SIZE_MAX;  // position of the text column; end if SIZE_MAX
};

inline void write_csv(const std::string& path, const CsvTable& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& m : t.meta) os << "# " << m << "\n";
    os << t.header << "\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        std::size_t col = 0;
        for (std::size_t j = 0; j < t.rows[i].size(); ++j, ++col) {
            if (!t.row_tags.empty() && col == t.tag_column) {
                if (col) os << ",";
                os << t.row_tags[i];
                ++col;
            }
            if (col) os << ",";
            os << fmt(t.rows[i][j]);
        }
        if (!t.row_tags.empty() && t.tag_column >= col) {
            if (col) os << ",";
            os << t.row_tags[i];
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

/// Numeric CSV reader: skips "#" comment lines, requires a header row.
struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline CsvData read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    CsvData d;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (!have_header) {
            while (std::getline(ss, cell, ',')) d.columns.push_back(cell);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());  // text column
            }
        }
        if (!row.empty()) d.rows.push_back(row);
    }
    if (!have_header) throw std::runtime_error("missing header row in " + path);
    return d;
}

inline std::size_t column_index(const CsvData& d, const std::string& name) {
    for (std::size_t i = 0; i < d.columns.size(); ++i)
        if (d.columns[i] == name) return i;
    throw std::runtime_error("missing column '" + name + "'");
}

/// Tabulated curve from a two-column CSV (x, sigma), strictly increasing x.
inline VolatilityCurve curve_from_csv(const std::string& path) {
    auto d = read_csv(path);
    auto xi = column_index(d, "x"), si = column_index(d, "sigma");
    std::vector<double> x, s;
    for (const auto& r : d.rows) {
        x.push_back(r.at(xi));
        s.push_back(r.at(si));
    }
    return make_tabulated_curve(x, s, "tabulated:" + path);
}

/// Curve from a structured spec document:
///   {"family": "constant", "params": {"sigma": 0.3}}
///   {"family": "rational_boundary", "params": {"a":1,"b":0.4,"c":0.1,"dual":false}}
///   {"family": "piecewise_from_boundary", "params": {"a":..,"b":..,"c":..,"x0":..}}
///   {"family": "tabulated", "params": {"csv": "path"} | {"x":[...],"sigma":[...]}}
inline VolatilityCurve curve_from_json(const nlohmann::json& spec, const ModelParams& p) {
    std::string family = spec.at("family").get<std::string>();
    const auto& q = spec.at("params");
    if (family == "constant") return make_constant_curve(q.at("sigma").get<double>());
    if (family == "rational_boundary") {
        RationalBoundaryParams rp{q.at("a").get<double>(), q.at("b").get<double>(),
                                  q.at("c").get<double>()};
        bool dual = q.value("dual", false);
        return dual ? make_rational_dual_curve(rp, p) : make_rational_curve(rp, p);
    }
    if (family == "piecewise_from_boundary") {
        RationalBoundaryParams rp{q.at("a").get<double>(), q.at("b").get<double>(),
                                  q.at("c").get<double>()};
        return make_sigma2_curve(rp, p, q.at("x0").get<double>());
    }
    if (family == "tabulated") {
        if (q.contains("csv")) return curve_from_csv(q.at("csv").get<std::string>());
        std::vector<double> x = q.at("x").get<std::vector<double>>();
        std::vector<double> s = q.at("sigma").get<std::vector<double>>();
        return make_tabulated_curve(x, s);
    }
    if (family == "bump") {
        return make_bump_curve(q.at("sigma0").get<double>(), q.at("eps").get<double>(),
                               q.value("center", 1.0), q.value("width", 0.25));
    }
    throw std::invalid_argument("unknown curve family: " + family);
}

inline std::vector<std::string> standard_meta(const ModelParams& p, const std::string& curve_id) {
    return {"r: " + fmt(p.r), "delta: " + fmt(p.delta), "curve: " + curve_id,
            "tolerances: ode_rtol=1e-10 root_tol=1e-14",
            "domain_truncation: tabulated spans are finite; constant-flat beyond"};
}

inline CsvTable fundamental_csv(const FundamentalSolution& fs) {
    CsvTable t;
    t.meta = standard_meta(fs.params, fs.curve_id);
    t.meta.push_back(std::string("kind: ") + to_string(fs.kind));
    t.meta.push_back("rtol: 1e-10");
    t.header = "x,f,fprime";
    for (std::size_t i = 0; i < fs.grid.size(); ++i)
        t.rows.push_back({fs.grid[i], fs.f_values[i], fs.fprime_values[i]});
    return t;
}

inline CsvTable boundary_csv(const Boundary& b) {
    CsvTable t;
    t.meta = standard_meta(b.params, b.curve_id);
    t.meta.push_back(std::string("side: ") + to_string(b.side));
    t.meta.push_back("anchor: " + fmt(b.anchor.first) + " -> " + fmt(b.anchor.second));
    t.header = "level,value,derivative";
    for (std::size_t i = 0; i < b.grid.size(); ++i)
        t.rows.push_back({b.grid[i], b.values[i], b.derivs[i]});
    return t;
}

inline CsvTable curve_csv(const VolatilityCurve& c, double x_lo, double x_hi, std::size_t n) {
    CsvTable t;
    t.meta = {"curve: " + c.id, "sigma_lo: " + fmt(c.sigma_lo), "sigma_hi: " + fmt(c.sigma_hi)};
    t.header = "x,sigma";
    double l0 = std::log(x_lo), l1 = std::log(x_hi);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
        t.rows.push_back({x, c(x)});
    }
    return t;
}

inline nlohmann::json duality_report_json(const DualityReport& r) {
    return {{"xs", r.xs},
            {"ys", r.ys},
            {"primal_values", r.primal_values},
            {"dual_values", r.dual_values},
            {"max_rel_gap", r.max_rel_gap},
            {"boundary_inverse_gap", r.boundary_inverse_gap},
            {"price_tol", r.price_tol},
            {"boundary_tol", r.boundary_tol},
            {"pass", r.pass}};
}

inline nlohmann::json calibration_json(const CalibrationResult& r) {
    return {{"kind", to_string(r.kind)},
            {"x0", r.spot_x0},
            {"threshold", r.threshold},
            {"threshold_grid", r.diagnostics.threshold_grid},
            {"recovered_span", {r.recovered_span.first, r.recovered_span.second}},
            {"boundary_gap_rel", r.diagnostics.boundary_gap_rel},
            {"repricing_max_rel_err", r.diagnostics.repricing_max_rel_err},
            {"excluded_nodes", r.diagnostics.excluded_nodes},
            {"extension", r.diagnostics.extension_note}};
}

/// Calibration input: CSV (strike, price[, dprice, d2price]) plus a JSON
/// header {kind, x0, r, delta}.
inline PriceCurveSample sample_from_files(const std::string& csv_path,
                                          const nlohmann::json& meta) {
    PriceCurveSample s;
    std::string kind = meta.at("kind").get<std::string>();
    if (kind != "put" && kind != "call")
        throw std::invalid_argument("sample meta: kind must be put or call");
    s.kind = (kind == "put") ? OptionKind::put : OptionKind::call;
    s.spot_x0 = meta.at("x0").get<double>();
    auto d = read_csv(csv_path);
    auto ki = column_index(d, "strike"), pi = column_index(d, "price");
    bool have_d1 = false, have_d2 = false;
    std::size_t d1i = 0, d2i = 0;
    for (std::size_t i = 0; i < d.columns.size(); ++i) {
        if (d.columns[i] == "dprice") { have_d1 = true; d1i = i; }
        if (d.columns[i] == "d2price") { have_d2 = true; d2i = i; }
    }
    for (const auto& r : d.rows) {
        s.strikes.push_back(r.at(ki));
        s.prices.push_back(r.at(pi));
        if (have_d1) s.dprice.push_back(r.at(d1i));
        if (have_d2) s.d2price.push_back(r.at(d2i));
    }
    s.validate();
    return s;
}

inline CsvTable sample_csv(const PriceCurveSample& s) {
    CsvTable t;
    t.meta = {std::string("kind: ") + to_string(s.kind), "x0: " + fmt(s.spot_x0)};
    t.header = "strike,price";
    for (std::size_t i = 0; i < s.strikes.size(); ++i)
        t.rows.push_back({s.strikes[i], s.prices[i]});
    return t;
}

} // namespace perpdual::io
