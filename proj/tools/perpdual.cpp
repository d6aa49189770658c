#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "perpdual/io.hpp"
#include "perpdual/perpdual.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace perpdual;

namespace {

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    json j;
    is >> j;
    return j;
}

// --override a.b.c=value ; the value is parsed as JSON when possible
void apply_override(json& cfg, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key.path=value: " + kv);
    std::string path = kv.substr(0, eq), value = kv.substr(eq + 1);
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (dot == std::string::npos) {
            try {
                (*node)[key] = json::parse(value);
            } catch (const json::parse_error&) {
                (*node)[key] = value;
            }
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

ModelParams model_from(const json& cfg) {
    ModelParams p{cfg.at("model").at("r").get<double>(),
                  cfg.at("model").at("delta").get<double>()};
    p.validate();
    return p;
}

GridSpec grid_from(const json& j, GridSpec fallback = {}) {
    GridSpec g = fallback;
    if (j.contains("x_min")) g.x_min = j.at("x_min").get<double>();
    if (j.contains("x_max")) g.x_max = j.at("x_max").get<double>();
    if (j.contains("n")) g.n = j.at("n").get<std::size_t>();
    g.validate();
    return g;
}

std::vector<double> axis_from(const json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    double lo = j.at("min").get<double>(), hi = j.at("max").get<double>();
    auto n = j.at("n").get<std::size_t>();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * double(i) /
                                           double(std::max<std::size_t>(n - 1, 1)));
    return v;
}

struct Ctx {
    json cfg;
    fs::path out_dir;
    std::string config_hash;

    fs::path out_path(const std::string& key, const std::string& fallback) const {
        std::string name = cfg.value(key, fallback);
        return out_dir / name;
    }
    std::vector<std::string> meta(const ModelParams& p, const std::string& curve_id) const {
        auto m = io::standard_meta(p, curve_id);
        m.insert(m.begin(), "config_hash: " + config_hash);
        return m;
    }
};

// the generic dual curve: transform through a wide smooth-fit boundary table
VolatilityCurve computed_dual_curve(const ModelParams& p, const VolatilityCurve& curve,
                                    double lo, double hi) {
    auto b = put_boundary_table(p, curve, lo, hi, 801, GridSpec{lo / 10.0, hi * 10.0, 3001});
    return dual_put_volatility(p, curve, b);
}

int cmd_fundamental(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    auto kind = ctx.cfg.value("kind", std::string("decreasing")) == "increasing"
                    ? SolutionKind::increasing : SolutionKind::decreasing;
    auto g = grid_from(ctx.cfg.value("grid", json::object()), GridSpec{0.1, 10.0, 2001});
    auto fsol = solve_fundamental(p, curve, kind, g);
    auto t = io::fundamental_csv(fsol);
    t.meta.insert(t.meta.begin(), "config_hash: " + ctx.config_hash);
    io::write_csv(ctx.out_path("output", "fundamental.csv").string(), t);
    return 0;
}

int cmd_boundary(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    Side side = ctx.cfg.value("side", std::string("put")) == "call" ? Side::call : Side::put;
    auto span = ctx.cfg.at("span").get<std::vector<double>>();
    if (span.size() != 2) throw std::invalid_argument("span must be [lo, hi]");
    auto n = ctx.cfg.value("n", std::size_t{801});

    std::pair<double, double> anchor;
    if (ctx.cfg.contains("anchor")) {
        anchor = {ctx.cfg.at("anchor").at("level").get<double>(),
                  ctx.cfg.at("anchor").at("value").get<double>()};
    } else {
        // default anchor level 1 when the span allows, else its midpoint
        double level = (span[0] <= 1.0 && 1.0 <= span[1]) ? 1.0 : std::sqrt(span[0] * span[1]);
        GridSpec g{span[0] / 100.0, span[1] * 100.0, 2001};
        if (side == Side::put) {
            auto fsol = solve_fundamental(p, curve, SolutionKind::decreasing, g);
            anchor = {level, put_boundary_smoothfit(fsol, level)};
        } else {
            auto fsol = solve_fundamental(dual_params(p), curve, SolutionKind::increasing, g);
            anchor = {level, call_boundary_smoothfit(fsol, level)};
        }
    }
    auto up = integrate_boundary_ode(p, curve, side, anchor, {anchor.first, span[1]},
                                     OdeDirection::forward, n / 2 + 1);
    auto down = integrate_boundary_ode(p, curve, side, anchor, {span[0], anchor.first},
                                       OdeDirection::backward, n / 2 + 1);
    Boundary merged = down;
    for (std::size_t i = 1; i < up.grid.size(); ++i) {
        merged.grid.push_back(up.grid[i]);
        merged.values.push_back(up.values[i]);
        merged.derivs.push_back(up.derivs[i]);
    }
    merged.anchor = anchor;
    auto t = io::boundary_csv(merged);
    t.meta.insert(t.meta.begin(), "config_hash: " + ctx.config_hash);
    io::write_csv(ctx.out_path("output", "boundary.csv").string(), t);
    return 0;
}

int cmd_price(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    auto kind = ctx.cfg.value("kind", std::string("put")) == "call" ? OptionKind::call
                                                                    : OptionKind::put;
    auto spots = axis_from(ctx.cfg.at("spots"));
    auto strikes = axis_from(ctx.cfg.at("strikes"));
    double lo = std::min(spots.front(), strikes.front());
    double hi = std::max(spots.back(), strikes.back());
    GridSpec g{0.02 * lo, 50.0 * hi, 2001};

    io::CsvTable t;
    t.meta = ctx.meta(p, curve.id);
    t.meta.push_back(std::string("kind: ") + to_string(kind));
    t.header = "x,y,price,region,boundary";
    t.tag_column = 3;
    auto emit = [&](double x, double y, const PerpetualPrice& q) {
        t.rows.push_back({x, y, q.value, q.boundary_level});
        t.row_tags.push_back(to_string(q.region));
    };
    if (kind == OptionKind::put) {
        PutPricer pr(p, curve, g);
        for (double x : spots)
            for (double y : strikes) emit(x, y, pr.price(x, y));
    } else {
        CallPricer pr(p, curve, g);
        for (double x : spots)
            for (double y : strikes) emit(x, y, pr.price(x, y));
    }
    io::write_csv(ctx.out_path("output", "price.csv").string(), t);

    if (ctx.cfg.contains("sample_output")) {
        if (spots.size() != 1)
            throw std::invalid_argument("sample_output needs exactly one spot");
        auto s = synthesize_sample(p, curve, kind, spots[0], strikes);
        auto st = io::sample_csv(s);
        st.meta.insert(st.meta.begin(), "config_hash: " + ctx.config_hash);
        auto path = ctx.out_path("sample_output", "sample.csv");
        io::write_csv(path.string(), st);
        json meta = {{"kind", to_string(kind)}, {"x0", spots[0]}, {"r", p.r}, {"delta", p.delta}};
        std::ofstream ms(path.string() + ".meta.json");
        ms << meta.dump(2) << "\n";
    }
    return 0;
}

int cmd_dualize(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    auto span = ctx.cfg.value("span", std::vector<double>{0.01, 100.0});
    auto n = ctx.cfg.value("n", std::size_t{401});
    bool call_side = ctx.cfg.value("transform", std::string("put")) == "call";

    VolatilityCurve dual;
    if (call_side) {
        auto b = call_boundary_table(dual_params(p), curve, span[0], span[1], 801,
                                     GridSpec{span[0] / 10.0, span[1] * 10.0, 3001});
        dual = dual_call_volatility(p, curve, b);
    } else {
        dual = computed_dual_curve(p, curve, span[0], span[1]);
    }
    auto t = io::curve_csv(dual, span[0], span[1], n);
    t.meta.insert(t.meta.begin(), "config_hash: " + ctx.config_hash);
    t.meta.insert(t.meta.begin() + 1, "source_curve: " + curve.id);
    io::write_csv(ctx.out_path("output", "dual_curve.csv").string(), t);
    return 0;
}

int cmd_check_duality(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    auto xs = axis_from(ctx.cfg.at("grid").at("x"));
    auto ys = axis_from(ctx.cfg.at("grid").at("y"));
    double lo = std::min(xs.front(), ys.front()), hi = std::max(xs.back(), ys.back());
    VolatilityCurve dual = ctx.cfg.contains("dual_curve")
                               ? io::curve_from_json(ctx.cfg.at("dual_curve"), p)
                               : computed_dual_curve(p, curve, 1e-3 * lo, 1e3 * hi);
    double ptol = 1e-4, btol = 1e-5;
    if (ctx.cfg.contains("tolerances")) {
        ptol = ctx.cfg.at("tolerances").value("price", ptol);
        btol = ctx.cfg.at("tolerances").value("boundary", btol);
    }
    auto rep = verify_duality(p, curve, dual, xs, ys, ptol, btol);
    json j = io::duality_report_json(rep);
    j["config_hash"] = ctx.config_hash;
    std::ofstream os(ctx.out_path("output", "duality_report.json"));
    os << j.dump(2) << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << " max_rel_gap=" << io::fmt(rep.max_rel_gap)
              << " boundary_inverse_gap=" << io::fmt(rep.boundary_inverse_gap) << "\n";
    return rep.pass ? 0 : 2;
}

int cmd_calibrate(const Ctx& ctx) {
    const auto& sc = ctx.cfg.at("sample");
    json meta;
    if (sc.contains("meta_file")) meta = load_config(sc.at("meta_file").get<std::string>());
    else meta = sc.at("meta");
    auto sample = io::sample_from_files(sc.at("csv").get<std::string>(), meta);
    ModelParams p{meta.at("r").get<double>(), meta.at("delta").get<double>()};

    auto res = (sample.kind == OptionKind::put) ? recover_sigma_from_puts(p, sample)
                                                : recover_sigma_from_calls(p, sample);
    auto n = ctx.cfg.value("curve_points", std::size_t{401});
    auto t = io::curve_csv(res.recovered_sigma, res.recovered_span.first,
                           res.recovered_span.second, n);
    t.meta.insert(t.meta.begin(), "config_hash: " + ctx.config_hash);
    io::write_csv(ctx.out_path("output_curve", "recovered_curve.csv").string(), t);

    json j = io::calibration_json(res);
    j["config_hash"] = ctx.config_hash;
    std::ofstream os(ctx.out_path("output_report", "calibration.json"));
    os << j.dump(2) << "\n";
    return 0;
}

int cmd_fd_sweep(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto curve = io::curve_from_json(ctx.cfg.at("curve"), p);
    auto kind = ctx.cfg.value("kind", std::string("put")) == "call" ? OptionKind::call
                                                                    : OptionKind::put;
    double x = ctx.cfg.at("x").get<double>(), y = ctx.cfg.at("y").get<double>();
    auto Ts = ctx.cfg.at("maturities").get<std::vector<double>>();
    bool with_dual = ctx.cfg.value("dual", true);

    auto primal = convergence_sweep(p, curve, kind, x, y, Ts);
    std::vector<SweepPoint> dual;
    if (with_dual) {
        auto dual_curve = computed_dual_curve(p, curve, 1e-3 * std::min(x, y),
                                              1e3 * std::max(x, y));
        auto dk = (kind == OptionKind::put) ? OptionKind::call : OptionKind::put;
        dual = convergence_sweep(dual_params(p), dual_curve, dk, y, x, Ts);
    }
    io::CsvTable t;
    t.meta = ctx.meta(p, curve.id);
    t.meta.push_back(std::string("kind: ") + to_string(kind));
    t.header = with_dual ? "T,price_primal,price_dual,rel_gap" : "T,price_primal";
    for (std::size_t i = 0; i < primal.size(); ++i) {
        if (with_dual) {
            double gap = std::abs(primal[i].price - dual[i].price) /
                         std::max({primal[i].price, dual[i].price, 1e-12});
            t.rows.push_back({Ts[i], primal[i].price, dual[i].price, gap});
        } else {
            t.rows.push_back({Ts[i], primal[i].price});
        }
    }
    io::write_csv(ctx.out_path("output", "fd_sweep.csv").string(), t);
    return 0;
}

int cmd_self_dual_scan(const Ctx& ctx) {
    auto p = model_from(ctx.cfg);
    auto span = ctx.cfg.value("span", std::vector<double>{0.25, 4.0});
    io::CsvTable t;
    t.meta = {"config_hash: " + ctx.config_hash, "r: " + io::fmt(p.r),
              "delta: " + io::fmt(p.delta),
              std::string("paper_regime: ") + (p.r > p.delta ? "true" : "false")};

    std::vector<std::pair<std::string, VolatilityCurve>> curves;
    if (ctx.cfg.contains("curves"))
        for (const auto& spec : ctx.cfg.at("curves")) {
            auto c = io::curve_from_json(spec, p);
            curves.emplace_back(c.id, c);
        }
    if (ctx.cfg.contains("bump_sweep")) {
        const auto& bs = ctx.cfg.at("bump_sweep");
        double s0 = bs.at("sigma0").get<double>();
        for (double eps : bs.at("eps").get<std::vector<double>>())
            curves.emplace_back("bump_eps_" + io::fmt(eps), make_bump_curve(s0, eps));
    }
    if (curves.empty()) throw std::invalid_argument("self-dual-scan: no curves given");
    for (auto& [label, c] : curves) {
        auto res = self_duality_residual(p, c, span[0], span[1]);
        t.rows.push_back({res.value});
        t.row_tags.push_back(label);
    }
    t.header = "residual,label";
    io::write_csv(ctx.out_path("output", "self_dual_scan.csv").string(), t);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perpetual American option pricing, duality and calibration"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::vector<std::string> overrides;

    struct Cmd { const char* name; int (*run)(const Ctx&); };
    const Cmd cmds[] = {
        {"fundamental", cmd_fundamental}, {"boundary", cmd_boundary},
        {"price", cmd_price},             {"dualize", cmd_dualize},
        {"check-duality", cmd_check_duality}, {"calibrate", cmd_calibrate},
        {"fd-sweep", cmd_fd_sweep},       {"self-dual-scan", cmd_self_dual_scan},
    };
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, "");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--override", overrides, "key.path=value config overrides");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Ctx ctx;
        ctx.cfg = load_config(config_path);
        for (const auto& kv : overrides) apply_override(ctx.cfg, kv);
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);
        ctx.config_hash = std::to_string(io::fnv1a(ctx.cfg.dump()));
        for (const auto& c : cmds)
            if (app.get_subcommand(c.name)->parsed()) return c.run(ctx);
        throw std::logic_error("no subcommand dispatched");
    } catch (const std::exception& e) {
        json err = {{"error", {{"type", typeid(e).name()}, {"message", e.what()}}}};
        std::cout << err.dump() << "\n";
        return 1;
    }
}
