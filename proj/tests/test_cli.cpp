#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "perpdual/io.hpp"
#include "perpdual/rational.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

fs::path work_dir() {
    auto d = fs::temp_directory_path() / "perpdual_cli_test";
    fs::create_directories(d);
    return d;
}

RunResult run_cli(const std::string& args) {
    auto out = work_dir() / "stdout.txt";
    std::string cmd = std::string(PERPDUAL_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream is(out);
    std::stringstream ss;
    ss << is.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

fs::path write_config(const std::string& name, const json& j) {
    auto p = work_dir() / name;
    std::ofstream os(p);
    os << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const json kFig1Model = {{"r", 0.2}, {"delta", 0.1}};
const json kRational = {{"family", "rational_boundary"},
                        {"params", {{"a", 1.0}, {"b", 0.4}, {"c", 0.1}}}};
}  // namespace

TEST_CASE("zero-rate put surface prices every contract at its strike") {
    json cfg = {{"model", {{"r", 0.0}, {"delta", 0.1}}},
                {"curve", {{"family", "bump"}, {"params", {{"sigma0", 0.3}, {"eps", 0.05}}}}},
                {"kind", "put"},
                {"spots", {{"min", 0.2}, {"max", 2.0}, {"n", 4}}},
                {"strikes", {{"min", 0.3}, {"max", 3.0}, {"n", 5}}},
                {"output", "r0_price.csv"}};
    auto c = write_config("r0.json", cfg);
    auto res = run_cli("price --config " + c.string() + " --out " + work_dir().string());
    REQUIRE(res.exit_code == 0);
    auto d = perpdual::io::read_csv((work_dir() / "r0_price.csv").string());
    auto yi = perpdual::io::column_index(d, "y");
    auto pi = perpdual::io::column_index(d, "price");
    REQUIRE(d.rows.size() == 20);
    for (const auto& r : d.rows) CHECK(r[pi] == r[yi]);
}

TEST_CASE("duality check passes on the rational-family configuration") {
    json cfg = {{"model", kFig1Model},
                {"curve", kRational},
                {"grid", {{"x", {{"min", 0.1}, {"max", 2.0}, {"n", 8}}},
                          {"y", {{"min", 0.1}, {"max", 2.0}, {"n", 8}}}}},
                {"output", "duality.json"}};
    auto c = write_config("duality.json.cfg", cfg);
    auto res = run_cli("check-duality --config " + c.string() + " --out " + work_dir().string());
    REQUIRE(res.exit_code == 0);
    CHECK(res.stdout_text.find("PASS") != std::string::npos);
    auto rep = json::parse(slurp(work_dir() / "duality.json"));
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("max_rel_gap").get<double>() <= 1e-4);
    CHECK(rep.at("boundary_inverse_gap").get<double>() <= 1e-5);
}

TEST_CASE("identical configurations produce byte-identical outputs") {
    json cfg = {{"model", kFig1Model},
                {"curve", kRational},
                {"kind", "decreasing"},
                {"grid", {{"x_min", 0.1}, {"x_max", 10.0}, {"n", 501}}},
                {"output", "fund_a.csv"}};
    auto c = write_config("fund.json", cfg);
    REQUIRE(run_cli("fundamental --config " + c.string() + " --out " + work_dir().string())
                .exit_code == 0);
    auto first = slurp(work_dir() / "fund_a.csv");
    REQUIRE(run_cli("fundamental --config " + c.string() + " --out " + work_dir().string())
                .exit_code == 0);
    CHECK(first == slurp(work_dir() / "fund_a.csv"));
    CHECK(first.find("config_hash") != std::string::npos);
}

TEST_CASE("calibration round trip through the file interfaces") {
    json price_cfg = {{"model", kFig1Model},
                      {"curve", kRational},
                      {"kind", "put"},
                      {"spots", json::array({0.5})},
                      {"strikes", {{"min", 0.01}, {"max", 5.0}, {"n", 400}}},
                      {"output", "surface.csv"},
                      {"sample_output", "puts.csv"}};
    auto pc = write_config("gen.json", price_cfg);
    REQUIRE(run_cli("price --config " + pc.string() + " --out " + work_dir().string())
                .exit_code == 0);

    json cal_cfg = {{"sample", {{"csv", (work_dir() / "puts.csv").string()},
                                {"meta_file", (work_dir() / "puts.csv.meta.json").string()}}},
                    {"output_curve", "recovered.csv"},
                    {"output_report", "calibration.json"}};
    auto cc = write_config("cal.json", cal_cfg);
    auto res = run_cli("calibrate --config " + cc.string() + " --out " + work_dir().string());
    REQUIRE(res.exit_code == 0);

    perpdual::ModelParams p{0.2, 0.1};
    perpdual::RationalBoundaryParams abc{1.0, 0.4, 0.1};
    auto d = perpdual::io::read_csv((work_dir() / "recovered.csv").string());
    auto xi = perpdual::io::column_index(d, "x");
    auto si = perpdual::io::column_index(d, "sigma");
    double worst = 0.0;
    for (const auto& r : d.rows) {
        double want = perpdual::rational::sigma(p, abc, r[xi]);
        worst = std::max(worst, std::abs(r[si] - want) / want);
    }
    CHECK(worst <= 1e-3);
    auto rep = json::parse(slurp(work_dir() / "calibration.json"));
    CHECK(rep.at("threshold").get<double>() == Catch::Approx(2.5).epsilon(1e-3));
}

TEST_CASE("dualize emits the closed-form dual curve") {
    json cfg = {{"model", kFig1Model},
                {"curve", kRational},
                {"transform", "put"},
                {"span", {0.05, 5.0}},
                {"n", 101},
                {"output", "dual.csv"}};
    auto c = write_config("dualize.json", cfg);
    REQUIRE(run_cli("dualize --config " + c.string() + " --out " + work_dir().string())
                .exit_code == 0);
    perpdual::ModelParams p{0.2, 0.1};
    perpdual::RationalBoundaryParams abc{1.0, 0.4, 0.1};
    auto d = perpdual::io::read_csv((work_dir() / "dual.csv").string());
    auto xi = perpdual::io::column_index(d, "x");
    auto si = perpdual::io::column_index(d, "sigma");
    for (const auto& r : d.rows)
        CHECK(r[si] == Catch::Approx(perpdual::rational::sigma_dual(p, abc, r[xi])).epsilon(1e-5));
}

TEST_CASE("self-dual scan separates flat from bumped curves") {
    json cfg = {{"model", kFig1Model},
                {"curves", json::array({json{{"family", "constant"}, {"params", {{"sigma", 0.3}}}}})},
                {"bump_sweep", {{"sigma0", 0.3}, {"eps", {0.02, 0.04}}}},
                {"span", {0.25, 4.0}},
                {"output", "scan.csv"}};
    auto c = write_config("scan.json", cfg);
    REQUIRE(run_cli("self-dual-scan --config " + c.string() + " --out " + work_dir().string())
                .exit_code == 0);
    auto d = perpdual::io::read_csv((work_dir() / "scan.csv").string());
    REQUIRE(d.rows.size() == 3);
    CHECK(d.rows[0][0] <= 1e-8);   // constant
    CHECK(d.rows[1][0] > 1e-3);    // eps 0.02
    CHECK(d.rows[2][0] > d.rows[1][0]);
}

TEST_CASE("failures exit nonzero with a machine-readable error") {
    json cfg = {{"model", kFig1Model},
                {"curve", {{"family", "rational_boundary"},
                           {"params", {{"a", 1.0}, {"b", 1.5}, {"c", 0.1}}}}},
                {"kind", "decreasing"},
                {"output", "x.csv"}};
    auto c = write_config("bad.json", cfg);
    auto res = run_cli("fundamental --config " + c.string() + " --out " + work_dir().string());
    CHECK(res.exit_code == 1);
    auto err = json::parse(res.stdout_text);
    CHECK(err.contains("error"));
    CHECK(err["error"]["message"].get<std::string>().find("admissibility") != std::string::npos);
}

TEST_CASE("overrides reach into the configuration") {
    json cfg = {{"model", kFig1Model},
                {"curve", {{"family", "constant"}, {"params", {{"sigma", 0.3}}}}},
                {"kind", "put"},
                {"spots", json::array({1.0})},
                {"strikes", json::array({1.0})},
                {"output", "one.csv"}};
    auto c = write_config("ovr.json", cfg);
    auto res = run_cli("price --config " + c.string() + " --out " + work_dir().string() +
                       " --override model.r=0.0");
    REQUIRE(res.exit_code == 0);
    auto d = perpdual::io::read_csv((work_dir() / "one.csv").string());
    CHECK(d.rows.at(0).at(perpdual::io::column_index(d, "price")) == 1.0);
}
