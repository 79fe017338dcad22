#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

std::string g_cli;

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    RunResult r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// drops the volatile timing line so two runs can be compared byte for byte
std::string strip_wall_time(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        if (line.find("wall_time_s") == std::string::npos) {
            out += line;
            out += '\n';
        }
        pos = eol + 1;
    }
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

const char* kQubitZ = R"({"n":1,"d":2,"terms":[{"support":[0],"pauli":"Z"}]})";

}  // namespace

TEST_CASE("gen writes a parseable deterministic instance") {
    auto a = run_cli("gen chain --n 4 --seed 7");
    auto b = run_cli("gen chain --n 4 --seed 7");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    auto parsed = json::parse(a.out);
    CHECK(parsed["n"] == 4);
    CHECK(parsed["d"] == 2);
    auto c = run_cli("gen chain --n 4 --seed 8");
    CHECK(c.out != a.out);
    auto to_file = run_cli("gen chain --n 4 --seed 7 -o cli_gen.json");
    REQUIRE(to_file.code == 0);
    std::ifstream in("cli_gen.json");
    REQUIRE(in.good());
}

TEST_CASE("run records are deterministic and carry the schema") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    const std::string args = "estimate cli_inst.json --beta 0.005 --eps 1e-6";
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(strip_wall_time(a.out) == strip_wall_time(b.out));
    auto rec = json::parse(a.out);
    CHECK(rec["subcommand"] == "estimate");
    CHECK(rec["version"] == "0.1.0");
    const std::string hash = rec["instance_hash"];
    CHECK(hash.rfind("fnv1a64:", 0) == 0);
    CHECK(hash.size() == 8 + 16);
    CHECK(rec.contains("parameters"));
    CHECK(rec.contains("outputs"));
    CHECK(rec.contains("wall_time_s"));
    // numerics travel as full-precision decimal strings
    CHECK(rec["outputs"]["value"][0].is_string());
    CHECK(rec["outputs"]["certified_error"].is_string());
    const double err = std::stod(rec["outputs"]["certified_error"].get<std::string>());
    CHECK(err <= 1e-6);
}

TEST_CASE("estimate at beta zero needs no orders") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("estimate cli_inst.json --beta 0 --eps 1e-8");
    REQUIRE(r.code == 0);
    auto rec = json::parse(r.out);
    CHECK(rec["outputs"]["K"] == 0);
    const double v = std::stod(rec["outputs"]["value"][0].get<std::string>());
    CHECK(v == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("estimate agrees with the oracle within its certificate") {
    run_cli("gen grid2d --n 6 --seed 11 -o cli_grid.json");
    auto bound = json::parse(run_cli("bound cli_grid.json").out);
    const double b0 = std::stod(bound["outputs"]["beta0"].get<std::string>());
    char beta_arg[64];
    std::snprintf(beta_arg, sizeof(beta_arg), "%.17g", 0.5 * b0);
    auto est = json::parse(
        run_cli(std::string("estimate cli_grid.json --eps 1e-7 --beta ") + beta_arg).out);
    auto orc = json::parse(
        run_cli(std::string("oracle cli_grid.json --beta ") + beta_arg).out);
    const double approx = std::stod(est["outputs"]["value"][0].get<std::string>());
    const double exact = std::stod(orc["outputs"]["log_z"].get<std::string>());
    const double err = std::stod(est["outputs"]["certified_error"].get<std::string>());
    CHECK(std::abs(approx - exact) <= err);
}

TEST_CASE("per-order partial sums land in the csv") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("estimate cli_inst.json --beta 0.005 --eps 1e-6 --csv cli_partials.csv");
    REQUIRE(r.code == 0);
    std::ifstream in("cli_partials.csv");
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "K,estimate_re,estimate_im,bound");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    auto rec = json::parse(r.out);
    CHECK(rows == rec["outputs"]["K"].get<int>() + 1);
}

TEST_CASE("exit code 2 marks a missing certificate") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("estimate cli_inst.json --beta 0.5 --eps 1e-6");
    CHECK(r.code == 2);
}

TEST_CASE("exit code 3 marks unparseable instances") {
    write_file("cli_bad.json", "{this is not json");
    auto r = run_cli("estimate cli_bad.json --beta 0.1 --eps 1e-6");
    CHECK(r.code == 3);
    auto missing = run_cli("oracle cli_nonexistent.json --beta 0.1");
    CHECK(missing.code == 3);
}

TEST_CASE("exit code 4 marks invalid arguments") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("corr cli_inst.json --K 4");
    CHECK(r.code == 4);
}

TEST_CASE("exit code 5 marks exceeded caps") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("estimate cli_inst.json --beta 0.005 --eps 1e-12 --k-max 3");
    CHECK(r.code == 5);
}

TEST_CASE("zeros finds the free-qubit Fisher zero") {
    write_file("cli_qubit.json", kQubitZ);
    auto r = run_cli(
        "zeros cli_qubit.json --re-lo -0.5 --re-hi 0.5 --im-lo 0 --im-hi 2 "
        "--grid-re 21 --grid-im 41 --csv cli_grid.csv");
    REQUIRE(r.code == 0);
    auto rec = json::parse(r.out);
    REQUIRE(rec["outputs"]["count"] == 1);
    const auto& z = rec["outputs"]["zeros"][0];
    const double re = std::stod(z["beta"][0].get<std::string>());
    const double im = std::stod(z["beta"][1].get<std::string>());
    CHECK(std::abs(re) < 1e-9);
    CHECK(im == doctest::Approx(1.5707963267948966).epsilon(1e-9));
    std::ifstream in("cli_grid.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "re,im,abs_z");
}

TEST_CASE("cluster reports a small residual inside the expansion radius") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto rec = json::parse(
        run_cli("cluster cli_inst.json --beta 0.01 --x0 0 --max-size 3 --p-max 8").out);
    const double residual = std::stod(rec["outputs"]["residual"].get<std::string>());
    const double tail = std::stod(rec["outputs"]["tail"].get<std::string>());
    CHECK(residual <= tail + 1e-12);
    auto ratios = json::parse(run_cli("cluster cli_inst.json --beta 0.005 --ratios").out);
    CHECK(ratios["outputs"]["all_ok"] == true);
}

TEST_CASE("corr emits coefficients and the cancellation order") {
    run_cli("gen chain --n 4 --seed 7 -o cli_inst.json");
    auto r = run_cli("corr cli_inst.json --site1 0 --site2 3 --K 5 --csv cli_corr.csv");
    REQUIRE(r.code == 0);
    auto rec = json::parse(r.out);
    CHECK(rec["outputs"]["L_predicted"] == 3);
    CHECK(rec["outputs"]["coefficients"].size() == 6);
    std::ifstream in("cli_corr.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,re,im");
}

TEST_CASE("xxz runs from a generated instance and checks the circle") {
    auto r = run_cli("xxz --random 6 --seed 3 --beta 1 --check-circle --z 0.5 --eps 1e-8");
    REQUIRE(r.code == 0);
    auto rec = json::parse(r.out);
    CHECK(rec["outputs"]["ferromagnetic"] == true);
    const double dev = std::stod(rec["outputs"]["max_deviation"].get<std::string>());
    CHECK(dev <= 1e-8);
    const auto& q = rec["outputs"]["q"];
    REQUIRE(q.size() == 7);
    for (int k = 0; k <= 6; ++k) {
        const double lo = std::stod(q[k].get<std::string>());
        const double hi = std::stod(q[6 - k].get<std::string>());
        CHECK(lo == doctest::Approx(hi).epsilon(1e-12));
    }
    CHECK(rec["outputs"]["estimate"].contains("value"));
    auto both = run_cli("xxz somefile.json --random 6 --beta 1");
    CHECK(both.code == 4);
}

TEST_CASE("bound reports the geometry and radii") {
    run_cli("gen chain --n 5 --seed 2 -o cli_inst.json");
    auto rec = json::parse(run_cli("bound cli_inst.json").out);
    CHECK(rec["outputs"]["n"] == 5);
    CHECK(rec["outputs"]["kappa"] == 2);
    const double b0 = std::stod(rec["outputs"]["beta0"].get<std::string>());
    const double radius = std::stod(rec["outputs"]["expansion_radius"].get<std::string>());
    CHECK(b0 > 0.0);
    CHECK(radius > b0);
}

int cli_main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}

int main(int argc, char** argv) { return cli_main(argc, argv); }
