#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "tribell/cli.hpp"
#include "tribell/closedform.hpp"

using namespace tribell;
using doctest::Approx;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

/// Data rows of a CSV document (comment and header removed).
std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    const auto ls = lines(csv);
    for (std::size_t i = 2; i < ls.size(); ++i) out.push_back(fields(ls[i]));
    return out;
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / "tribell_cli_test" / name;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(cli::format_number(0.0) == "0");
    CHECK(cli::format_number(-0.0) == "0");
    CHECK(cli::format_number(1.0) == "1");
    CHECK(cli::format_number(1.41421356) == "1.41421");
    CHECK(cli::format_number(0.000123456789) == "0.000123457");
    CHECK(cli::format_number(1234567.0) == "1.23457e+06");
    CHECK(cli::format_number(-2.5) == "-2.5");
}

TEST_CASE("hashing") {
    CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    const auto h = cli::manifest_hash("curves", Json{{"thetas_deg", {0, 45}}});
    CHECK(h.size() == 16);
    CHECK(h == cli::manifest_hash("curves", Json{{"thetas_deg", {0, 45}}}));
    CHECK(h != cli::manifest_hash("curves", Json{{"thetas_deg", {0, 44}}}));
    CHECK(cli::manifest_path_for("out/a.csv") == "out/a.csv.manifest.json");
}

TEST_CASE("curves") {
    const auto r = invoke({"curves", "--thetas", "0,25,45"});
    REQUIRE(r.code == cli::kExitOk);
    const auto ls = lines(r.out);
    CHECK(ls[0].rfind("# tribell curves manifest ", 0) == 0);
    CHECK(ls[1] == "theta_deg,I10_max,I96_max,I99_max,I185_max");
    const auto data = rows(r.out);
    REQUIRE(data.size() == 3);
    for (int c = 1; c <= 4; ++c) CHECK(data[0][c] == "1");
    // The I10 column comes from the exact solver; the quartic fit gives 1.12080.
    CHECK(std::abs(std::stod(data[1][1]) - 1.12080) < 0.001);
    CHECK(data[2][4] == "1.41421");

    const auto grid = invoke({"curves", "--theta-min", "0", "--theta-max", "45", "--theta-step", "0.5"});
    REQUIRE(grid.code == cli::kExitOk);
    const auto all = rows(grid.out);
    CHECK(all.size() == 91);
    for (const auto& row : all) {
        if (std::stod(row[0]) < 29.5) CHECK(std::stod(row[2]) >= std::stod(row[4]));
    }
}

TEST_CASE("pmin") {
    const auto r = invoke({"pmin", "--thetas", "0,14.5,15,45", "--purity", "0.967"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(lines(r.out)[1] == "theta_deg,p_min,active_inequality,p_min_corrected");
    const auto data = rows(r.out);
    CHECK(data[0][1] == "1");
    CHECK(data[1][2] == "I10");
    CHECK(data[2][2] == "I96");
    CHECK(data[3][1] == "0.707107");
    CHECK(data[3][2] == "I185");
    const double p_tilde = std::sqrt((8 * 0.967 - 1) / 7);
    CHECK(std::stod(data[3][3]) == Approx(0.707107 / p_tilde).epsilon(1e-5));
    CHECK(invoke({"pmin", "--purity", "0.1"}).code == cli::kExitDomain);
}

TEST_CASE("table2 theory columns") {
    const auto r = invoke({"table2", "--exact", "--resamples", "4"});
    REQUIRE(r.code == cli::kExitOk);
    const auto header = fields(lines(r.out)[1]);
    CHECK(header[0] == "theta_deg");
    CHECK(header[6] == "theory_I185");
    const auto data = rows(r.out);
    REQUIRE(data.size() == 10);
    CHECK(std::stod(data[0][0]) == 45.0);
    CHECK(std::abs(std::stod(data[0][6]) - 1.387) < 0.001);
    CHECK(std::abs(std::stod(data[0][4]) - 1.252) < 0.001);
    for (const auto& row : data) {
        // Exact counts reproduce the theory value.
        for (int k = 0; k < 4; ++k) CHECK(std::stod(row[7 + 2 * k]) == Approx(std::stod(row[3 + k])).epsilon(1e-5));
        if (row[0] == "21") {
            CHECK(std::stod(row[6]) < 1.0);
            CHECK(std::stod(row[4]) > 1.0);
        }
        if (row[0] == "0") {
            for (int k = 3; k <= 6; ++k) CHECK(std::stod(row[k]) <= 1.0);
        }
    }
    CHECK(invoke({"table2", "--thetas", "10", "--purities", "0.1"}).code == cli::kExitDomain);
    CHECK(invoke({"table2", "--thetas", "10,20", "--purities", "0.9"}).code == cli::kExitDomain);
}

TEST_CASE("experiment") {
    const auto r = invoke({"experiment", "--theta", "45", "--p", "0.98097", "--seed", "5", "--mc-samples", "2"});
    REQUIRE(r.code == cli::kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(std::abs(j["state_report"]["fidelity"].get<double>() - 0.98) < 0.01);
    CHECK(j["reconstruction"]["converged"] == true);
    CHECK(j["optimized"].size() == 4);
    CHECK(j["direct"].size() == 4);

    const auto zero = invoke({"experiment", "--theta", "0", "--p", "1", "--exact", "--mc-samples", "2", "--resamples", "2"});
    REQUIRE(zero.code == cli::kExitOk);
    CHECK(std::abs(Json::parse(zero.out)["state_report"]["n_tri"].get<double>()) < 1e-6);

    const auto t25 = invoke({"experiment", "--theta", "25", "--p", "0.983", "--seed", "6", "--mc-samples", "2"});
    REQUIRE(t25.code == cli::kExitOk);
    const Json d = Json::parse(t25.out)["direct"][1];
    CHECK(d["inequality"] == "I96");
    const double value = d["value"].get<double>();
    const double sigma = d["stderr"].get<double>();
    CHECK(std::abs(value - 0.983 * i96_max_gghz(deg2rad(25))) < 3 * sigma);
    // The printed 1.155 sits about 2.5 sigma above the model mean 1.1532.
    CHECK(std::abs(value - 1.155) < 0.005);

    CHECK(invoke({"experiment", "--theta", "50", "--p", "0.9"}).code == cli::kExitDomain);
    CHECK(invoke({"experiment", "--theta", "10", "--p", "1.5"}).code == cli::kExitDomain);
}

TEST_CASE("optimize and lhv-check") {
    const auto r = invoke({"optimize", "--family", "gghz", "--angle", "45", "--inequality", "I185", "--multistart", "8"});
    REQUIRE(r.code == cli::kExitOk);
    const Json j = Json::parse(r.out);
    REQUIRE(j["reports"].size() == 1);
    CHECK(j["reports"][0]["inequality"] == "I185");
    CHECK(std::abs(j["reports"][0]["value"].get<double>() - std::sqrt(2.0)) < 1e-9);
    CHECK(j["reports"][0]["starts_total"] == 8);

    const auto lhv = invoke({"lhv-check"});
    REQUIRE(lhv.code == cli::kExitOk);
    for (const auto& row : rows(lhv.out)) CHECK(row[1] == "1");
    CHECK(invoke({"lhv-check", "--inequality", "I11"}).code == cli::kExitDomain);
}

TEST_CASE("tomo") {
    const auto r = invoke({"tomo", "--thetas", "30", "--p", "0.95", "--exposure", "1e5", "--seed", "2"});
    REQUIRE(r.code == cli::kExitOk);
    const auto data = rows(r.out);
    REQUIRE(data.size() == 1);
    CHECK(std::abs(std::stod(data[0][0]) - 30.0) < 1e-9);
}

TEST_CASE("outputs, manifests and replay") {
    std::filesystem::remove_all(scratch(""));
    const auto first = scratch("t2.csv").string();
    const auto r = invoke({"table2", "--thetas", "45,21", "--purities", "0.967,0.961", "--exposure", "1e5",
                           "--seed", "9", "--resamples", "20", "--out", first});
    REQUIRE(r.code == cli::kExitOk);
    const auto manifest_path = cli::manifest_path_for(first);
    const Json manifest = read_json_file(manifest_path);
    CHECK(manifest["command"] == "table2");
    CHECK(manifest["seed"] == 9);
    CHECK(manifest["version"] == std::string(cli::kVersion));
    CHECK(manifest["duration_seconds"].get<double>() >= 0.0);
    const std::string text = read_text_file(first);
    CHECK(lines(text)[0] == "# tribell table2 manifest " + manifest["hash"].get<std::string>());
    CHECK(manifest["hash"] == cli::manifest_hash("table2", manifest["params"]));

    const auto second = scratch("replayed.csv").string();
    REQUIRE(invoke({"replay", manifest_path, "--out", second}).code == cli::kExitOk);
    CHECK(read_text_file(second) == text);

    // Without --out the manifest's own output path is rewritten.
    std::filesystem::remove(first);
    REQUIRE(invoke({"replay", manifest_path}).code == cli::kExitOk);
    CHECK(read_text_file(first) == text);
    std::filesystem::remove_all(scratch(""));
}

TEST_CASE("configuration precedence") {
    std::filesystem::remove_all(scratch(""));
    const auto cfg = scratch("cfg.toml").string();
    write_text_file(cfg, "seed = 4\nexposure = 1e4\nresamples = 3\n");
    const auto a = invoke({"table2", "--thetas", "30", "--purities", "0.95", "--config", cfg});
    const auto b = invoke({"table2", "--thetas", "30", "--purities", "0.95", "--seed", "4", "--exposure", "1e4",
                           "--resamples", "3"});
    REQUIRE(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
    const auto c = invoke({"table2", "--thetas", "30", "--purities", "0.95", "--config", cfg, "--seed", "5"});
    CHECK(c.out != a.out);
    CHECK(invoke({"curves", "--config", scratch("missing.toml").string()}).code == cli::kExitIo);
    std::filesystem::remove_all(scratch(""));
}

TEST_CASE("exit codes") {
    CHECK(invoke({}).code == cli::kExitDomain);
    CHECK(invoke({"frobnicate"}).code == cli::kExitDomain);
    CHECK(invoke({"curves", "--thetas", "50"}).code == cli::kExitDomain);
    CHECK(invoke({"optimize", "--state", scratch("none.json").string()}).code == cli::kExitIo);
    CHECK(invoke({"replay", scratch("none.json").string()}).code == cli::kExitIo);
    const auto bad = invoke({"curves", "--thetas", "-1"});
    CHECK(bad.code == cli::kExitDomain);
    CHECK_FALSE(bad.err.empty());
    CHECK(invoke({"--version"}).code == cli::kExitOk);
}
