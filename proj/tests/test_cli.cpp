#include <catch2/catch.hpp>

#include <qkin/studies.hpp>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>

using namespace qkin;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    auto d = fs::temp_directory_path() / "qkin_cli_test";
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(QKIN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int st = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(st));
    return WEXITSTATUS(st);
}

std::string write_file(const std::string& name, const std::string& text) {
    auto p = (scratch() / name).string();
    std::ofstream(p) << text;
    return p;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream is(path);
    return nlohmann::json::parse(is);
}

// every CSV column except the wall clock
std::vector<std::string> csv_without_wall_time(const std::string& path) {
    std::vector<std::string> out;
    for (const auto& r : read_csv(path)) {
        ReportRow c = r;
        c.wall_time_s = 0.0;
        out.push_back(csv_line(c));
    }
    return out;
}

}  // namespace

TEST_CASE("config parsing and precedence", "[cli]") {
    auto m = parse_config_text("# comment\n epsilons = 0.3, 0.15 \nquadrature.n_samples=400\n\nt2 = 0.7 # trailing\n");
    REQUIRE(m.at("epsilons") == "0.3, 0.15");
    REQUIRE(m.at("t2") == "0.7");
    REQUIRE_THROWS_AS(parse_config_text("no equals sign"), ConfigError);
    REQUIRE_THROWS_AS(parse_config_text("= 3"), ConfigError);

    auto s = build_spec("quadratic-convergence", m, {{"t2", "0.9"}});
    REQUIRE(s.epsilons == std::vector<double>{0.3, 0.15});
    REQUIRE(s.quad.n_samples == 400);
    REQUIRE(s.t2 == 0.9);
    REQUIRE(default_spec("quadratic-convergence").quad.n_samples == 60000);
    REQUIRE(default_spec("necessity-demo").potential.offset == 1.0);
    REQUIRE(default_spec("solve-uu").grid_points == 10);

    REQUIRE_THROWS_AS(build_spec("quadratic-convergence", {{"bogus.key", "1"}}, {}), ConfigError);
    REQUIRE_THROWS_AS(build_spec("no-such-study", {}, {}), ConfigError);
    REQUIRE_THROWS_AS(build_spec("quadratic-convergence", {{"t2", "abc"}}, {}), ConfigError);
}

TEST_CASE("study spec validation", "[cli]") {
    auto bad = [](ConfigMap m, const std::string& study = "quadratic-convergence") {
        return build_spec(study, {}, std::move(m));
    };
    REQUIRE_THROWS_AS(validate(bad({{"epsilons", "0.1,0.2"}})), ConfigError);
    REQUIRE_THROWS_AS(validate(bad({{"epsilons", "1.5"}})), ConfigError);
    REQUIRE_THROWS_AS(validate(bad({{"theta", "0"}})), ConfigError);
    REQUIRE_THROWS_AS(validate(bad({{"quadrature.n_samples", "1001"}, {"quadrature.shards", "8"}})), ConfigError);
    REQUIRE_THROWS_AS(validate(bad({{"t2", "-1"}})), ConfigError);
    REQUIRE_THROWS_AS(validate(bad({{"potential.offset", "0.5"}})), PotentialNonVanishing);
    REQUIRE_THROWS_AS(validate(bad({{"potential.offset", "0"}}, "necessity-demo")), ConfigError);
    for (const auto& n : study_names()) REQUIRE_NOTHROW(validate(default_spec(n)));
}

TEST_CASE("report files", "[cli]") {
    auto prefix = (scratch() / "report").string();
    StudySummary s;
    s.study = "x";
    emit_report({}, s, prefix);
    {
        std::ifstream is(prefix + ".csv");
        std::string line, rest;
        std::getline(is, line);
        REQUIRE(line == kCsvHeader);
        REQUIRE_FALSE(std::getline(is, rest));
    }
    REQUIRE(read_json(prefix + ".json")["pass"] == true);

    ReportRow r;
    r.study = "x";
    r.term = "IV";
    r.epsilon = 0.1;
    r.value = -1.2345678901234567e-9;
    r.std_error = 3e-11;
    r.n_samples = 800;
    r.seed = 99;
    s.criteria.push_back({"c", false, "detail"});
    emit_report({r, r}, s, prefix);
    auto back = read_csv(prefix + ".csv");
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].value == r.value);
    REQUIRE(std::isnan(back[0].limit_value));
    REQUIRE(back[0].seed == 99);
    auto j = read_json(prefix + ".json");
    REQUIRE(j["pass"] == false);
    REQUIRE(j["criteria"][0]["name"] == "c");
    REQUIRE(j["schema"] == kSummarySchema);
}

TEST_CASE("binary: exit codes", "[cli]") {
    auto out = (scratch() / "diag").string();
    REQUIRE(run_cli("") == 2);
    REQUIRE(run_cli("--help") == 0);
    REQUIRE(run_cli("diagnostics --no-such-flag") == 2);
    REQUIRE(run_cli("necessity-demo --potential-offset 0 --out " + out) == 2);
    REQUIRE(run_cli("diagnostics --config " + write_file("bad.cfg", "solver.points = 12\nwhat = 1\n")) == 2);
    REQUIRE(run_cli("diagnostics --config /nonexistent/file.cfg") == 2);
    REQUIRE(run_cli("diagnostics --out " + out) == 0);
    REQUIRE(fs::exists(out + ".csv"));
    REQUIRE(read_json(out + ".json")["pass"] == true);
}

TEST_CASE("binary: exit status follows the summary and reruns are identical", "[cli]") {
    auto a = (scratch() / "run_a").string(), b = (scratch() / "run_b").string();
    auto cfg = write_file("small.cfg", "epsilons = 0.4, 0.2\nquadrature.n_samples = 400\nquadrature.shards = 4\n");
    int ra = run_cli("quadratic-convergence --config " + cfg + " --seed 7 --out " + a);
    int rb = run_cli("quadratic-convergence --config " + cfg + " --seed 7 --out " + b);
    REQUIRE((ra == 0 || ra == 1));
    REQUIRE(ra == rb);
    REQUIRE((ra == 0) == read_json(a + ".json")["pass"].get<bool>());
    REQUIRE(read_json(a + ".json") == read_json(b + ".json"));
    REQUIRE(csv_without_wall_time(a + ".csv") == csv_without_wall_time(b + ".csv"));
    auto rows = read_csv(a + ".csv");
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].n_samples == 400);
    REQUIRE(rows[0].seed != 0);
}
