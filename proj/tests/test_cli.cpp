#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wclass/cli.hpp"

using namespace wclass;
using namespace wclass::cli;

namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "wclass_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "wclass-sim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("argument parsing") {
    const auto spec = parse_args({"w-state", "--n", "3", "--eta", "0", "--pe", "0.01", "--trials", "1000", "--seed", "42"});
    CHECK(spec.command == Command::w_state);
    CHECK(spec.config.n == 3);
    CHECK(spec.config.p_e == 0.01);
    CHECK(spec.trials == 1000);
    CHECK(spec.config.seed == 42);
    CHECK_FALSE(spec.seed_auto);

    CHECK_THROWS_AS(parse_args({"w-state", "--n", "2", "--seed", "1"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--n", "3"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "1", "--bogus", "3"}), UsageError);
    CHECK_THROWS_AS(parse_args({"dance", "--seed", "1"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "-4"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "1", "--eta", "1.5"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "1", "--format", "csv-summary"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "1", "--trials", "0"}), UsageError);
    CHECK_THROWS_AS(parse_args({"teleport", "--seed", "1", "--alpha-re", "1", "--beta-re", "1"}), UsageError);
    CHECK_THROWS_AS(parse_args({"w-state", "--seed", "1", "--phases", "0,x,1"}), UsageError);

    const auto sweep = parse_args({"scaling-sweep", "--n-min", "3", "--n-max", "5", "--eta", "0.3", "--pe", "0.01",
                                   "--trials", "100000", "--seed", "7"});
    CHECK(sweep.command == Command::scaling_sweep);
    CHECK(sweep.n_min == 3);
    CHECK(sweep.n_max == 5);
    CHECK(sweep.config.eta == 0.3);
    CHECK(sweep.trials == 100000);

    const auto tele = parse_args({"teleport", "--alpha-re", "0.6", "--beta-im", "0.8", "--seed", "3"});
    CHECK(tele.alpha == Complex(0.6, 0.0));
    CHECK(tele.beta == Complex(0.0, 0.8));
    CHECK(tele.config.n == 3);

    const auto autoseed = parse_args({"epr", "--seed", "auto"});
    CHECK(autoseed.seed_auto);

    const auto ph = parse_args({"w-state", "--seed", "1", "--phases", "0,0.5,1.5", "--no-double-pairs", "--na", "1000"});
    CHECK(ph.config.phases == std::vector<double>{0.0, 0.5, 1.5});
    CHECK_FALSE(ph.config.double_pairs);
    CHECK(ph.config.n_a == std::optional<std::uint64_t>(1000));
}

TEST_CASE("config file values yield to flags") {
    const auto path = temp_path("config.json");
    {
        std::ofstream f(path);
        f << R"({"n": 4, "eta": 0.2, "p_e": 0.02, "trials": 12, "seed": 9})";
    }
    const auto spec = parse_args({"w-state", "--config", path.string(), "--eta", "0.1", "--seed", "9"});
    CHECK(spec.config.n == 4);
    CHECK(spec.config.p_e == 0.02);
    CHECK(spec.config.eta == 0.1);
    CHECK(spec.trials == 12);

    {
        std::ofstream f(path);
        f << R"({"n": 4, "colour": "blue"})";
    }
    CHECK_THROWS_AS(parse_args({"w-state", "--config", path.string(), "--seed", "1"}), UsageError);
}

TEST_CASE("report round trip and determinism") {
    const auto a = temp_path("a.json");
    const auto b = temp_path("b.json");
    const auto base = std::vector<std::string>{"w-state", "--n", "3", "--eta", "0.2", "--pe", "0.01", "--trials", "300",
                                               "--seed", "42"};
    auto args_a = base;
    args_a.insert(args_a.end(), {"--output", a.string(), "--workers", "1"});
    auto args_b = base;
    args_b.insert(args_b.end(), {"--output", b.string(), "--workers", "3"});
    REQUIRE(invoke(args_a) == kOk);
    REQUIRE(invoke(args_b) == kOk);
    const std::string text = slurp(a);
    CHECK(text == slurp(b));

    const auto j = report::Json::parse(text);
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("command") == "w-state");
    CHECK(j.at("config").at("seed") == 42);
    CHECK(j.at("results").at("trials") == 300);
    CHECK(j.at("results").contains("p_c_hat"));
    CHECK(j.at("timing").contains("total_attempts"));

    // The echoed config reproduces the report.
    const auto echo = temp_path("echo.json");
    const auto again = temp_path("again.json");
    {
        std::ofstream f(echo);
        f << j.at("config").dump();
    }
    REQUIRE(invoke({"w-state", "--config", echo.string(), "--seed", "42", "--output", again.string()}) == kOk);
    CHECK(slurp(again) == text);
}

TEST_CASE("commands produce their reports") {
    std::string out, err;
    REQUIRE(invoke({"epr", "--pe", "0.005", "--eta", "0", "--trials", "200", "--seed", "1"}, &out, &err) == kOk);
    const auto epr = report::Json::parse(out);
    CHECK(epr.at("results").at("fidelity_mean").at("value").get<double>() >= 0.99);
    CHECK(epr.at("config").at("n") == 2);

    REQUIRE(invoke({"teleport", "--alpha-re", "0.6", "--beta-re", "0.8", "--pe", "0.05", "--no-double-pairs",
                    "--trials", "300", "--seed", "2"},
                   &out, &err) == kOk);
    const auto tele = report::Json::parse(out);
    const double carol = tele.at("results").at("carol_holds").at("value").get<double>();
    const double se = tele.at("results").at("carol_holds").at("std_error").get<double>();
    CHECK(std::abs(carol - 0.5) < 4.0 * se);
    CHECK(tele.at("config").at("alpha") == report::Json::array({0.6, 0.0}));

    REQUIRE(invoke({"scaling-sweep", "--n-min", "3", "--n-max", "4", "--trials", "50", "--seed", "7", "--format",
                    "csv-summary"},
                   &out, &err) == kOk);
    std::istringstream csv(out);
    std::string header, row1, row2;
    std::getline(csv, header);
    std::getline(csv, row1);
    std::getline(csv, row2);
    CHECK(header == "n,p_c_hat,mean_time_s,predicted_time_s,ratio_to_prev,c_n_hat,fidelity_mean");
    CHECK(row1.rfind("3,", 0) == 0);
    CHECK(row2.rfind("4,", 0) == 0);

    REQUIRE(invoke({"epr", "--trials", "5", "--seed", "auto"}, &out, &err) == kOk);
    CHECK(err.rfind("seed ", 0) == 0);
    const auto seeded = report::Json::parse(out);
    CHECK(err.find(std::to_string(seeded.at("config").at("seed").get<std::uint64_t>())) != std::string::npos);
}

TEST_CASE("exit codes") {
    const auto none = temp_path("never.json");
    fs::remove(none);
    CHECK(invoke({"w-state", "--n", "2", "--seed", "1", "--output", none.string()}) == kUsage);
    CHECK_FALSE(fs::exists(none));

    std::string err;
    CHECK(invoke({"epr", "--trials", "2", "--seed", "1", "--output", "/nonexistent-dir/x/report.json"}, nullptr, &err) ==
          kIo);
    CHECK(err.find("cannot write") != std::string::npos);

    CHECK(invoke({"w-state", "--pe", "0.01", "--max-attempts", "1", "--trials", "3", "--seed", "1"}) ==
          kInsufficientData);

    std::string out;
    CHECK(invoke({"--help"}, &out) == kOk);
    CHECK(out.find("--seed") != std::string::npos);
}
