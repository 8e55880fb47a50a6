#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridsim/cli.hpp"
#include "gridsim/errors.hpp"

using namespace gridsim;
using gridsim::cli::ConfigMap;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string strip_timestamps(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("started_at") != std::string::npos) continue;
        if (line.find("finished_at") != std::string::npos) continue;
        out << line << '\n';
    }
    return out.str();
}

} // namespace

TEST_CASE("config text parsing") {
    const ConfigMap cfg = cli::parse_config_text(
        "# experiment setup\n"
        "experiment = variance\n"
        "n_list = 4,8\n"
        "f_act = 0.5   # trailing comment\n"
        "\n"
        "trials = 1000\n");
    CHECK(cfg.at("experiment") == "variance");
    CHECK(cfg.at("n_list") == "4,8");
    CHECK(cfg.at("f_act") == "0.5");
    CHECK(cfg.at("trials") == "1000");

    CHECK_THROWS_AS(cli::parse_config_text("novalue\n"), InvalidParameter);
}

TEST_CASE("unknown keys are rejected by name") {
    ConfigMap cfg{{"L", "4"}, {"atoms", "1,1"}, {"bogus_key", "3"}};
    try {
        cli::execute("bounds", cfg);
        FAIL("expected InvalidParameter");
    } catch (const InvalidParameter& e) {
        CHECK(e.field() == "bogus_key");
    }
}

TEST_CASE("validation errors carry the offending field") {
    ConfigMap cfg{{"L", "128"}, {"delta", "1.5"}, {"trials", "10"}};
    try {
        cli::execute("percolation", cfg);
        FAIL("expected InvalidParameter");
    } catch (const InvalidParameter& e) {
        CHECK(e.field() == "delta");
    }

    ConfigMap missing{{"delta", "0.1"}, {"trials", "10"}};
    try {
        cli::execute("percolation", missing);
        FAIL("expected InvalidParameter");
    } catch (const InvalidParameter& e) {
        CHECK(e.field() == "L");
    }
}

TEST_CASE("bounds experiment reproduces the three-atom example") {
    ConfigMap cfg{{"L", "4"}, {"atoms", "3,3;2,3;3,1"}, {"sink", "0,0"},
                  {"t_edge", "1"}, {"t_cycle", "1e-9"}};
    const auto out = cli::execute("bounds", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["w1"] == doctest::Approx(5.0));
    CHECK(out.summary["r_mu"] == 6);
    const auto body = nlohmann::json::parse(out.artifact);
    CHECK(body["w1"] == doctest::Approx(5.0));
    CHECK(body["wallclock_lower_seconds"] == doctest::Approx(6e-9));
}

TEST_CASE("bounds accepts explicit masses and csv format") {
    ConfigMap cfg{{"L", "4"}, {"atoms", "3,3:0.5;1,0:0.5"}, {"format", "csv"}};
    const auto out = cli::execute("bounds", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.artifact_extension == "csv");
    CHECK(out.artifact.rfind("w1,r_mu,steiner,wallclock_lower_seconds", 0) == 0);

    ConfigMap bad{{"L", "4"}, {"atoms", "3,3:0.5;1,0:0.6"}};
    CHECK_THROWS_AS(cli::execute("bounds", bad), InvalidParameter);
}

TEST_CASE("table experiments honor json-lines format") {
    ConfigMap cfg{{"n_list", "4,8"}, {"f_act", "0.5"}, {"trials", "500"},
                  {"format", "json-lines"}};
    const auto out = cli::execute("variance", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.artifact_extension == "jsonl");
    std::istringstream lines(out.artifact);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        const auto row = nlohmann::json::parse(line);
        CHECK(row.contains("var_exact"));
        CHECK(row["n"].is_number_integer());
        ++rows;
    }
    CHECK(rows == 2);

    ConfigMap bad = cfg;
    bad["format"] = "yaml";
    CHECK_THROWS_AS(cli::execute("variance", bad), InvalidParameter);
}

TEST_CASE("variance experiment row matches the closed form") {
    ConfigMap cfg{{"n_list", "4"}, {"f_act", "0.5"}, {"trials", "20000"}};
    const auto out = cli::execute("variance", cfg);
    CHECK(out.exit_code == 0);
    // CSV row carries var_exact = 14.
    CHECK(out.artifact.find(",14,") != std::string::npos);
}

TEST_CASE("simulate flags depth or work violations as statistical failures") {
    ConfigMap cfg{{"L", "6"}, {"atoms", "5,5;3,2;1,4"}, {"contention", "non_congesting"}};
    const auto out = cli::execute("simulate", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["work_equals_w1"] == true);
    CHECK(out.summary["depth_slack_cycles"] == 0);

    ConfigMap capped{{"L", "6"}, {"atoms", "5,5;3,2;1,4"}, {"contention", "capacity_one"}};
    const auto cap_out = cli::execute("simulate", capped);
    CHECK(cap_out.exit_code == 0);
}

TEST_CASE("treefold experiment reports laws and used edges") {
    ConfigMap cfg{{"L", "3"}, {"origin", "1,1"}, {"monoid", "i64-add"}, {"values", "seq"}};
    const auto out = cli::execute("treefold", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["folded"] == 45);
    CHECK(out.summary["depth"] == 2);
    CHECK(out.summary["laws"]["status"] == "passed");

    ConfigMap bad{{"L", "3"}, {"monoid", "i64-sub"}};
    const auto fail = cli::execute("treefold", bad);
    CHECK(fail.exit_code == 2);
    CHECK(fail.summary["laws"]["status"] == "failed");
}

TEST_CASE("latency ratio experiment emits exact flags") {
    ConfigMap cfg{{"mode", "ratio"}, {"c1", "1"}, {"c2", "1"}, {"ab_sum", "2"},
                  {"P", "1"}, {"c_w", "1"}, {"t_edge", "1"}, {"x_list", "1,2,4,8"}};
    const auto out = cli::execute("latency", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["monotone"] == true);
    CHECK(out.summary["limit"] == doctest::Approx(2.0));
}

TEST_CASE("latency divergence experiment converges") {
    ConfigMap cfg{{"mode", "divergence"}, {"N_list", "16,64,256,1024,4096,16384,65536"},
                  {"f_act", "0.25"}, {"P", "64"}, {"c1", "0"}};
    const auto out = cli::execute("latency", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["diverges"] == true);
    CHECK(out.summary["fit_r2"].get<double>() > 0.99);
}

TEST_CASE("smallworld experiment runs both modes") {
    ConfigMap sw{{"L_list", "8,12"}, {"k", "1"}, {"pairs", "500"}};
    const auto out = cli::execute("smallworld", sw);
    CHECK(out.exit_code == 0);

    ConfigMap control{{"L_list", "8,12"}, {"k", "0"}, {"pairs", "500"}};
    const auto ctrl = cli::execute("smallworld", control);
    CHECK(ctrl.exit_code == 0);

    ConfigMap thin{{"L_list", "8"}, {"k", "1"}, {"pairs", "100"}};
    CHECK_THROWS_AS(cli::execute("smallworld", thin), InvalidParameter);
}

TEST_CASE("artifacts are byte-identical across reruns, manifest modulo timestamps") {
    const ConfigMap cfg{{"n_list", "4,8"}, {"f_act", "0.3"}, {"trials", "2000"},
                        {"seed", "77"}};
    const std::string out_a = "/tmp/gridsim_test_repro_a";
    const std::string out_b = "/tmp/gridsim_test_repro_b";
    CHECK(cli::run_to_files("variance", cfg, out_a) == 0);
    CHECK(cli::run_to_files("variance", cfg, out_b) == 0);
    CHECK(slurp(out_a + ".csv") == slurp(out_b + ".csv"));
    CHECK(strip_timestamps(slurp(out_a + ".csv.manifest.json")) ==
          strip_timestamps(slurp(out_b + ".csv.manifest.json")));
    std::remove((out_a + ".csv").c_str());
    std::remove((out_a + ".csv.manifest.json").c_str());
    std::remove((out_b + ".csv").c_str());
    std::remove((out_b + ".csv.manifest.json").c_str());
}

TEST_CASE("worker count does not change artifacts") {
    ConfigMap one{{"n_list", "4,8"}, {"f_act", "0.3"}, {"trials", "3000"},
                  {"seed", "5"}, {"workers", "1"}};
    ConfigMap four = one;
    four["workers"] = "4";
    const auto a = cli::execute("variance", one);
    const auto b = cli::execute("variance", four);
    CHECK(a.artifact == b.artifact);
}

TEST_CASE("run_to_files maps validation errors to exit code 1") {
    const ConfigMap bad{{"L", "32"}, {"delta", "1.5"}, {"trials", "10"}};
    CHECK(cli::run_to_files("percolation", bad, "/tmp/gridsim_test_badrun") == 1);
    const ConfigMap unknown{{"L", "4"}, {"atoms", "1,1"}, {"mystery", "1"}};
    CHECK(cli::run_to_files("bounds", unknown, "/tmp/gridsim_test_badrun") == 1);
}

TEST_CASE("percolation experiment emits buckets and summary") {
    ConfigMap cfg{{"L", "48"}, {"delta", "0.08"}, {"trials", "800"}, {"seed", "3"}};
    const auto out = cli::execute("percolation", cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.artifact.rfind("k,count,mean_detour,stderr\n", 0) == 0);
    CHECK_FALSE(out.secondary.empty());
    const auto summary = nlohmann::json::parse(out.secondary);
    CHECK(summary.contains("c_delta_hat"));
    CHECK(summary.contains("exclusion_rate"));
}
