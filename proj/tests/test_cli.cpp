#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "pac/cli.hpp"
#include "pac/serialize.hpp"
#include "toy_models.hpp"

using namespace pac;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult pac_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pac_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::unsetenv("PAC_SEED");
    }
    void TearDown() override {
        ::unsetenv("PAC_SEED");
        fs::remove_all(dir_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string toy_model() const {
        const std::string p = path("toy.json");
        write_text_file(p, model_to_json(toy::linear_pouring_model()).dump());
        return p;
    }

    std::string simulate(std::size_t n, const std::string& name, const std::string& seed = "1") const {
        const std::string p = path(name);
        const CliResult r = pac_run({"simulate", "--n", std::to_string(n), "--seed", seed, "--out", p});
        EXPECT_EQ(r.code, 0) << r.err;
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(pac_run({}).code, kExitUsage);
    EXPECT_EQ(pac_run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(pac_run({"simulate", "--out", path("x.csv")}).code, kExitUsage);
    const CliResult zero = pac_run({"simulate", "--n", "0", "--out", path("x.csv")});
    EXPECT_EQ(zero.code, kExitUsage);
    EXPECT_NE(zero.err.find("--n"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("x.csv")));
    EXPECT_EQ(pac_run({"simulate", "--n", "5", "--seed", "-1", "--out", path("x.csv")}).code, kExitUsage);
    const CliResult help = pac_run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("evaluate"), std::string::npos);
}

TEST_F(Cli, SimulateIsByteReproducible) {
    const std::string a = simulate(50, "a.csv", "9");
    const std::string b = simulate(50, "b.csv", "9");
    const std::string c = simulate(50, "c.csv", "10");
    EXPECT_EQ(read_text_file(a), read_text_file(b));
    EXPECT_NE(read_text_file(a), read_text_file(c));
    EXPECT_EQ(read_trials_file(a).size(), 50u);
    EXPECT_EQ(read_text_file(a).substr(0, 21), "rc,fu,rd,rv,spillage\n");

    const Json m = read_json_file(a + ".manifest.json");
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seeds"]["seed"], 9);
    EXPECT_EQ(m["config"]["n"], "50");
    EXPECT_EQ(m["tool_version"], kToolVersion);
    EXPECT_EQ(m["outputs"][0], a);

    const std::string j = simulate(50, "a.jsonl", "9");
    const auto from_jsonl = read_trials_file(j);
    const auto from_csv = read_trials_file(a);
    ASSERT_EQ(from_jsonl.size(), from_csv.size());
    EXPECT_EQ(from_jsonl[7].rv, from_csv[7].rv);
}

TEST_F(Cli, SeedFromEnvironmentAndFlagPrecedence) {
    ::setenv("PAC_SEED", "9", 1);
    ASSERT_EQ(pac_run({"simulate", "--n", "20", "--out", path("env.csv")}).code, 0);
    const std::string flagged = simulate(20, "flag.csv", "9");
    EXPECT_EQ(read_text_file(path("env.csv")), read_text_file(flagged));
    EXPECT_EQ(read_json_file(path("env.csv.manifest.json"))["seeds"]["seed"], 9);

    const std::string other = simulate(20, "other.csv", "4");  // flag beats the environment
    EXPECT_EQ(read_json_file(other + ".manifest.json")["seeds"]["seed"], 4);

    ::setenv("PAC_SEED", "abc", 1);
    EXPECT_EQ(pac_run({"simulate", "--n", "20", "--out", path("bad.csv")}).code, kExitUsage);
}

TEST_F(Cli, ConfigFileFillsUnsetFlags) {
    write_text_file(path("cfg.json"), R"({"n": 12, "seed": 3})");
    ASSERT_EQ(pac_run({"simulate", "--config", path("cfg.json"), "--n", "7", "--out", path("c.csv")}).code, 0);
    EXPECT_EQ(read_trials_file(path("c.csv")).size(), 7u);
    const Json m = read_json_file(path("c.csv.manifest.json"));
    EXPECT_EQ(m["seeds"]["seed"], 3);
    EXPECT_EQ(m["config"]["config"], path("cfg.json"));

    ASSERT_EQ(pac_run({"simulate", "--config=" + path("cfg.json"), "--out", path("d.csv")}).code, 0);
    EXPECT_EQ(read_trials_file(path("d.csv")).size(), 12u);

    write_text_file(path("list.json"), "[1,2]");
    EXPECT_EQ(pac_run({"simulate", "--config", path("list.json"), "--out", path("e.csv")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"simulate", "--config", path("missing.json"), "--out", path("e.csv")}).code, kExitUsage);
    write_text_file(path("nested.json"), R"({"n": {"a": 1}})");
    EXPECT_EQ(pac_run({"simulate", "--config", path("nested.json"), "--out", path("e.csv")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"simulate", "--config"}).code, kExitUsage);
}

TEST_F(Cli, WorldConfigIsValidated) {
    write_text_file(path("w.json"), R"({"sigma_pack": 0.08})");
    ASSERT_EQ(pac_run({"simulate", "--n", "10", "--world", path("w.json"), "--out", path("w.csv")}).code, 0);
    write_text_file(path("bad.json"), R"({"sigma_pak": 0.08})");
    EXPECT_EQ(pac_run({"simulate", "--n", "10", "--world", path("bad.json"), "--out", path("w.csv")}).code,
              kExitUsage);
    write_text_file(path("neg.json"), R"({"rim_width": -1})");
    EXPECT_EQ(pac_run({"simulate", "--n", "10", "--world", path("neg.json"), "--out", path("w.csv")}).code,
              kExitUsage);
}

TEST_F(Cli, TrainWritesBundleAndRejectsBadData) {
    const std::string data = simulate(300, "train.csv");
    const CliResult r = pac_run({"train", "--data", data, "--epochs", "3", "--hidden", "4", "--seed", "2", "--out",
                           path("model")});
    ASSERT_EQ(r.code, 0) << r.err;
    const TrainedModel model = model_from_json(read_json_file(path("model/model.json")));
    EXPECT_EQ(model.graph().edges(), pouring_graph().edges());
    for (const char* n : {"RC", "FU", "RD", "RV", "S"}) EXPECT_TRUE(fs::exists(path(std::string("model/mechanisms/") + n + ".json")));
    const Json m = read_json_file(path("model/manifest.json"));
    EXPECT_EQ(m["seeds"]["seed"], 2);
    EXPECT_LE(m["results"]["nll"]["S"]["final"].get<double>(), m["results"]["nll"]["S"]["initial"].get<double>());

    write_text_file(path("short.csv"), "rc,fu,rv,spillage\n1,0.5,0.5,0\n");
    const CliResult missing = pac_run({"train", "--data", path("short.csv"), "--out", path("m2")});
    EXPECT_EQ(missing.code, kExitData);
    EXPECT_NE(missing.err.find("rd"), std::string::npos);
    EXPECT_EQ(pac_run({"train", "--data", path("nope.csv"), "--out", path("m2")}).code, kExitData);
    EXPECT_EQ(pac_run({"train", "--data", data, "--hidden", "a", "--out", path("m2")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"train", "--data", data, "--lr", "0", "--out", path("m2")}).code, kExitUsage);

    // A graph file with a cycle is refused before any fitting.
    write_text_file(path("cyclic.json"),
                    R"({"nodes":[{"name":"A","kind":"continuous","support":[0,1]},)"
                    R"({"name":"B","kind":"continuous","support":[0,1]}],"edges":[["A","B"],["B","A"]]})");
    EXPECT_NE(pac_run({"train", "--data", data, "--graph", path("cyclic.json"), "--out", path("m3")}).code, 0);
}

TEST_F(Cli, DiscoverWritesTableAndGraph) {
    const std::string data = simulate(1000, "d.csv");
    const CliResult r = pac_run({"discover", "--data", data, "--boot", "2", "--seed", "5", "--out", path("disc")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    std::istringstream table(read_text_file(path("disc/edge_frequencies.csv")));
    EXPECT_EQ(read_edge_table(table).rows.size(), 10u);
    EXPECT_NO_THROW(graph_from_json(read_json_file(path("disc/graph.json"))));
    EXPECT_EQ(read_text_file(path("disc/tiers.json")), "[[\"RC\",\"FU\",\"RD\"],[\"RV\"],[\"S\"]]\n");

    // Same seed, same bytes.
    ASSERT_EQ(pac_run({"discover", "--data", data, "--boot", "2", "--seed", "5", "--out", path("disc2")}).code, 0);
    EXPECT_EQ(read_text_file(path("disc/edge_frequencies.csv")), read_text_file(path("disc2/edge_frequencies.csv")));

    write_text_file(path("tiers.json"), R"([["RC"],["RC","S"]])");
    EXPECT_EQ(pac_run({"discover", "--data", data, "--tiers", path("tiers.json"), "--boot", "1", "--out", path("x")}).code,
              kExitUsage);
    EXPECT_EQ(pac_run({"discover", "--data", data, "--ci", "chi2", "--out", path("x")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"discover", "--data", data, "--threshold", "1", "--out", path("x")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"discover", "--data", data, "--alpha", "0", "--out", path("x")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"discover", "--data", data, "--boot", "0", "--out", path("x")}).code, kExitUsage);
}

TEST_F(Cli, DoCurveSinglePointMatchesLibrary) {
    const std::string model = toy_model();
    const CliResult r = pac_run({"do-curve", "--model", model, "--sweep", "RD:0.8:0.8:1", "--fix", "FU=0.6", "--samples",
                           "500", "--seed", "4", "--out", path("curve.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto expected =
        interventional_probability(toy::linear_pouring_model(), kS, {{kRD, 0.8}, {kFU, 0.6}}, 500, 4);
    std::ostringstream line;
    write_curve_csv(line, {{0.8, expected}});
    EXPECT_EQ(read_text_file(path("curve.csv")), line.str());

    ASSERT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "rd:0.5:1.5:5", "--samples", "200", "--out",
                       path("c5.csv")})
                  .code,
              0);
    const std::string five = read_text_file(path("c5.csv"));
    EXPECT_EQ(std::count(five.begin(), five.end(), '\n'), 6);

    EXPECT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "RD:0.5:1.5", "--out", path("x.csv")}).code, kExitUsage);
    EXPECT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "QQ:0.5:1.5:3", "--out", path("x.csv")}).code,
              kExitUsage);
    EXPECT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "RD:1.5:0.5:3", "--out", path("x.csv")}).code,
              kExitUsage);
    EXPECT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "RD:0.5:3:3", "--out", path("x.csv")}).code,
              kExitUsage);
    EXPECT_EQ(pac_run({"do-curve", "--model", model, "--sweep", "RD:0.5:1:3", "--fix", "FU", "--out", path("x.csv")})
                  .code,
              kExitUsage);
    EXPECT_EQ(pac_run({"do-curve", "--model", path("none.json"), "--sweep", "RD:0.5:1:3", "--out", path("x.csv")}).code,
              kExitData);
}

TEST_F(Cli, AcWritesRegion) {
    const std::string model = toy_model();
    const std::string trial = "rc=0.70,fu=0.51,rd=0.70,rv=0.729,s=1";
    const CliResult r = pac_run({"ac", "--model", model, "--trial", trial, "--cause", "RD", "--grid-points", "11",
                           "--samples", "300", "--out", path("ac.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const AcRegion region = region_from_json(read_json_file(path("ac.json")));
    EXPECT_EQ(region.grid.size(), 11u);
    EXPECT_EQ(region.path, (Path{kRD, kS}));
    EXPECT_TRUE(fs::exists(path("ac.csv")));
    EXPECT_TRUE(fs::exists(path("ac.json.manifest.json")));

    ASSERT_EQ(pac_run({"ac", "--model", model, "--trial", trial, "--cause", "FU", "--path", "0", "--grid-points", "5",
                       "--samples", "100", "--out", path("fu.json")})
                  .code,
              0);
    EXPECT_EQ(region_from_json(read_json_file(path("fu.json"))).path, (Path{kFU, kS}));

    EXPECT_EQ(pac_run({"ac", "--model", model, "--trial", trial, "--cause", "S", "--out", path("x.json")}).code,
              kExitUsage);
    EXPECT_EQ(pac_run({"ac", "--model", model, "--trial", trial, "--cause", "FU", "--path", "2", "--out",
                       path("x.json")})
                  .code,
              kExitUsage);
    EXPECT_EQ(pac_run({"ac", "--model", model, "--trial", "rc=0.7,rc=0.8", "--cause", "RD", "--out", path("x.json")})
                  .code,
              kExitUsage);
    EXPECT_EQ(pac_run({"ac", "--model", model, "--trial", "rc=9,fu=0.5,rd=1,rv=0.5,s=1", "--cause", "RD", "--out",
                       path("x.json")})
                  .code,
              kExitUsage);
}

TEST_F(Cli, SelectPrintsDecision) {
    const std::string model = toy_model();
    const CliResult r = pac_run({"select", "--model", model, "--trial", "rc=0.70,fu=0.51,rd=0.70,rv=0.729,s=1", "--cause",
                           "rd", "--trial-id", "ex1", "--threshold", "0.2", "--grid-points", "21", "--samples", "500",
                           "--out", path("sel.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = read_json_file(path("sel.json"));
    EXPECT_EQ(j["trial_id"], "ex1");
    EXPECT_EQ(j["variable"], "RD");
    EXPECT_EQ(j["result"], "alternative");
    EXPECT_GT(j["value"].get<double>(), 0.7);
    EXPECT_EQ(Json::parse(r.out), j);

    EXPECT_EQ(pac_run({"select", "--model", model, "--trial", "rc=0.7", "--cause", "RD", "--threshold", "1.5", "--out",
                       path("x.json")})
                  .code,
              kExitUsage);
    EXPECT_EQ(pac_run({"select", "--model", model, "--trial", "rc=0.7", "--cause", "RD", "--criterion", "best",
                       "--out", path("x.json")})
                  .code,
              kExitUsage);
}

TEST_F(Cli, EvaluateWritesReport) {
    const std::string model = toy_model();
    const std::string data = simulate(12, "test.csv", "3");
    const CliResult r = pac_run({"evaluate", "--model", model, "--test-data", data, "--samples", "100", "--grid-points", "11",
                           "--replications", "5", "--seed", "1", "--out", path("eval")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json report = read_json_file(path("eval/report.json"));
    EXPECT_EQ(report["test_trials"], 12);
    const std::size_t spills = report["spillage_trials"].get<std::size_t>();
    ASSERT_EQ(report["variables"].size(), 3u);
    for (const auto& v : report["variables"]) {
        EXPECT_EQ(v["spillage_trials"].get<std::size_t>(), spills);
        EXPECT_EQ(v["alternatives"].get<std::size_t>() + v["no_change"].get<std::size_t>() +
                      v["none"].get<std::size_t>(),
                  spills);
    }
    const std::string sel = read_text_file(path("eval/selections.csv"));
    EXPECT_EQ(static_cast<std::size_t>(std::count(sel.begin(), sel.end(), '\n')), 1 + 3 * spills);
    EXPECT_TRUE(fs::exists(path("eval/replication_histogram.csv")));
    EXPECT_TRUE(fs::exists(path("eval/manifest.json")));

    // Reruns agree byte for byte.
    ASSERT_EQ(pac_run({"evaluate", "--model", model, "--test-data", data, "--samples", "100", "--grid-points", "11",
                       "--replications", "5", "--seed", "1", "--out", path("eval2")})
                  .code,
              0);
    EXPECT_EQ(read_text_file(path("eval/selections.csv")), read_text_file(path("eval2/selections.csv")));

    write_text_file(path("empty.csv"), "rc,fu,rd,rv,spillage\n");
    EXPECT_EQ(pac_run({"evaluate", "--model", model, "--test-data", path("empty.csv"), "--out", path("e")}).code,
              kExitData);
    EXPECT_EQ(pac_run({"evaluate", "--model", model, "--test-data", data, "--variables", "RV", "--out", path("e")}).code,
              kExitUsage);
}
