#include "cli.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using json = nlohmann::json;
using ore::testing::fixture;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
    json doc() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = ore::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> base(const std::string& command, const char* model, const std::string& text) {
    return {command, "--model", fixture(model).string(), "--emb", fixture("toy.json").string(), "--text", text};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST(Cli, ExplainBothSolvers) {
    const auto r = run(base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5", "--solver", "both"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    EXPECT_EQ(d["explanation"]["cost"], 1.0);
    EXPECT_EQ(d["explanation"]["indices"], json::array({0}));
    EXPECT_EQ(d["explanation"]["words"], json::array({"good"}));
    EXPECT_EQ(d["explanation"]["markup"], "[good] good");
    EXPECT_TRUE(d["agreement"].get<bool>());
    EXPECT_EQ(d["label"], "positive");
}

TEST(Cli, ExplainStatsAndSolverChoice) {
    for (const std::string solver : {"hs", "msa"}) {
        const auto r = run(base("explain", "sum.json", "good good") +
                           std::vector<std::string>{"--eps", "1.5", "--solver", solver, "--stats"});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto s = r.doc()["explanation"]["stats"];
        EXPECT_EQ(s["solver"], solver);
        EXPECT_GT(s["entailment_queries"].get<int>(), 0);
    }
}

TEST(Cli, ExplainWithExcludeAndInclude) {
    auto r = run(base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5", "--exclude", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["explanation"]["indices"], json::array({1}));
    r = run(base("explain", "firstword.json", "good bad") + std::vector<std::string>{"--eps", "1.5", "--exclude", "0"});
    EXPECT_EQ(r.code, 2);
    r = run(base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "3", "--include", "1", "--solver", "msa"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["explanation"]["indices"], json::array({0, 1}));
}

TEST(Cli, ExplainWithCostFile) {
    const auto path = std::filesystem::temp_directory_path() / "ore_cli_cost.json";
    {
        std::ofstream f(path);
        f << R"({"great": 0.5})";
    }
    const auto r = run(base("explain", "sum.json", "good great") +
                       std::vector<std::string>{"--eps", "1.5", "--cost", path.string(), "--solver", "both"});
    std::filesystem::remove(path);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["explanation"]["indices"], json::array({1}));
    EXPECT_EQ(r.doc()["explanation"]["cost"], 0.5);
    const auto inline_list = run(base("explain", "sum.json", "good great") +
                                 std::vector<std::string>{"--eps", "1.5", "--cost", "[2, 1]"});
    ASSERT_EQ(inline_list.code, 0) << inline_list.err;
    EXPECT_EQ(inline_list.doc()["explanation"]["indices"], json::array({1}));
    EXPECT_EQ(run(base("explain", "sum.json", "good great") + std::vector<std::string>{"--eps", "1.5", "--cost", "[1]"}).code, 4);
}

TEST(Cli, BiasExamples) {
    auto r = run(base("bias", "firstword.json", "good bad") + std::vector<std::string>{"--eps", "1.5", "--protected", "good"});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(r.doc()["biased"].get<bool>());
    r = run(base("bias", "firstword.json", "good bad") + std::vector<std::string>{"--eps", "1.5", "--protected", "bad"});
    EXPECT_EQ(r.code, 0);
    EXPECT_FALSE(r.doc()["biased"].get<bool>());
    EXPECT_EQ(r.doc()["witness"]["indices"], json::array({0}));
}

TEST(Cli, VerifyAllFixed) {
    const auto r = run(base("verify", "sum.json", "good good") + std::vector<std::string>{"--fix", "0,1", "--eps", "9.9"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["verdict"], "robust");
}

TEST(Cli, VerifyCounterexample) {
    const auto r = run(base("verify", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["verdict"], "counterexample");
}

TEST(Cli, EnumerateRepairAttackKnn) {
    auto r = run(base("enumerate", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto list = r.doc()["explanations"];
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0]["indices"], json::array({0}));
    EXPECT_EQ(list[1]["indices"], json::array({1}));

    r = run(base("repair", "sum.json", "good great") + std::vector<std::string>{"--eps", "3", "--seed-explanation", "[0]"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["explanation"]["indices"], json::array({0, 1}));
    EXPECT_EQ(r.doc()["extension"]["indices"], json::array({1}));

    r = run(base("attack", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["attack"]["support"], json::array({0, 1}));

    r = run(std::vector<std::string>{"knn", "--emb", fixture("toy.json").string(), "--word", "good", "--knn", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("great"), std::string::npos);
}

TEST(Cli, KnnSpecOnCnn) {
    const auto r = run(std::vector<std::string>{"explain", "--model", fixture("toy_cnn.json").string(), "--emb",
                                                fixture("lexicon.json").string(), "--text", "good awful nice dull",
                                                "--knn", "4", "--solver", "both"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.doc()["agreement"].get<bool>());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run(base("explain", "sum.json", "good good")).code, 1);  // no spec
    EXPECT_EQ(run(base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "1", "--knn", "2"}).code, 1);
    EXPECT_EQ(run(base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "1", "--solver", "x"}).code, 1);
    EXPECT_EQ(run(base("explain", "sum.json", "zzz good") + std::vector<std::string>{"--eps", "1"}).code, 4);
    EXPECT_EQ(run(base("explain", "sum.json", "good good good") + std::vector<std::string>{"--eps", "1"}).code, 4);
    EXPECT_EQ(run(base("explain", "missing.json", "good good") + std::vector<std::string>{"--eps", "1"}).code, 4);
    const auto r = run(base("verify", "toy_relu.json", "good bad great") +
                       std::vector<std::string>{"--eps", "2", "--max-splits", "0", "--no-attacks"});
    EXPECT_TRUE(r.code == 0 || r.code == 3) << r.err;
}

TEST(Cli, DeterministicOutputIsByteIdentical) {
    const auto args = base("explain", "toy_relu.json", "good bad great") +
                      std::vector<std::string>{"--eps", "0.8", "--solver", "both", "--stats", "--seed", "7", "--deterministic"};
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, BinaryMatchesInProcessRun) {
    const auto args = base("explain", "sum.json", "good good") + std::vector<std::string>{"--eps", "1.5", "--deterministic"};
    std::string cmd = ORE_TOOL_PATH;
    for (const auto& a : args) cmd += " '" + a + "'";
    FILE* pipe = popen(cmd.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    EXPECT_EQ(pclose(pipe), 0);
    EXPECT_EQ(out, run(args).out);
}
