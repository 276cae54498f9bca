#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shapesense/cli.hpp"
#include "shapesense/dataset.hpp"
#include "shapesense/eval.hpp"
#include "shapesense/nn/model_io.hpp"

using namespace shapesense;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "shapesense");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string frame_line(int fill, const std::string& label) {
    std::string s;
    for (int c = 0; c < kChannels; ++c) s += std::to_string(fill) + ",";
    return s + label + "\n";
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::path(SHAPESENSE_TEST_TMP) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Small dataset shared by the train/eval/crossval cases.
    std::string small_data() {
        const auto p = path("small.csv");
        EXPECT_EQ(invoke({"generate", "--n-kappa", "6", "--n-phi", "6", "--out", p}).code, 0);
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpListsDefaults) {
    const auto r = invoke({"train", "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("[0.01]"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("[500]"), std::string::npos);
    EXPECT_NE(r.out.find("[cosine]"), std::string::npos);
    const auto g = invoke({"generate", "--help"});
    EXPECT_NE(g.out.find("--noise-sigma"), std::string::npos);
    EXPECT_NE(g.out.find("[10000]"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, cli::kUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(invoke({"generate"}).code, cli::kUsage);
    EXPECT_EQ(invoke({"generate", "--out", path("x.csv"), "--n-kappa", "1"}).code, cli::kUsage);
    EXPECT_EQ(invoke({"train", "--data", small_data(), "--out", path("m.json"), "--arch", "m9"}).code, cli::kUsage);
    EXPECT_EQ(invoke({"train", "--data", small_data(), "--out", path("m.json"), "--lr-schedule", "step"}).code,
              cli::kUsage);
}

TEST_F(Cli, IoErrors) {
    EXPECT_EQ(invoke({"generate", "--out", path("missing/dir/d.csv")}).code, cli::kIo);
    EXPECT_EQ(invoke({"train", "--data", path("nope.csv"), "--out", path("m.json")}).code, cli::kIo);
}

TEST_F(Cli, GenerateDefaultGrid) {
    const auto r = invoke({"generate", "--out", path("d.csv"), "--seed", "42"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(path("d.csv"));
    EXPECT_EQ(count_lines(text), 1331u);
    EXPECT_EQ(text.substr(0, 3), "a00");
}

TEST_F(Cli, GenerateMinimalAndDeterministic) {
    ASSERT_EQ(invoke({"generate", "--n-kappa", "2", "--n-phi", "1", "--out", path("a.csv")}).code, 0);
    ASSERT_EQ(invoke({"generate", "--n-kappa", "2", "--n-phi", "1", "--out", path("b.csv")}).code, 0);
    EXPECT_EQ(count_lines(slurp(path("a.csv"))), 3u);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    ASSERT_EQ(invoke({"generate", "--n-kappa", "2", "--n-phi", "1", "--seed", "7", "--out", path("c.csv")}).code, 0);
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, ConfigFileAndOverrides) {
    write_text(path("cfg.json"), "{\"n_kappa\": 3, \"n_phi\": 2, \"noise_sigma\": 0.0, \"out\": \"" +
                                     path("cfg.csv") + "\"}");
    ASSERT_EQ(invoke({"generate", "--config", path("cfg.json")}).code, 0);
    EXPECT_EQ(count_lines(slurp(path("cfg.csv"))), 7u);
    ASSERT_EQ(invoke({"generate", "--config", path("cfg.json"), "--n-phi", "4"}).code, 0);
    EXPECT_EQ(count_lines(slurp(path("cfg.csv"))), 13u);

    write_text(path("bad.json"), "{\"bogus\": 1}");
    EXPECT_EQ(invoke({"generate", "--config", path("bad.json")}).code, cli::kUsage);
    EXPECT_EQ(invoke({"generate", "--config", path("absent.json")}).code, cli::kIo);
}

TEST_F(Cli, IngestValidLines) {
    write_text(path("log.txt"), frame_line(512, "0,0") + frame_line(600, "3,1") + frame_line(700, "5,-2"));
    const auto r = invoke({"ingest", "--in", path("log.txt"), "--out", path("out.csv")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(count_lines(slurp(path("out.csv"))), 1u + 3);
}

TEST_F(Cli, IngestLenientSkips) {
    write_text(path("log.txt"), frame_line(512, "0,0") + "512,512\n" + frame_line(700, "5,-2"));
    const auto r = invoke({"ingest", "--in", path("log.txt"), "--out", path("out.csv")});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("skipped 1 line"), std::string::npos) << r.err;
    EXPECT_EQ(count_lines(slurp(path("out.csv"))), 1u + 2);
}

TEST_F(Cli, IngestStrictAborts) {
    write_text(path("log.txt"), frame_line(512, "0,0") + "512,512\n" + frame_line(700, "5,-2"));
    const auto r = invoke({"ingest", "--in", path("log.txt"), "--out", path("out.csv"), "--strict"});
    EXPECT_EQ(r.code, cli::kData);
    EXPECT_FALSE(fs::exists(path("out.csv")));
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainHistoryAndModel) {
    const auto data = small_data();
    const auto r = invoke({"train", "--data", data, "--arch", "m5", "--epochs", "3", "--out", path("m.json"),
                        "--history", path("h.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(slurp(path("h.csv"))), 1u + 3);
    const auto model = nn::model_from_json(slurp(path("m.json")));
    EXPECT_EQ(model.param_count(), nn::param_count(eval::arch_by_name("m5")));
    EXPECT_TRUE(model.norm.has_value());

    ASSERT_EQ(invoke({"train", "--data", data, "--epochs", "1", "--out", path("m1.json"), "--history",
                   path("h1.csv")}).code, 0);
    EXPECT_EQ(count_lines(slurp(path("h1.csv"))), 2u);
}

TEST_F(Cli, TrainAndEvalAreDeterministic) {
    const auto data = small_data();
    for (const char* tag : {"a", "b"}) {
        const std::string t = tag;
        ASSERT_EQ(invoke({"train", "--data", data, "--epochs", "4", "--out", path("m" + t + ".json"), "--history",
                       path("h" + t + ".csv")}).code, 0);
        ASSERT_EQ(invoke({"eval", "--model", path("m" + t + ".json"), "--data", data, "--out",
                       path("e" + t + ".csv")}).code, 0);
    }
    EXPECT_EQ(slurp(path("ma.json")), slurp(path("mb.json")));
    EXPECT_EQ(slurp(path("ha.csv")), slurp(path("hb.csv")));
    EXPECT_EQ(slurp(path("ea.csv")), slurp(path("eb.csv")));
}

TEST_F(Cli, EvalFirstRows) {
    ASSERT_EQ(invoke({"generate", "--out", path("d.csv")}).code, 0);
    ASSERT_EQ(invoke({"train", "--data", path("d.csv"), "--epochs", "1", "--out", path("m.json")}).code, 0);
    const auto r = invoke({"eval", "--model", path("m.json"), "--data", path("d.csv"), "--split", "all", "--first",
                        "100", "--out", path("e.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(path("e.csv"));
    EXPECT_EQ(count_lines(text), 1u + 100 + 1);
    EXPECT_NE(text.find("# summary: n=1330"), std::string::npos);
}

TEST_F(Cli, EvalRejectsCorruptModel) {
    const auto data = small_data();
    ASSERT_EQ(invoke({"train", "--data", data, "--epochs", "1", "--out", path("m.json")}).code, 0);
    auto text = slurp(path("m.json"));
    text.replace(text.find("\"mu\""), 4, "\"mx\"");
    write_text(path("bad.json"), text);
    const auto r = invoke({"eval", "--model", path("bad.json"), "--data", data, "--out", path("e.csv")});
    EXPECT_EQ(r.code, cli::kData);
    EXPECT_FALSE(fs::exists(path("e.csv")));
}

TEST_F(Cli, CrossvalSmoke) {
    write_text(path("d.csv"), "");
    ASSERT_EQ(invoke({"generate", "--n-kappa", "5", "--n-phi", "4", "--out", path("d.csv")}).code, 0);
    const auto args = std::vector<std::string>{"crossval", "--data", path("d.csv"), "--folds", "2", "--epochs", "2",
                                               "--out", path("cv.csv"), "--curves", path("curves.csv")};
    const auto r = invoke(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("DIFFERS from table"), std::string::npos);
    EXPECT_EQ(count_lines(slurp(path("cv.csv"))), 1u + 10 + 1 + 1 + 5);
    EXPECT_EQ(count_lines(slurp(path("curves.csv"))), 1u + 10 * 2);
    const auto first = slurp(path("cv.csv"));
    ASSERT_EQ(invoke(args).code, 0);
    EXPECT_EQ(slurp(path("cv.csv")), first);
}
