#include "neural_atoms/csv.hpp"
#include "neural_atoms/graph.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

// One directory per test, so tests can run as separate processes in parallel.
fs::path kDir;

int run(const std::string& args, std::string* err = nullptr) {
    const fs::path err_file = kDir / "stderr.txt";
    const std::string cmd = std::string(NA_CLI_PATH) + " " + args + " > " + (kDir / "stdout.txt").string() + " 2> " +
                            err_file.string();
    const int status = std::system(cmd.c_str());
    if (err) {
        std::ifstream in(err_file);
        std::ostringstream os;
        os << in.rdbuf();
        *err = os.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& name) { return (kDir / name).string(); }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        kDir = fs::temp_directory_path() / "na_cli_tests" /
               ::testing::UnitTest::GetInstance()->current_test_info()->name();
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
};

}  // namespace

TEST_F(Cli, UnknownSubcommandOrFlagExitsTwoWithUsage) {
    std::string err;
    EXPECT_EQ(run("frobnicate", &err), 2);
    EXPECT_NE(err.find("Usage"), std::string::npos);
    EXPECT_EQ(run("train --no-such-flag 1", &err), 2);
    EXPECT_NE(err.find("--no-such-flag"), std::string::npos);
    EXPECT_EQ(run("", &err), 2);
}

TEST_F(Cli, HelpDocumentsFlags) {
    EXPECT_EQ(run("train --help"), 0);
    std::ifstream in(kDir / "stdout.txt");
    std::ostringstream os;
    os << in.rdbuf();
    for (const char* flag : {"--config", "--dataset", "--out", "--seed", "--backbone", "--augment", "--layers",
                             "--hidden", "--heads", "--k-strategy", "--proportion", "--virtual-nodes", "--epochs",
                             "--lr", "--batch"})
        EXPECT_NE(os.str().find(flag), std::string::npos) << flag;
}

TEST_F(Cli, GenerateTrainEvaluateExport) {
    ASSERT_EQ(run("generate --out " + p("train.jsonl") + " --num-graphs 12 --path-len 6 --colors 3 --seed 1"), 0);
    EXPECT_EQ(na::load_dataset(p("train.jsonl")).size(), 12u);
    {
        std::ofstream c(p("c.json"));
        c << R"({"augment":"neural-atoms","layers":2,"hidden":8,"heads":2,"proportion":0.4,"epochs":2,"batch":4,)"
          << R"("dataset":")" << p("train.jsonl") << R"(","out":")" << p("run") << R"("})";
    }
    ASSERT_EQ(run("train --config " + p("c.json") + " --lr 0.01"), 0);
    EXPECT_TRUE(fs::exists(p("run/metrics.csv")));
    ASSERT_EQ(run("evaluate --checkpoint " + p("run/checkpoint.json")), 0);

    ASSERT_EQ(run("export-alloc --checkpoint " + p("run/checkpoint.json") + " --graph 3 --out " + p("alloc")), 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(p("alloc"))) {
        ++files;
        const na::Tensor a = na::read_matrix_csv(e.path());
        EXPECT_EQ(a.rows(), 6u);  // atoms
        EXPECT_EQ(a.cols(), 2u);  // K = floor(0.4 · 6)
    }
    EXPECT_EQ(files, 2u);  // one per layer
    EXPECT_NE(run("export-alloc --checkpoint " + p("run/checkpoint.json") + " --graph 99"), 0);
}

TEST_F(Cli, BadConfigValueFailsNonZero) {
    std::ofstream(p("bad.json")) << R"({"backbone":"gat"})";
    std::string err;
    EXPECT_EQ(run("train --config " + p("bad.json"), &err), 1);
    EXPECT_NE(err.find("gat"), std::string::npos);
}

TEST_F(Cli, EwaldHeatmap) {
    std::ofstream(p("s.json"))
        << R"({"Z":[1,8,1],"positions":[[0.1,0.1,0.1],[0.3,0.2,0.1],[0.5,0.1,0.4]],"cell_edge":2,"a":2,"real_cutoff":2,"recip_cutoff":3})";
    ASSERT_EQ(run("ewald --system " + p("s.json") + " --out " + p("m.csv") + " --threshold 0.5"), 0);
    const na::Tensor m = na::read_matrix_csv(p("m.csv"));
    EXPECT_EQ(m.rows(), 3u);
    for (double v : m.data()) EXPECT_TRUE(v == 0.0 || v >= 0.5);
}
