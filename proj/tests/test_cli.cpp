#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("har_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(HAR_BIN) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>" +
                                (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(Cli, EndToEnd) {
    ASSERT_EQ(run("synth --segments walk:16,stairsUp:16,stance:11 --out " + path("train.csv")), 0);
    ASSERT_EQ(run("train " + path("train.csv") + " --out " + path("model.mlcfg")), 0);
    const auto report = slurp(dir_ / "stdout.txt");
    EXPECT_NE(report.find("correct 43/43"), std::string::npos) << report;
    EXPECT_NE(report.find("kappa 1\n"), std::string::npos) << report;
    ASSERT_EQ(run("synth --seed 5 --out " + path("trial.csv")), 0);
    ASSERT_EQ(run("replay " + path("trial.csv") + " --config " + path("model.mlcfg") + " --out " + path("run")), 0);
    EXPECT_TRUE(fs::exists(dir_ / "run" / "timeline.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "run" / "events.csv"));
    ASSERT_EQ(run("eval " + path("run/windows.csv")), 0);
    EXPECT_NE(slurp(dir_ / "stdout.txt").find("instances 18"), std::string::npos);
    ASSERT_EQ(run("compile " + path("model.mlcfg") + " --out " + path("again.mlcfg")), 0);
    EXPECT_EQ(slurp(dir_ / "model.mlcfg"), slurp(dir_ / "again.mlcfg"));
    ASSERT_EQ(run("plotdata " + path("trial.csv") + " --config " + path("model.mlcfg") + " --out " + path("plot.csv")), 0);
}

TEST_F(Cli, EvalMatrix) {
    ASSERT_EQ(run("eval --matrix \"16,0,0;0,16,0;0,0,11\""), 0);
    const auto out = slurp(dir_ / "stdout.txt");
    EXPECT_NE(out.find("accuracy 1\n"), std::string::npos) << out;
    EXPECT_NE(out.find("kappa 1\n"), std::string::npos) << out;
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("train " + path("missing.csv") + " --out " + path("m.mlcfg")), 2);
    {
        std::ofstream(path("bad.csv")) << "t_s,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps\n0,1,2,x,4,5,6\n";
    }
    EXPECT_EQ(run("plotdata " + path("bad.csv") + " --out -"), 3);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("line 2"), std::string::npos) << slurp(dir_ / "stderr.txt");
    {
        std::ofstream(path("cfg.mlcfg")) << "MLCFG v1\nodr_hz 240\nwindow 240\nfeature 0 MEAN ACC X\n"
                                            "node 0 split 0 0.5 1 2\nnode 1 leaf walk\nnode 2 leaf stance\n"
                                            "encode walk 0\n";
    }
    EXPECT_EQ(run("compile " + path("cfg.mlcfg") + " --out -"), 4);
    ASSERT_EQ(run("synth --segments walk:3 --out " + path("walk.csv")), 0);
    EXPECT_EQ(run("train " + path("walk.csv") + " --out " + path("m.mlcfg")), 5);
    EXPECT_EQ(run("synth --segments run:3 --out " + path("run.csv")), 6);
    EXPECT_EQ(run("eval --matrix \"1,0;0,1\""), 6);
    EXPECT_FALSE(fs::exists(dir_ / "m.mlcfg"));
}

TEST_F(Cli, HelpListsExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_NE(slurp(dir_ / "stdout.txt").find("Exit codes"), std::string::npos);
}

} // namespace
