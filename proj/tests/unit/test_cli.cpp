#include "qae/checkpoint.hpp"
#include "qae/image_io.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code{-1};
    std::string out;
};

// stdout and stderr are merged
RunResult run(const std::string& args, const fs::path& cwd = {}) {
    std::string cmd;
    if (!cwd.empty()) cmd = "cd '" + cwd.string() + "' && ";
    cmd += std::string("'") + QAE_CLI_PATH + "' " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("qae_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
};

const std::string kTiny =
    "--channels 2 --epochs 2 --train-patches 40 --val-patches 8 --patch-size 16 "
    "--images 2 --image-size 64 --heldout-images 1 --batch-size 10 --quiet";

} // namespace

TEST_F(Cli, HelpAndVersionExitZero) {
    auto h = run("--help");
    EXPECT_EQ(h.code, 0);
    for (const char* cmd : {"train", "denoise", "verify", "study", "gen-corpus"}) {
        EXPECT_NE(h.out.find(cmd), std::string::npos) << cmd;
    }
    auto v = run("--version");
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find('.'), std::string::npos);
    EXPECT_EQ(run("train --help").code, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("train --no-such-flag 3").code, 2);
    EXPECT_EQ(run("train --channels banana").code, 2);
    auto s = run("study bogus");
    EXPECT_EQ(s.code, 2);
    EXPECT_NE(s.out.find("efficiency"), std::string::npos);
    EXPECT_EQ(run("verify").code, 2);
}

TEST_F(Cli, VerifySubcommandsPass) {
    for (const char* sub : {"count-params", "xor", "reduce-equiv", "grad-check --samples 40"}) {
        auto r = run(std::string("verify ") + sub);
        EXPECT_EQ(r.code, 0) << sub << "\n" << r.out;
        EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    }
    auto p = run("verify polynet --count 5");
    EXPECT_EQ(p.code, 0) << p.out;
    EXPECT_NE(p.out.find("polynet: 5/5 checks passed"), std::string::npos) << p.out;
}

TEST_F(Cli, VerifyPolynetWorkedExample) {
    // 2(x - 1)(x^2 + 1): P(0) = -2, P(1) = 0
    auto r = run("verify polynet --linear 1 --quadratic 0:1 --scale 2");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("P(0) = -2"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("P(1) = 0"), std::string::npos) << r.out;
    EXPECT_EQ(run("verify polynet --quadratic 1").code, 2);
}

TEST_F(Cli, VerifyWritesReport) {
    auto r = run("verify xor --out-dir rep -q", dir_);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "rep" / "report.txt"));
    EXPECT_TRUE(fs::exists(dir_ / "rep" / "manifest.txt"));
}

TEST_F(Cli, MissingCorpusIsUsageErrorWithoutOutput) {
    auto r = run("train --corpus does-not-exist --out-dir out", dir_);
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, ConfigFileForOtherCommandRejected) {
    std::ofstream(dir_ / "c.txt") << "command = denoise\n";
    EXPECT_EQ(run("train --config c.txt --out-dir out", dir_).code, 2);
    std::ofstream(dir_ / "d.txt") << "not_a_key = 1\n";
    EXPECT_EQ(run("train --config d.txt --out-dir out", dir_).code, 2);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, TrainIsDeterministicAndManifestReruns) {
    auto a = run("train " + kTiny + " --out-dir a", dir_);
    ASSERT_EQ(a.code, 0) << a.out;
    for (const char* f : {"model.qae", "history.csv", "metrics.csv", "manifest.txt"}) {
        EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    }
    auto b = run("train " + kTiny + " --out-dir b --threads 1", dir_);
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_EQ(slurp(dir_ / "a" / "model.qae"), slurp(dir_ / "b" / "model.qae"));
    EXPECT_EQ(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "b" / "history.csv"));

    auto c = run("train --config a/manifest.txt --out-dir c -q", dir_);
    ASSERT_EQ(c.code, 0) << c.out;
    EXPECT_EQ(slurp(dir_ / "a" / "model.qae"), slurp(dir_ / "c" / "model.qae"));
    EXPECT_EQ(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "c" / "history.csv"));

    const std::string history = slurp(dir_ / "a" / "history.csv");
    EXPECT_EQ(history.rfind("epoch,train_loss,val_loss\n0,", 0), 0u) << history;
    const auto model = qae::load_checkpoint(dir_ / "a" / "model.qae", qae::Activation::relu());
    EXPECT_EQ(model.config().channels, 2u);

    auto d = run("train " + kTiny + " --out-dir d --seed 2", dir_);
    ASSERT_EQ(d.code, 0) << d.out;
    EXPECT_NE(slurp(dir_ / "a" / "model.qae"), slurp(dir_ / "d" / "model.qae"));
}

TEST_F(Cli, CorpusTrainAndDenoise) {
    auto g = run("gen-corpus --images 2 --image-size 64 --heldout-images 1 --out-dir corp -q", dir_);
    ASSERT_EQ(g.code, 0) << g.out;
    EXPECT_TRUE(fs::exists(dir_ / "corp" / "train" / "noisy_001.qimg"));
    EXPECT_TRUE(fs::exists(dir_ / "corp" / "heldout" / "clean_000.qimg"));
    EXPECT_TRUE(fs::exists(dir_ / "corp" / "heldout" / "noisy_000.png"));

    auto t = run("train --corpus corp " + kTiny + " --out-dir run", dir_);
    ASSERT_EQ(t.code, 0) << t.out;

    auto d = run("denoise --checkpoint run/model.qae --input corp/heldout/noisy_000.qimg "
                 "--reference corp/heldout/clean_000.qimg --out-dir den -q",
                 dir_);
    ASSERT_EQ(d.code, 0) << d.out;
    const auto noisy = qae::read_qimg(dir_ / "corp" / "heldout" / "noisy_000.qimg");
    const auto out = qae::read_qimg(dir_ / "den" / "denoised.qimg");
    EXPECT_EQ(out.shape(), noisy.shape());
    EXPECT_TRUE(fs::exists(dir_ / "den" / "denoised.png"));
    const std::string metrics = slurp(dir_ / "den" / "metrics.csv");
    EXPECT_NE(metrics.find("\ninput,"), std::string::npos) << metrics;
    EXPECT_NE(metrics.find("\ndenoised,"), std::string::npos) << metrics;

    auto bad = run("denoise --checkpoint run/history.csv --input corp/heldout/noisy_000.qimg --out-dir bad", dir_);
    EXPECT_EQ(bad.code, 1) << bad.out;
    EXPECT_NE(bad.out.find("format error"), std::string::npos) << bad.out;
    EXPECT_FALSE(fs::exists(dir_ / "bad"));
}
