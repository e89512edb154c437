#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(QRATIO_CLI) + " " + args + " 2>/dev/null";
  Result r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe.release());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qratio_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, Version) {
  const Result r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("qratio"), std::string::npos);
  EXPECT_NE(r.out.find("mt19937_64"), std::string::npos);
}

TEST_F(Cli, Sparsity) {
  std::ofstream(path("v.txt")) << "4\n1 1 0 0\n";
  const Result r = run("sparsity --q 2 --vector " + path("v.txt"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("q,value,entropy\n2,", 0), 0u);
}

TEST_F(Cli, GenerateSolveRoundTrip) {
  ASSERT_EQ(run("gen --kind gaussian --m 20 --N 50 --seed 4 --k 3 --out " + path("A.txt") + " --x-out " +
                path("x.txt") + " --y-out " + path("y.txt"))
                .code,
            0);
  for (const char* method : {"pm", "ccp", "bpdn"}) {
    const Result r = run(std::string("solve --method ") + method + " --q 2 --matrix " + path("A.txt") + " --y " +
                         path("y.txt") + " --out " + path("r.json"));
    ASSERT_EQ(r.code, 0) << method;
    std::ifstream in(path("r.json"));
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["method"], method);
    EXPECT_EQ(j["termination"], "converged");
    EXPECT_EQ(j["solution"].size(), 50u);
    EXPECT_TRUE(j.contains("config"));
  }
  const Result lp = run("solve --method lp-inf --q inf --matrix " + path("A.txt") + " --y " + path("y.txt"));
  EXPECT_EQ(lp.code, 0);
  EXPECT_EQ(nlohmann::json::parse(lp.out)["q"], "inf");
}

TEST_F(Cli, KernelRatioAndCmsv) {
  ASSERT_EQ(run("gen --kind dct --F 5 --m 4 --N 8 --seed 2 --out " + path("D.txt")).code, 0);
  const Result kr = run("kernel-ratio --matrix " + path("D.txt") + " --k 1");
  ASSERT_EQ(kr.code, 0);
  const auto j = nlohmann::json::parse(kr.out);
  EXPECT_TRUE(j["kernel_ratio_exact"].get<bool>());
  const Result cm = run("cmsv --q 2 --s 2 --starts 5 --matrix " + path("D.txt"));
  EXPECT_EQ(cm.code, 0);
  EXPECT_GE(nlohmann::json::parse(cm.out)["cmsv_estimate"].get<double>(), 0.0);
}

TEST_F(Cli, ToyFiles) {
  ASSERT_EQ(run("toy --out " + path("toy")).code, 0);
  EXPECT_TRUE(fs::exists(path("toy/toy_sparsity.csv")));
  EXPECT_TRUE(fs::exists(path("toy/toy_minimizers.csv")));
}

TEST_F(Cli, BenchFromSpecFile) {
  std::ofstream(path("spec.cfg")) << "m = 10\nn = 20\nsparsity = 1\nq = 2\nmethods = ccp\nreplications = 2\n";
  ASSERT_EQ(run("bench --spec " + path("spec.cfg") + " --out " + path("b")).code, 0);
  EXPECT_TRUE(fs::exists(path("b/rows.csv")));
  std::ifstream in(path("b/meta.json"));
  const auto meta = nlohmann::json::parse(in);
  EXPECT_EQ(meta["config"]["m"], "10");
}

TEST_F(Cli, ErrorExitCodes) {
  EXPECT_EQ(run("solve --method nope --matrix a --y b").code, 2);
  EXPECT_EQ(run("sparsity --q 2").code, 2);
  EXPECT_EQ(run("sparsity --q 2 --vector /nonexistent/v.txt").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  // Infeasible system: exit 1.
  std::ofstream(path("A.txt")) << "2 2\n1 0\n1 0\n";
  std::ofstream(path("y.txt")) << "2\n1 2\n";
  EXPECT_EQ(run("solve --method bpdn --q 2 --matrix " + path("A.txt") + " --y " + path("y.txt")).code, 1);
}
