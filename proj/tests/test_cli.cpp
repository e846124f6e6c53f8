#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "swcorr_cli.hpp"

using namespace swcorr;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "swcorr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Grid<double> load(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return io::read_grid_f64(in);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("swcorr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kSampleX = std::string(SWCORR_DATA_DIR) + "/sample_x.swg";
const std::string kSampleY = std::string(SWCORR_DATA_DIR) + "/sample_y.swg";

}  // namespace

TEST_F(Cli, GenRamp) {
  ASSERT_EQ(run({"gen", "--size", "9x9", "--pattern", "ramp", "--out", path("r.swg")}).code, 0);
  const auto g = load(path("r.swg"));
  EXPECT_EQ(g.shape(), (Shape{9, 9}));
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(g.at({i, j}), static_cast<double>(i * 9 + j));
}

TEST_F(Cli, GenIsDeterministic) {
  for (const char* name : {"a.swg", "b.swg"})
    ASSERT_EQ(run({"gen", "--size", "20x30", "--pattern", "clouds", "--seed", "4", "--missing-frac", "0.01",
                   "--out", path(name)})
                  .code,
              0);
  EXPECT_EQ(slurp(path("a.swg")), slurp(path("b.swg")));
  ASSERT_EQ(run({"gen", "--size", "20x30", "--seed", "5", "--out", path("c.swg")}).code, 0);
  EXPECT_NE(slurp(path("a.swg")), slurp(path("c.swg")));
}

TEST_F(Cli, GenMissingFraction) {
  ASSERT_EQ(run({"gen", "--size", "100x100", "--missing-frac", "0.05", "--out", path("m.swg")}).code, 0);
  const auto g = load(path("m.swg"));
  std::size_t missing = 0;
  for (double v : g.values()) missing += v <= -999.0;
  EXPECT_GT(missing, 300u);
  EXPECT_LT(missing, 700u);
}

TEST_F(Cli, GenAnticorrelatedPair) {
  EXPECT_EQ(run({"gen", "--size", "64x64", "--pattern", "anticorr", "--out", path("x.swg")}).code, 2);
  ASSERT_EQ(run({"gen", "--size", "64x64", "--pattern", "anticorr", "--seed", "1", "--out", path("x.swg"),
                 "--out2", path("y.swg")})
                .code,
            0);
  ASSERT_EQ(run({"correlate", "--x", path("x.swg"), "--y", path("y.swg"), "--out", path("c.swg"), "--window", "7"})
                .code,
            0);
  const auto c = load(path("c.swg"));
  for (double v : c.values())
    if (v != -2.0) { EXPECT_LT(v, -0.8); }
}

TEST_F(Cli, GenBadFlags) {
  EXPECT_EQ(run({"gen", "--size", "0x4", "--out", path("z.swg")}).code, 2);
  EXPECT_EQ(run({"gen", "--size", "4x4", "--pattern", "stripes", "--out", path("z.swg")}).code, 2);
  EXPECT_EQ(run({"gen", "--size", "4x4", "--missing-frac", "2", "--out", path("z.swg")}).code, 2);
  EXPECT_EQ(run({"gen", "--size", "4x4"}).code, 2);
}

TEST_F(Cli, CorrelateBundledSample) {
  const auto r = run({"correlate", "--x", kSampleX, "--y", kSampleY, "--out", path("c.swg"), "--window", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("compute"), std::string::npos);
  EXPECT_NE(r.err.find("read"), std::string::npos);
  const auto c = load(path("c.swg"));
  ASSERT_EQ(c.shape(), (Shape{64, 64}));
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j)
      if (i < 3 || j < 3 || i >= 61 || j >= 61) { EXPECT_EQ(c.at({i, j}), -2.0); }

  std::ifstream fx(kSampleX, std::ios::binary), fy(kSampleY, std::ios::binary);
  const auto x = std::get<Grid<float>>(io::read_grid(fx));
  const auto y = std::get<Grid<float>>(io::read_grid(fy));
  const auto ref = naive_correlate_map(x, y, WindowSpec({7, 7}));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ASSERT_EQ(ref[i] == -2.0, c[i] == -2.0);
    EXPECT_NEAR(c[i], ref[i], 1e-3);
  }
}

TEST_F(Cli, CorrelateBackendsAndCsv) {
  std::ofstream(path("x.csv")) << "1,2,3,4\n2,3,1,5\n0,1,4,2\n3,3,1,0\n";
  std::ofstream(path("y.csv")) << "2,2,1,4\n1,0,1,5\n4,1,2,2\n3,1,1,1\n";
  for (const char* b : {"naive", "separable", "cumsum"}) {
    const auto r = run({"correlate", "--x", path("x.csv"), "--y", path("y.csv"), "--out", path("c.csv"),
                        "--window", "3,3", "--backend", b, "--threads", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("c.csv"));
    const auto c = io::read_csv_2d(in);
    EXPECT_EQ(c.at({0, 0}), -2.0);
    EXPECT_NE(c.at({1, 1}), -2.0);
  }
}

TEST_F(Cli, CorrelateErrors) {
  auto r = run({"correlate", "--x", kSampleX, "--y", kSampleY, "--out", path("c.swg"), "--window", "8"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("window lengths must be odd"), std::string::npos);

  ASSERT_EQ(run({"gen", "--size", "32x64", "--out", path("small.swg")}).code, 0);
  r = run({"correlate", "--x", kSampleX, "--y", path("small.swg"), "--out", path("c.swg")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("same size"), std::string::npos);

  EXPECT_EQ(run({"correlate", "--x", kSampleX, "--y", kSampleY, "--out", path("c.swg"), "--window", "99"}).code, 1);
  EXPECT_EQ(run({"correlate", "--x", path("nope.swg"), "--y", kSampleY, "--out", path("c.swg")}).code, 1);
  EXPECT_EQ(run({"correlate", "--x", kSampleX, "--y", kSampleY, "--out", path("c.swg"), "--backend", "gpu"}).code, 2);
  EXPECT_EQ(run({"correlate", "--x", kSampleX, "--y", kSampleY, "--out", path("c.swg"), "--fill", "0.5"}).code, 2);
  EXPECT_EQ(run({"correlate", "--x", kSampleX}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, Compare) {
  ASSERT_EQ(run({"gen", "--size", "64x64", "--seed", "3", "--kind", "f32", "--out", path("x.swg")}).code, 0);
  ASSERT_EQ(run({"gen", "--size", "64x64", "--seed", "4", "--kind", "f32", "--out", path("y.swg")}).code, 0);
  auto r = run({"compare", "--x", path("x.swg"), "--y", path("y.swg"), "--window", "7", "--backends",
                "separable,cumsum"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("backend=separable"), std::string::npos);
  EXPECT_NE(r.out.find("fill_mismatches=0"), std::string::npos);

  r = run({"compare", "--x", path("x.swg"), "--y", path("y.swg"), "--backends", "naive", "--tol", "1e-300"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max_abs_diff=0.000000e+00"), std::string::npos);

  r = run({"compare", "--x", path("x.swg"), "--y", path("y.swg"), "--backends", "separable", "--tol", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, BenchJson) {
  const auto r = run({"bench", "--size", "96x80", "--window", "5", "--backends", "naive,separable,cumsum",
                      "--repeat", "1", "--format", "json", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["shape"], nlohmann::json({96, 80}));
  EXPECT_EQ(j["window"], nlohmann::json({5, 5}));
  EXPECT_EQ(j["threads"], 1);
  EXPECT_EQ(j["repeats"], 1);
  ASSERT_EQ(j["backends"].size(), 3u);
  EXPECT_EQ(j["backends"][1]["name"], "separable");
  EXPECT_GT(j["backends"][1]["seconds_median"].get<double>(), 0.0);
  EXPECT_NEAR(j["predicted_ratio"].get<double>(), cost::predict_ratio(5, 96, 80), 1e-12);
  EXPECT_GT(j["measured_ratio_vs_naive"].get<double>(), 0.0);
}

TEST_F(Cli, BenchTextAndErrors) {
  const auto r = run({"bench", "--size", "40x40", "--window", "3", "--backends", "separable", "--repeat", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("separable"), std::string::npos);
  EXPECT_NE(r.out.find("predicted"), std::string::npos);
  EXPECT_EQ(run({"bench", "--repeat", "0"}).code, 2);
  EXPECT_EQ(run({"bench", "--size", "40x40", "--window", "4"}).code, 2);
  EXPECT_EQ(run({"bench", "--size", "40x40", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"bench", "--size", "10x10", "--window", "11"}).code, 1);
}
