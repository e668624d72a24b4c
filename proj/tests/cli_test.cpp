/* Copyright 2026 The previous-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pkit/cli.hpp"
#include "test_util.hpp"

namespace pkit {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return detail::read_file(p.string()); }

// Small trained workspace shared by the tests below.
class CliWorkspace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli"));
    const auto d = *dir_;
    ASSERT_EQ(cli({"generate", "--variant", "01", "--h", "8", "--w", "8", "--c", "4", "--out", (d / "a.json").string()})
                  .code,
              0);
    ASSERT_EQ(cli({"generate", "--variant", "02", "--c", "16", "--k1", "3", "--k2", "7", "--out",
                   (d / "b.json").string()})
                  .code,
              0);
    for (const char* n : {"a", "b"}) {
      const auto sub = d / n;
      fs::create_directories(sub);
      ASSERT_EQ(cli({"metrics", "--net", (d / (std::string(n) + ".json")).string(), "--out",
                     (sub / "metrics.csv").string()})
                    .code,
                0);
      ASSERT_EQ(cli({"simulate", "--net", (d / (std::string(n) + ".json")).string(), "--seed", "3", "--noise", "0.05",
                     "--hidden-c", "0.9", "--runs", "5", "--gap-ms", "5", "--sample-period", "1e-5", "--out-dir",
                     sub.string()})
                    .code,
                0);
    }
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::vector<std::string> fit_args(const fs::path& out, const std::string& target = "both") {
    std::vector<std::string> a = {"--quiet", "fit", "--target", target, "--out", out.string()};
    for (const char* n : {"a", "b"}) {
      const auto sub = *dir_ / n;
      for (auto [flag, file] : {std::pair{"--metrics", "metrics.csv"}, {"--timing", "timing.csv"},
                                {"--trace", "trace.csv"}, {"--schedule", "schedule.csv"},
                                {"--totals", "totals.json"}}) {
        a.push_back(flag);
        a.push_back((sub / file).string());
      }
    }
    for (auto f : {"--gap-ms", "5"}) a.push_back(f);
    return a;
  }

  static fs::path* dir_;
};
fs::path* CliWorkspace::dir_ = nullptr;

TEST(Cli, HelpAndVersion) {
  auto h = cli({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("inspect"), std::string::npos);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"bogus"}).code, 2);
  EXPECT_EQ(cli({"inspect"}).code, 2);
  EXPECT_EQ(cli({"--jobs", "0", "inspect", "--net", "x"}).code, 2);
  EXPECT_EQ(cli({"--format", "xml", "inspect", "--net", "x"}).code, 2);
}

TEST(Cli, MissingFileExitTwo) {
  auto r = cli({"inspect", "--net", "/nonexistent/net.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/net.json"), std::string::npos);
}

TEST(Cli, InvalidNetworkExitOne) {
  auto d = testing::scratch_dir("cli_invalid");
  std::ofstream(d / "bad.json") << R"({"name":"bad","input":{"h":4,"w":4,"c":2},"layers":[)"
                                << R"({"name":"c","kind":"conv","inputs":["input"],"kernel_h":1,"kernel_w":1,)"
                                << R"("num_kernels":3},{"name":"s","kind":"eltwise","inputs":["input","c"]}]})";
  auto r = cli({"inspect", "--net", (d / "bad.json").string()});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.err.find("eltwise shape mismatch"), std::string::npos) << r.err;
  std::ofstream(d / "dangling.json") << R"({"name":"d","input":{"h":4,"w":4,"c":2},"layers":[)"
                                     << R"({"name":"r","kind":"relu","inputs":["nowhere"]}]})";
  auto u = cli({"inspect", "--net", (d / "dangling.json").string()});
  EXPECT_EQ(u.code, 2);
  EXPECT_NE(u.err.find("unresolved input"), std::string::npos);
  std::ofstream(d / "syntax.json") << "{";
  EXPECT_EQ(cli({"inspect", "--net", (d / "syntax.json").string()}).code, 2);
}

TEST(Cli, InspectAndMetricsOnFixture) {
  const auto net = testing::fixture("nets/alexnet.json");
  auto i = cli({"inspect", "--net", net});
  EXPECT_EQ(i.code, 0);
  EXPECT_NE(i.out.find("conv1,conv,input,55,55,96"), std::string::npos) << i.out;
  auto m = cli({"metrics", "--net", net});
  EXPECT_EQ(m.code, 0);
  EXPECT_EQ(m.out, detail::read_file(testing::fixture("expected/alexnet.metrics.csv")));
  auto j = cli({"--format", "json", "metrics", "--net", net});
  EXPECT_EQ(j.code, 0);
  EXPECT_NO_THROW(nlohmann::json::parse(j.out));
  EXPECT_NE(cli({"metrics", "--im2col", "--net", net}).out, m.out);
}

TEST(Cli, GenerateSuite) {
  auto d = testing::scratch_dir("cli_suite");
  EXPECT_EQ(cli({"generate", "--suite", "--out-dir", d.string()}).code, 0);
  std::size_t n = 0;
  for (const auto& cfg : standard_suite()) {
    EXPECT_EQ(slurp(d / suite_file_name(cfg)), serialize_network(generate(cfg)));
    ++n;
  }
  EXPECT_EQ(n, 5u);
  EXPECT_EQ(cli({"generate", "--variant", "01", "--c", "3"}).code, 1);
  EXPECT_EQ(cli({"generate", "--variant", "03"}).code, 2);
}

TEST_F(CliWorkspace, SimulateWritesArtifacts) {
  for (const char* f : {"timing.csv", "trace.csv", "schedule.csv", "totals.json"})
    EXPECT_TRUE(fs::exists(*dir_ / "a" / f)) << f;
  auto again = testing::scratch_dir("cli_sim_again");
  EXPECT_EQ(cli({"--jobs", "4", "simulate", "--net", (*dir_ / "a.json").string(), "--seed", "3", "--noise", "0.05",
                 "--hidden-c", "0.9", "--runs", "5", "--gap-ms", "5", "--sample-period", "1e-5", "--out-dir",
                 again.string()})
                .code,
            0);
  for (const char* f : {"timing.csv", "trace.csv", "schedule.csv", "totals.json"})
    EXPECT_EQ(slurp(again / f), slurp(*dir_ / "a" / f)) << f;
}

TEST_F(CliWorkspace, FitPredictReport) {
  const auto bundle = *dir_ / "bundle.json";
  auto f = cli(fit_args(bundle));
  ASSERT_EQ(f.code, 0) << f.err;
  auto b = bundle_from_json(slurp(bundle));
  EXPECT_TRUE(b.provenance.c_runtime_fitted);
  EXPECT_TRUE(b.models.count({LayerKind::kConv, Target::kEnergy}));

  // bit-identical refit
  auto bundle2 = *dir_ / "bundle2.json";
  ASSERT_EQ(cli(fit_args(bundle2)).code, 0);
  EXPECT_EQ(slurp(bundle), slurp(bundle2));

  const auto reports = *dir_ / "reports";
  fs::create_directories(reports);
  auto p = cli({"--format", "json", "predict", "--bundle", bundle.string(), "--net", (*dir_ / "a.json").string(),
                "--target", "both", "--measured", (*dir_ / "a" / "timing.csv").string(), "--totals",
                (*dir_ / "a" / "totals.json").string(), "--out", (reports / "a.json").string()});
  ASSERT_EQ(p.code, 0) << p.err;
  auto rs = reports_from_json(slurp(reports / "a.json"));
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].network_error_pct.has_value());
  EXPECT_TRUE(per_layer_mape(rs[0]).has_value());

  auto csv = cli({"predict", "--bundle", bundle.string(), "--net", (*dir_ / "a.json").string()});
  EXPECT_EQ(csv.code, 0);
  EXPECT_NE(csv.out.find("\nSUM,"), std::string::npos);

  auto r = cli({"report", "--inputs", reports.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AVERAGE_ABS"), std::string::npos);
  EXPECT_EQ(cli({"report", "--inputs", reports.string()}).out, r.out);
}

TEST_F(CliWorkspace, FitPairingErrors) {
  auto a = fit_args(*dir_ / "x.json");
  a.resize(a.size() - 2);  // drop --gap-ms
  // drop the second --totals pair
  auto it = std::find(a.rbegin(), a.rend(), "--totals");
  a.erase(std::prev(it.base()), std::next(std::prev(it.base()), 2));
  EXPECT_EQ(cli(a).code, 1);
}

TEST_F(CliWorkspace, PredictMissingKindExitOne) {
  auto bundle = *dir_ / "only_b.json";
  auto sub = *dir_ / "b";
  ASSERT_EQ(cli({"--quiet", "fit", "--metrics", (sub / "metrics.csv").string(), "--timing",
                 (sub / "timing.csv").string(), "--out", bundle.string()})
                .code,
            0);
  auto r = cli({"predict", "--bundle", bundle.string(), "--net", (*dir_ / "a.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no runtime model for kind"), std::string::npos) << r.err;
}

TEST(Cli, ReferenceTotalsReport) {
  auto r = cli({"report", "--inputs", testing::fixture("reference_totals")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AlexNet,runtime,526.75,561.64,-6.21"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("AVERAGE_ABS"), std::string::npos);
}

}  // namespace
}  // namespace pkit
