// Copyright 2026 The polyprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <functional>
#include <string>

#include <gtest/gtest.h>

#include "polyprop/text.h"
#include "test_support.h"

namespace polyprop {
namespace {

using testing::source_path;

// Runs the CLI through the shell; stdout and stderr go to `log`.
int run(const std::string& args, const std::string& log) {
  const std::string cmd = std::string("\"") + POLYPROP_CLI + "\" " + args + " >\"" + log +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::filesystem::path dir_;
};

TEST_F(Cli, GenCorpusIsByteIdenticalPerSeed) {
  const std::string cfg = path("g.cfg");
  write_file(cfg, "synth.documents = 50\n");
  ASSERT_EQ(run("gen-corpus --config " + cfg + " --seed 7 -o " + path("a.txt"), path("log")), 0);
  ASSERT_EQ(run("gen-corpus --config " + cfg + " --seed 7 -o " + path("b.txt"), path("log")), 0);
  ASSERT_EQ(run("gen-corpus --config " + cfg + " --seed 8 -o " + path("c.txt"), path("log")), 0);
  EXPECT_EQ(read_file(path("a.txt")), read_file(path("b.txt")));
  EXPECT_NE(read_file(path("a.txt")), read_file(path("c.txt")));
}

TEST_F(Cli, AuditPrintsStrictPrecision) {
  ASSERT_EQ(run("audit " + source_path("tests/fixtures/audit_docs.txt") + " " +
                    source_path("tests/fixtures/audit_gold.tsv") + " -o " + path("audit.tsv"),
                path("log")),
            0);
  EXPECT_NE(read_file(path("log")).find("0.842"), std::string::npos);
  EXPECT_NE(read_file(path("audit.tsv")).find("strict_record\t101\t120\t0.842"),
            std::string::npos);
}

// Runs gen-corpus -> extract -> build-dataset -> train -> eval into `tag`.
void pipeline(const std::string& tag,
              const std::function<std::string(const std::string&)>& path) {
  const std::string cfg = path("p.cfg");
  write_file(cfg, "synth.documents = 200\ntrain.epochs = 2\n");
  ASSERT_EQ(run("gen-corpus --config " + cfg + " --seed 3 -o " + path(tag + "docs.txt"),
                path("log")),
            0);
  ASSERT_EQ(run("extract " + path(tag + "docs.txt") + " -o " + path(tag + "obs.json"),
                path("log")),
            0);
  ASSERT_EQ(run("build-dataset " + path(tag + "obs.json") + " --seed 3 -o " +
                    path(tag + "data.tsv"),
                path("log")),
            0);
  ASSERT_EQ(run("train " + path(tag + "data.tsv") + " --config " + cfg + " --seed 3 -o " +
                    path(tag + "ck.bin"),
                path("log")),
            0);
  ASSERT_EQ(run("eval " + path(tag + "ck.bin") + " " + path(tag + "data.tsv") + " -o " +
                    path(tag + "eval.tsv") + " --json " + path(tag + "eval.json"),
                path("log")),
            0);
}

TEST_F(Cli, PipelineIsByteReproducible) {
  auto p = [this](const std::string& n) { return path(n); };
  pipeline("a_", p);
  pipeline("b_", p);
  for (const char* f : {"docs.txt", "obs.json", "data.tsv", "ck.bin", "eval.tsv", "eval.json"}) {
    EXPECT_EQ(read_file(path(std::string("a_") + f)), read_file(path(std::string("b_") + f)))
        << f;
  }
}

TEST_F(Cli, ZeroEpochModelScoresNearChance) {
  const std::string cfg = path("z.cfg");
  write_file(cfg, "synth.documents = 300\ntrain.epochs = 0\n");
  ASSERT_EQ(run("gen-corpus --config " + cfg + " -o " + path("d.txt"), path("log")), 0);
  ASSERT_EQ(run("build-dataset " + path("d.txt") + " -o " + path("data.tsv"), path("log")), 0);
  ASSERT_EQ(run("train " + path("data.tsv") + " --config " + cfg + " -o " + path("ck.bin"),
                path("log")),
            0);
  ASSERT_EQ(run("eval " + path("ck.bin") + " " + path("data.tsv") + " -o " + path("r.tsv"),
                path("log")),
            0);
  const std::string report = read_file(path("r.tsv"));
  const auto pos = report.find("macro_primary=");
  ASSERT_NE(pos, std::string::npos) << report;
  EXPECT_LE(std::stod(report.substr(pos + 14)), 0.1);
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run("train --no-such-flag", path("log")), 0);
  EXPECT_NE(run("extract " + path("missing.txt"), path("log")), 0);
  write_file(path("bad.txt"), "== SAMPLE A ==\nno end\n");
  EXPECT_NE(run("extract " + path("bad.txt"), path("log")), 0);
  EXPECT_FALSE(read_file(path("log")).empty());
  write_file(path("bad.cfg"), "train.epoch = 3\n");
  write_file(path("d.tsv"), "");
  EXPECT_NE(run("train " + path("d.tsv") + " --config " + path("bad.cfg") + " -o " +
                    path("x.bin"),
                path("log")),
            0);
}

}  // namespace
}  // namespace polyprop
