#include <array>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "pivalign/aligner.h"
#include "pivalign/corpus.h"
#include "synthetic.h"

namespace pivalign {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Output {
  int code = -1;
  std::string out;
};

Output RunCli(const std::string& args) {
  const std::string cmd = std::string(PIVALIGN_CLI) + " " + args + " 2>/dev/null";
  Output r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pivalign_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string P(const std::string& rel) const { return (dir_ / rel).string(); }
  fs::path dir_;
};

TEST_F(CliTest, EvaluatePrintsF1) {
  testing::WriteText(P("pred.tsv"), "a#0\tb#0\t1\na#1\tb#2\t1\n");
  testing::WriteText(P("gold.tsv"), "a#0\tb#0\na#1\tb#1\n");
  const Output r = RunCli("evaluate --pred " + P("pred.tsv") + " --gold " + P("gold.tsv"));
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["f1"].get<double>(), 0.5);
  EXPECT_EQ(j["n_correct"], 1);
}

TEST_F(CliTest, DedupStatsABAB) {
  testing::WriteText(P("train.txt"), "a b a b\n");
  const Output r = RunCli("dedup-stats --train " + P("train.txt") + " --lengths 1,2,3 --out-dir " + P("o"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "length,series,prob\n1,within,1\n2,within,0.6666666666666666\n3,within,0\n");
  EXPECT_EQ(testing::ReadText(P("o/dedup.csv")), r.out);
}

TEST_F(CliTest, FilterLeakyWritesLineIndices) {
  std::string train, eval;
  for (int i = 0; i < 12; ++i) train += "t" + std::to_string(i) + " ";
  testing::WriteText(P("train.txt"), train + "\n");
  eval = "x " + train + "\nshort one\n";
  testing::WriteText(P("eval.txt"), eval);
  const Output r = RunCli("filter-leaky --train " + P("train.txt") + " --eval " + P("eval.txt") +
                          " --out-dir " + P("o"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(testing::ReadText(P("o/removed.txt")), "0\n");
  EXPECT_EQ(testing::ReadText(P("o/kept.txt")), "1\n");
}

TEST_F(CliTest, NaiveSentencesMatchLibrary) {
  testing::SyntheticSpec spec;
  spec.articles = 4;
  spec.vocab = 200;
  const testing::SyntheticCorpus c = testing::MakeSynthetic(spec);
  testing::WriteSynthetic(c, dir_);
  const Output r = RunCli("align-sentences --method naive --src-corpus " + P("src.jsonl") + " --tgt-corpus " +
                          P("tgt.jsonl") + " --articles " + P("gold_articles.tsv") + " --out-dir " + P("o"));
  ASSERT_EQ(r.code, 0);
  AlignmentSet expected;
  for (const AlignmentPair& p : c.gold_articles.pairs) {
    const AlignmentSet part = NaiveAlign(c.src.articles[*c.src.find(p.src_id)], c.tgt.articles[*c.tgt.find(p.tgt_id)]);
    expected.pairs.insert(expected.pairs.end(), part.pairs.begin(), part.pairs.end());
  }
  const AlignmentSet got = ReadAlignment(P("o/sentences.tsv"));
  ASSERT_EQ(got.size(), expected.size());
  std::set<std::pair<std::string, std::string>> a, b;
  for (const auto& p : got.pairs) a.emplace(p.src_id, p.tgt_id);
  for (const auto& p : expected.pairs) b.emplace(p.src_id, p.tgt_id);
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, BidiSentencesRecoverGold) {
  testing::SyntheticSpec spec;
  spec.articles = 5;
  spec.vocab = 300;
  const testing::SyntheticCorpus c = testing::MakeSynthetic(spec);
  testing::WriteSynthetic(c, dir_);
  const std::string common = "--src-corpus " + P("src.jsonl") + " --tgt-corpus " + P("tgt.jsonl") +
                             " --translations " + P("translations") + " --vocab-size 500 --out-dir " + P("o");
  ASSERT_EQ(RunCli("align-articles " + common).code, 0);
  ASSERT_EQ(RunCli("align-sentences --articles " + P("o/articles.tsv") + " " + common).code, 0);
  const Output r = RunCli("evaluate --pred " + P("o/sentences.tsv") + " --gold " + P("gold_sentences.tsv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(r.out)["f1"].get<double>(), 1.0);
}

TEST_F(CliTest, SplitAndExport) {
  testing::SyntheticSpec spec;
  spec.articles = 3;
  spec.vocab = 200;
  const testing::SyntheticCorpus c = testing::MakeSynthetic(spec);
  testing::WriteSynthetic(c, dir_);
  ASSERT_EQ(RunCli("split --pairs " + P("gold_sentences.tsv") + " --n-dev 5 --n-test 5 --seed 9 --out-dir " + P("s")).code, 0);
  const AlignmentSet train = ReadAlignment(P("s/train.tsv"));
  EXPECT_EQ(train.size(), 20u);
  EXPECT_EQ(ReadAlignment(P("s/dev.tsv")).size(), 5u);
  ASSERT_EQ(RunCli("export --pairs " + P("s/train.tsv") + " --src-corpus " + P("src.jsonl") + " --tgt-corpus " +
                   P("tgt.jsonl") + " --name train --out-dir " + P("e"))
                .code,
            0);
  std::istringstream src(testing::ReadText(P("e/train.src.txt"))), tsv(testing::ReadText(P("e/train.tsv")));
  std::string sline, tline;
  std::size_t n = 0;
  while (std::getline(src, sline)) {
    ASSERT_TRUE(std::getline(tsv, tline));
    std::istringstream fields(tline);
    std::string sid, tid, stext;
    std::getline(fields, sid, '\t');
    std::getline(fields, tid, '\t');
    std::getline(fields, stext, '\t');
    EXPECT_EQ(stext, sline);
    ++n;
  }
  EXPECT_EQ(n, train.size());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("").code, 2);
  EXPECT_EQ(RunCli("evaluate --pred").code, 2);
  EXPECT_EQ(RunCli("align-articles --src-corpus x --tgt-corpus y --method nope --out-dir " + P("o")).code, 2);
  EXPECT_EQ(RunCli("evaluate --pred " + P("missing.tsv") + " --gold " + P("missing2.tsv")).code, 3);
  testing::WriteText(P("bad.tsv"), "only-one-column\n");
  EXPECT_EQ(RunCli("evaluate --pred " + P("bad.tsv") + " --gold " + P("bad.tsv")).code, 5);
  testing::WriteText(P("cfg.json"), R"({"bogus": 1})");
  EXPECT_EQ(RunCli("run " + P("cfg.json")).code, 2);
  EXPECT_EQ(RunCli("--version").code, 0);
}

}  // namespace
}  // namespace pivalign
