// Copyright 2026 The Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "forge/catalog.hpp"
#include "forge/error.hpp"

namespace forge {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("forge_catalog_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

using Targets = TempDir;
using Seeds = TempDir;
using Records = TempDir;

TEST_F(Targets, DuplicatesCollapse) {
  auto p = write("t.toml", R"(targets = [
  { language = "python", cwe = "CWE-78" },
  { language = "python", cwe = "CWE-78" },
])");
  auto pairs = load_cwe_targets(p);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].key(), "python/CWE-78");
}

TEST_F(Targets, SortedByLanguageThenNumber) {
  auto p = write("t.toml", R"(targets = [
  { language = "python", cwe = "CWE-78" },
  { language = "js", cwe = "CWE-79" },
  { language = "python", cwe = "CWE-22" },
  { language = "python", cwe = "CWE-117" },
])");
  auto pairs = load_cwe_targets(p);
  std::vector<std::string> keys;
  for (const auto& c : pairs) keys.push_back(c.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"javascript/CWE-79", "python/CWE-22", "python/CWE-78",
                                            "python/CWE-117"}));
}

TEST_F(Targets, ThirtyEightDistinctPairs) {
  const std::vector<std::string> langs{"c", "cpp", "java", "javascript", "python"};
  std::string text = "targets = [\n";
  std::set<std::string> expected;
  for (int i = 0; i < 38; ++i) {
    const std::string lang = langs[i % langs.size()];
    const std::string cwe = "CWE-" + std::to_string(20 + i * 7);
    expected.insert(lang + "/" + cwe);
    text += "  { language = \"" + lang + "\", cwe = \"" + cwe + "\" },\n";
    if (i % 3 == 0) text += "  { language = \"" + lang + "\", cwe = \"" + cwe + "\" },\n";
  }
  text += "]\n";
  auto pairs = load_cwe_targets(write("t.toml", text));
  EXPECT_EQ(pairs.size(), 38u);
  std::set<std::string> got;
  for (const auto& c : pairs) got.insert(c.key());
  EXPECT_EQ(got, expected);
  EXPECT_TRUE(std::is_sorted(pairs.begin(), pairs.end()));
}

TEST_F(Targets, MalformedRowIsNamed) {
  auto p = write("t.toml", R"(targets = [
  { language = "python", cwe = "CWE-78" },
  { language = "python", cwe = "cwe78" },
])");
  try {
    load_cwe_targets(p);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cwe78"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_cwe_targets(write("u.toml", "targets = [{ language = \"cobol\", cwe = \"CWE-1\" }]")),
               ValidationError);
  EXPECT_THROW(load_cwe_targets(dir_ / "missing.toml"), Error);
}

TEST(CwePair, OrderingIsNumeric) {
  EXPECT_LT(make_cwe_pair("python", "CWE-78"), make_cwe_pair("python", "CWE-117"));
  EXPECT_LT(make_cwe_pair("javascript", "CWE-900"), make_cwe_pair("python", "CWE-1"));
  EXPECT_EQ(make_cwe_pair("py", "CWE-78"), make_cwe_pair("python", "CWE-78"));
  EXPECT_THROW(make_cwe_pair("python", "CWE-"), ValidationError);
  EXPECT_THROW(make_cwe_pair("python", "CWE-7a"), ValidationError);
}

TEST_F(Seeds, EmptyFile) {
  EXPECT_TRUE(load_seed_instructions(write("s.jsonl", "")).empty());
}

TEST_F(Seeds, IdenticalTextCollapses) {
  SeedLoadStats stats;
  auto seeds = load_seed_instructions(
      write("s.jsonl", "{\"text\": \"write a sort\"}\n{\"text\": \"write a sort\"}\n"), &stats);
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].kind, InstructionKind::kNormal);
  EXPECT_EQ(stats.duplicates, 1u);
}

TEST_F(Seeds, MissingTextSkippedAndCounted) {
  SeedLoadStats stats;
  auto seeds = load_seed_instructions(
      write("s.jsonl", "{\"id\": \"a\"}\n{\"text\": \"x\", \"lang\": \"py\"}\n{\"text\": null}\n"), &stats);
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(stats.skipped_missing_text, 2u);
  EXPECT_EQ(seeds[0].language, std::optional<std::string>("python"));
}

TEST_F(Seeds, TenThousandRowsUniqueIds) {
  std::string text;
  std::size_t lines = 0;
  for (int i = 0; i < 10000; ++i) {
    text += "{\"id\": \"seed-" + std::to_string(i) + "\", \"text\": \"Implement task number " +
            std::to_string(i) + "\"}\n";
    ++lines;
  }
  auto seeds = load_seed_instructions(write("s.jsonl", text));
  EXPECT_EQ(seeds.size(), lines);
  std::set<std::string> ids;
  for (const auto& s : seeds) ids.insert(s.id);
  EXPECT_EQ(ids.size(), lines);
}

TEST_F(Seeds, IdsStableAcrossLoads) {
  auto p = write("s.jsonl", "{\"id\": \"7\", \"text\": \"parse a csv\"}\n");
  auto q = write("t.jsonl", "{\"id\": \"other\", \"text\": \"parse a csv\"}\n");
  EXPECT_EQ(load_seed_instructions(p)[0].id, load_seed_instructions(p)[0].id);
  EXPECT_EQ(load_seed_instructions(p)[0].id, load_seed_instructions(q)[0].id);
  EXPECT_EQ(load_seed_instructions(p)[0].id,
            instruction_id(InstructionKind::kNormal, "parse a csv", std::nullopt, std::nullopt));
}

TEST(Instruction, IdIsPureFunctionOfIdentity) {
  const auto pair = make_cwe_pair("python", "CWE-78");
  auto x_n = make_normal_instruction("list files");
  auto x_v = make_vuln_instruction("list files with ls", pair, x_n);
  EXPECT_EQ(x_v.id, instruction_id(InstructionKind::kVulnInducing, "list files with ls", pair, x_n.id));
  auto tagged = make_normal_instruction("list files", "python");
  EXPECT_EQ(tagged.id, x_n.id);
  EXPECT_NE(x_v.id, instruction_id(InstructionKind::kVulnInducing, "list files with ls",
                                   make_cwe_pair("python", "CWE-79"), x_n.id));
  EXPECT_NE(x_n.id, instruction_id(InstructionKind::kNormal, "list files ", std::nullopt, std::nullopt));
}

TEST(Instruction, Invariants) {
  auto x_n = make_normal_instruction("a");
  auto x_v = make_vuln_instruction("b", make_cwe_pair("python", "CWE-78"), x_n);
  EXPECT_NO_THROW(validate(x_n));
  EXPECT_NO_THROW(validate(x_v));
  EXPECT_THROW(make_vuln_instruction("c", make_cwe_pair("python", "CWE-78"), x_v), ValidationError);

  auto bad = x_v;
  bad.origin_id.reset();
  EXPECT_THROW(validate(bad), ValidationError);
  bad = x_n;
  bad.pair = make_cwe_pair("python", "CWE-78");
  EXPECT_THROW(validate(bad), ValidationError);
  bad = x_n;
  bad.id = "0000";
  EXPECT_THROW(validate(bad), ValidationError);
}

// serialize(deserialize(s)) == s for every record type.
TEST(RoundTrip, RecordsAreByteStable) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words{"parse", "a", "file", "\"quoted\"", "ünï", "tab\t", "\\"};
  auto text = [&] {
    std::string s;
    for (int i = 0; i < 6; ++i) s += words[rng() % words.size()] + " ";
    return s;
  };
  for (int i = 0; i < 200; ++i) {
    auto x_n = make_normal_instruction(text(), i % 2 ? std::optional<std::string>("python") : std::nullopt);
    auto x_v = make_vuln_instruction(text(), make_cwe_pair(i % 3 ? "python" : "js", "CWE-" + std::to_string(i)),
                                     x_n);
    for (const auto& instr : {x_n, x_v}) {
      const std::string once = canonical(Json(instr));
      const auto back = Json::parse(once).get<Instruction>();
      EXPECT_EQ(back, instr);
      EXPECT_EQ(canonical(Json(back)), once);
    }
    ScenarioRecord r{*x_v.pair, text(), sha256_hex(text()), i};
    const std::string once = canonical(Json(r));
    EXPECT_EQ(canonical(Json(Json::parse(once).get<ScenarioRecord>())), once);
  }
}

TEST_F(Records, SaveLoadInstructions) {
  auto x_n = make_normal_instruction("read a config", "javascript");
  auto x_v = make_vuln_instruction("read a config path from the query string",
                                   make_cwe_pair("javascript", "CWE-22"), x_n);
  save_instructions(dir_ / "i.jsonl", {x_n, x_v});
  auto back = load_instructions(dir_ / "i.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], x_n);
  EXPECT_EQ(back[1], x_v);
  const std::string first = read_text(dir_ / "i.jsonl");
  save_instructions(dir_ / "j.jsonl", back);
  EXPECT_EQ(read_text(dir_ / "j.jsonl"), first);
}

TEST_F(Records, TamperedIdRejected) {
  auto x_n = make_normal_instruction("read a config");
  Json j = x_n;
  j["id"] = "deadbeef";
  write("i.jsonl", canonical(j) + "\n");
  EXPECT_THROW(load_instructions(dir_ / "i.jsonl"), ValidationError);
}

TEST_F(Records, AtomicWriteAndSidecar) {
  write_jsonl_atomic(dir_ / "d.jsonl", {Json{{"a", 1}}, Json{{"b", 2}}});
  write_schema_sidecar(dir_ / "d.jsonl", 2);
  EXPECT_EQ(read_text(dir_ / "d.jsonl"), "{\"a\":1}\n{\"b\":2}\n");
  auto side = Json::parse(read_text(dir_ / "d.jsonl.manifest.json"));
  EXPECT_EQ(side["schema_version"], 1);
  EXPECT_EQ(side["rows"], 2);
  for (const auto& e : fs::directory_iterator(dir_)) {
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST(Hashing, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(canonical(Json::parse(R"({"b": 1, "a": [2, {"d": 0, "c": 1}]})")),
            R"({"a":[2,{"c":1,"d":0}],"b":1})");
}

}  // namespace
}  // namespace forge
