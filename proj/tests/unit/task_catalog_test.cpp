#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "dio/error.hpp"
#include "dio/hashing.hpp"
#include "dio/task_catalog.hpp"
#include "prime_fixture.hpp"

namespace dio {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("dio_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

TEST(Catalog, SplitSizesAndDisjointness) {
  for (const auto& t : build_catalog()) {
    ASSERT_EQ(t.visible.size(), 8u) << t.id;
    ASSERT_EQ(t.hidden.size(), 15u) << t.id;
    std::set<std::string> vis, hid;
    for (const auto& e : t.visible) vis.insert(serialize(e.input));
    for (const auto& e : t.hidden) hid.insert(serialize(e.input));
    EXPECT_EQ(vis.size(), 8u) << t.id;
    EXPECT_EQ(hid.size(), 15u) << t.id;
    for (const auto& h : hid) EXPECT_FALSE(vis.count(h)) << t.id << " leaks " << h;
  }
}

TEST(Catalog, OutputsAreOracleOutputsAndInputsConform) {
  for (const auto& t : build_catalog()) {
    const auto& o = find_oracle(t.oracle_id);
    for (const auto* set : {&t.visible, &t.hidden}) {
      for (const auto& e : *set) {
        EXPECT_TRUE(conforms(o, e.input)) << t.id;
        EXPECT_EQ(oracle_eval(t.oracle_id, e.input), e.output) << t.id;
      }
    }
  }
}

TEST(Catalog, FamiliesCoverTheTable) {
  std::set<std::string> fams;
  for (const auto& t : build_catalog()) fams.insert(std::string(to_string(t.family)));
  EXPECT_EQ(fams, (std::set<std::string>{"Arithmetic", "Core", "Sequence", "BitParity", "Newton", "Geometry", "Extra"}));
}

TEST(Catalog, PrimeVisibleSetIsTheWorkedPairs) {
  const auto t = build_split(find_task_def("prime_factorization"));
  const auto pairs = testing::prime_pairs();
  ASSERT_EQ(t.visible.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(t.visible[i].input, pairs[i].input);
    EXPECT_EQ(t.visible[i].output, pairs[i].output);
  }
}

TEST(Catalog, EdgeCasesComeFirst) {
  for (const auto& def : task_registry()) {
    const auto ex = generate_examples(def, kTrainSeed, def.edge_cases.size() + 3);
    for (std::size_t i = 0; i < def.edge_cases.size(); ++i) EXPECT_EQ(ex[i].input, def.edge_cases[i]) << def.id;
  }
}

TEST(Catalog, GenerationIsDeterministic) {
  const auto a = build_catalog();
  const auto b = build_catalog();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(tasks_equal(a[i], b[i])) << a[i].id;
  EXPECT_EQ(render_manifest(a).sha256, render_manifest(b).sha256);
}

TEST(Catalog, ManifestHashMatchesGolden) {
  const auto golden = read_file(fs::path(DIO_GOLDEN_DIR) / "manifest.sha256");
  EXPECT_EQ(render_manifest(build_catalog()).sha256 + "\n", golden);
}

TEST(Catalog, DomainTooSmallIsReported) {
  TaskDef d = find_task_def("prime_factorization");
  d.edge_cases.clear();
  d.domain.hi = 5;
  EXPECT_THROW(build_split(d), DomainTooSmall);
  EXPECT_THROW(generate_examples(d, 1, 6), DomainTooSmall);
}

TEST(Catalog, SmallDomainRelaxesDisjointness) {
  TaskDef d = find_task_def("prime_factorization");
  d.edge_cases.clear();
  d.domain.hi = 20;
  EXPECT_THROW(build_split(d), DomainTooSmall);
  d.small_domain = true;
  const auto t = build_split(d);
  EXPECT_EQ(t.visible.size(), 8u);
  EXPECT_EQ(t.hidden.size(), 15u);
  std::set<std::string> hid;
  for (const auto& e : t.hidden) hid.insert(serialize(e.input));
  EXPECT_EQ(hid.size(), 15u);
}

TEST(Catalog, ExportLoadRoundTrip) {
  const auto dir = temp_dir("export");
  const auto catalog = build_catalog();
  const auto m = export_benchmark(catalog, dir);
  EXPECT_EQ(m.tasks.size(), catalog.size());
  EXPECT_EQ(m.generator_version, kGeneratorVersion);
  EXPECT_EQ(read_file(dir / "manifest.json"), m.content);
  const auto loaded = load_benchmark(dir);
  ASSERT_EQ(loaded.size(), catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    EXPECT_TRUE(tasks_equal(loaded[i], catalog[i])) << catalog[i].id;
    EXPECT_EQ(read_file(dir / (catalog[i].id + ".json")), task_file_content(catalog[i]));
    EXPECT_EQ(m.tasks[i].sha256, sha256_hex(read_file(dir / (catalog[i].id + ".json"))));
  }
  fs::remove_all(dir);
}

TEST(Catalog, TaskJsonRoundTrip) {
  for (const auto& t : build_catalog()) EXPECT_TRUE(tasks_equal(task_from_json(task_to_json(t)), t)) << t.id;
}

TEST(Catalog, LoadingMissingDirThrowsIoError) {
  EXPECT_THROW(load_benchmark(temp_dir("missing")), IoError);
}

TEST(Catalog, UnknownTaskThrows) { EXPECT_THROW(find_task_def("nope"), UnknownOracle); }

}  // namespace
}  // namespace dio
