#include "dimsel/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace dimsel;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << contents;
  return p;
}

Dataset tiny(const std::vector<std::pair<std::string, double>>& rows) {
  // Three-sample spectra; the double is the value at index 1.
  std::vector<Spectrum> spectra;
  int i = 0;
  for (const auto& [label, v] : rows) {
    Spectrum s;
    s.id = label + std::to_string(i++);
    s.label = label;
    s.intensities = Eigen::Vector3d(0.0, v, 0.0);
    spectra.push_back(std::move(s));
  }
  return Dataset(std::move(spectra));
}

}  // namespace

TEST_CASE("class codes expand composites") {
  CHECK(ClassCode("gl").members() == std::vector<std::string>{"gl"});
  CHECK((ClassCode("G2").members() == std::vector<std::string>{"gl", "me"}));
  CHECK((ClassCode("G1").members() == std::vector<std::string>{"a2", "oa", "od"}));
  CHECK(ClassCode("G1").composite());
  CHECK_FALSE(ClassCode("mm").composite());
  CHECK_THROWS_AS(ClassCode("xx"), DataError);
  CHECK_THROWS_AS(ClassCode("GL"), DataError);
}

TEST_CASE("load_dataset parses a well-formed file") {
  const auto p = temp_file("ds_ok.csv",
                           "id,label,v0,v1,v2\n"
                           "s1,gl,1,2,3\n"
                           "s2,me,4,5.5,6\n"
                           "s3,gl,7,8,9\n");
  const Dataset ds = load_dataset(p, EchoTime::kShort);
  REQUIRE(ds.size() == 3);
  CHECK(ds.length() == 3);
  CHECK(ds[0].id == "s1");
  CHECK(ds[1].label == "me");
  CHECK(ds[1].intensities[1] == 5.5);
  CHECK(ds[2].intensities[2] == 9.0);
}

TEST_CASE("load_dataset reports schema violations with row numbers") {
  SUBCASE("wrong column count") {
    const auto p = temp_file("ds_cols.csv",
                             "id,label,v0,v1,v2\n"
                             "s1,gl,1,2,3\n"
                             "s2,me,4,5\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, EchoTime::kShort),
                         doctest::Contains("wrong column count at row 2"), DataError);
  }
  SUBCASE("unknown class code") {
    const auto p = temp_file("ds_label.csv", "id,label,v0\ns1,xx,1\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, EchoTime::kShort),
                         doctest::Contains("unknown class code"), DataError);
  }
  SUBCASE("composite label rejected in files") {
    const auto p = temp_file("ds_comp.csv", "id,label,v0\ns1,G2,1\n");
    CHECK_THROWS_AS(load_dataset(p, EchoTime::kShort), DataError);
  }
  SUBCASE("non-finite value") {
    const auto p = temp_file("ds_nan.csv", "id,label,v0\ns1,gl,nan\n");
    CHECK_THROWS_AS(load_dataset(p, EchoTime::kShort), DataError);
  }
  SUBCASE("malformed value") {
    const auto p = temp_file("ds_junk.csv", "id,label,v0\ns1,gl,1x\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, EchoTime::kShort),
                         doctest::Contains("malformed value"), DataError);
  }
  SUBCASE("duplicate ids") {
    const auto p = temp_file("ds_dup.csv", "id,label,v0\ns1,gl,1\ns1,me,2\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, EchoTime::kShort),
                         doctest::Contains("duplicate"), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_dataset("/nonexistent/nope.csv", EchoTime::kShort),
                         doctest::Contains("dataset not provided"), DataError);
  }
}

TEST_CASE("echo time comes from the file name suffix") {
  const auto p = temp_file("ds_let.csv", "id,label,v0\ns1,gl,1\n");
  CHECK(load_dataset(p)[0].echo_time == EchoTime::kLong);
  const auto q = temp_file("ds_set.csv", "id,label,v0\ns1,gl,1\n");
  CHECK(load_dataset(q)[0].echo_time == EchoTime::kShort);
}

TEST_CASE("select_binary expands composites and encodes -1/+1") {
  const Dataset ds = tiny({{"gl", 1}, {"me", 2}, {"gl", 3}, {"mm", 4}, {"mm", 5},
                           {"me", 6}, {"mm", 7}, {"mm", 8}, {"gl", 9}});
  const BinaryDataset bin = select_binary(ds, ClassCode("G2"), ClassCode("mm"));
  CHECK(bin.size() == 9);
  CHECK((bin.targets.array() == -1.0).count() == 5);  // 3 gl + 2 me
  CHECK((bin.targets.array() == +1.0).count() == 4);
  CHECK(bin.class_a == "G2");
  // Row order preserved from the dataset.
  CHECK(bin.ids.front() == ds[0].id);
}

TEST_CASE("select_binary rejects bad pairs") {
  const Dataset ds = tiny({{"gl", 1}, {"me", 2}, {"mm", 3}});
  CHECK_THROWS_WITH_AS(select_binary(ds, ClassCode("a2"), ClassCode("a2")),
                       doctest::Contains("identical"), DataError);
  CHECK_THROWS_WITH_AS(select_binary(ds, ClassCode("G2"), ClassCode("gl")),
                       doctest::Contains("overlapping"), DataError);
  CHECK_THROWS_AS(select_binary(ds, ClassCode("gl"), ClassCode("a3")), DataError);  // empty side
}

TEST_CASE("every published experiment pair has disjoint expansions") {
  std::vector<std::pair<std::string, double>> rows;
  int v = 0;
  for (const std::string& code : ClassCode::atomic_codes()) {
    rows.push_back({code, static_cast<double>(++v)});
    rows.push_back({code, static_cast<double>(++v)});
  }
  const Dataset ds = tiny(rows);

  const std::vector<std::pair<std::string, std::string>> published = {
      {"a2", "a3"}, {"gl", "me"}, {"od", "a2"}, {"a2", "oa"}, {"gl", "ly"},
      {"gl", "ab"}, {"me", "ly"}, {"gl", "a3"}, {"a2", "ly"}, {"gl", "pn"},
      {"me", "pn"}, {"mm", "ab"}, {"G1", "mm"}, {"a2", "G2"}, {"G1", "G2"},
      {"me", "mm"}, {"G2", "mm"}, {"G1", "no"}, {"me", "no"},
  };
  for (const auto& [a, b] : published) {
    const BinaryDataset bin = select_binary(ds, ClassCode(a), ClassCode(b));
    CHECK((bin.targets.array() == -1.0).count() > 0);
    CHECK((bin.targets.array() == +1.0).count() > 0);
  }
}

TEST_CASE("synthesize: exact peak sum when noise is zero") {
  SynthSpec spec;
  spec.m = 256;
  spec.seed = 11;
  spec.classes = {{"gl", 2, {{100.0, 5.0, 1.0}}}};
  const Dataset ds = synthesize(spec);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].intensities[100] == 1.0);  // apex of the Gaussian
  CHECK(ds[0].intensities == ds[1].intensities);
}

TEST_CASE("synthesize is bit-identical under the same seed") {
  SynthSpec spec;
  spec.m = 64;
  spec.noise_sigma = 0.3;
  spec.seed = 42;
  spec.classes = {{"gl", 3, {{20.0, 2.0, 1.0}}}, {"me", 4, {}}};
  const Dataset d1 = synthesize(spec);
  const Dataset d2 = synthesize(spec);
  REQUIRE(d1.size() == d2.size());
  for (Eigen::Index i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].intensities == d2[i].intensities);
  }
  spec.seed = 43;
  const Dataset d3 = synthesize(spec);
  CHECK(d1[0].intensities != d3[0].intensities);
}

TEST_CASE("synthesize: class-mean difference is confined to the differing peak") {
  SynthSpec spec;
  spec.m = 512;
  spec.seed = 0;
  spec.classes = {{"gl", 3, {}}, {"me", 3, {{220.0, 4.0, 1.0}}}};
  const Dataset ds = synthesize(spec);

  Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(spec.m);
  Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(spec.m);
  for (const Spectrum& s : ds) (s.label == "gl" ? mean_a : mean_b) += s.intensities / 3.0;
  const Eigen::VectorXd diff = (mean_b - mean_a).cwiseAbs();

  CHECK(diff[220] == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index t = 0; t < spec.m; ++t) {
    if (std::abs(static_cast<double>(t) - 220.0) > 30.0) {
      CHECK(diff[t] < 1e-9);
    }
  }
}

TEST_CASE("synthesize validates its spec") {
  SynthSpec spec;
  spec.m = 64;
  spec.classes = {{"gl", 2, {{100.0, 5.0, 1.0}}}};  // center outside [0, 64)
  CHECK_THROWS_AS(synthesize(spec), DataError);
  spec.classes = {{"gl", 0, {}}};
  CHECK_THROWS_AS(synthesize(spec), DataError);
  spec.classes = {{"gl", 2, {{10.0, -1.0, 1.0}}}};
  CHECK_THROWS_AS(synthesize(spec), DataError);
}

TEST_CASE("dataset round-trips byte-for-byte through its own writer") {
  SynthSpec spec;
  spec.m = 32;
  spec.noise_sigma = 0.7;
  spec.seed = 9;
  spec.classes = {{"gl", 3, {{10.0, 2.0, 1.5}}}, {"me", 2, {{20.0, 3.0, 0.5}}}};
  const Dataset ds = synthesize(spec);

  std::ostringstream first;
  write_dataset(ds, first);
  const auto p = temp_file("ds_roundtrip.csv", first.str());

  const Dataset reloaded = load_dataset(p, EchoTime::kShort);
  std::ostringstream second;
  write_dataset(reloaded, second);
  CHECK(first.str() == second.str());
}

TEST_CASE("dataset construction enforces invariants") {
  std::vector<Spectrum> bad;
  bad.push_back({"a", "gl", EchoTime::kShort, Eigen::Vector2d(1, 2)});
  bad.push_back({"b", "gl", EchoTime::kShort, Eigen::Vector3d(1, 2, 3)});
  CHECK_THROWS_AS(Dataset(std::move(bad)), DataError);

  std::vector<Spectrum> nan_row;
  nan_row.push_back(
      {"a", "gl", EchoTime::kShort, Eigen::Vector2d(1, std::nan(""))});
  CHECK_THROWS_AS(Dataset(std::move(nan_row)), DataError);
}
