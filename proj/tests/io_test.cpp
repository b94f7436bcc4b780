#include <flowforce/dj_solver.hpp>
#include <flowforce/format.hpp>
#include <flowforce/io.hpp>
#include <flowforce/svg.hpp>

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>

namespace ff = flowforce;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("flowforce_io_") + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void expect_bitwise(const ff::Grid2& a, const ff::Grid2& b) {
  ASSERT_EQ(a.nx(), b.nx());
  ASSERT_EQ(a.nz(), b.nz());
  for (std::size_t k = 0; k < a.size(); ++k)
    ASSERT_EQ(std::bit_cast<std::uint64_t>(a.data()[k]), std::bit_cast<std::uint64_t>(b.data()[k])) << k;
}

std::string schema_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const ff::SchemaError& e) {
    return e.what();
  }
  return "";
}

ff::HeightField noisy_height() {
  ff::HeightField h = ff::discrete_stream(ff::ProblemTag::irrotational_psi, 1.2, 12, 8, 4.7);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 1; j <= 8; ++j) h.h(i, j) += u(rng) / 3.0;
  h.head = 1.0 / 3.0 + 1.2;
  return h;
}

}  // namespace

TEST(Format, Numbers) {
  EXPECT_EQ(ff::format_number(1.0 / 3), "0.333333333333333");
  EXPECT_EQ(ff::format_number(2.0), "2");
  EXPECT_EQ(ff::format_number(1e-20), "1e-20");
  EXPECT_EQ(ff::format_number(std::nan("")), "nan");
  EXPECT_EQ(ff::format_exact(0.1), "0.1");
  double v = 0.0;
  EXPECT_TRUE(ff::parse_number(ff::format_exact(1.0 / 3), v));
  EXPECT_EQ(v, 1.0 / 3);
  EXPECT_TRUE(ff::parse_number(" +2.5\r", v));
  EXPECT_EQ(v, 2.5);
  EXPECT_FALSE(ff::parse_number("2.5x", v));
  EXPECT_FALSE(ff::parse_number("", v));
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(ff::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(ff::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(HeightContainer, BitwiseRoundTrip) {
  TempDir tmp;
  const ff::StoredHeightField s{noisy_height(), 3.5e-11, 1.234e-3, 2.0 / 3.0};
  ff::write_height_container(tmp.path() / "c", s);
  EXPECT_EQ(ff::container_kind(tmp.path() / "c"), "height_field");
  const ff::StoredHeightField r = ff::read_height_container(tmp.path() / "c");
  expect_bitwise(s.h.h, r.h.h);
  EXPECT_EQ(r.h.head, s.h.head);
  EXPECT_EQ(r.h.period, s.h.period);
  EXPECT_EQ(r.h.tag, s.h.tag);
  EXPECT_EQ(r.residual, s.residual);
  EXPECT_EQ(r.amplitude, s.amplitude);
  EXPECT_EQ(r.flow_force, s.flow_force);
  EXPECT_FALSE(fs::exists(tmp.path() / "c" / "h.csv.tmp"));
}

TEST(HeightContainer, ScaledHasNullFlowForce) {
  TempDir tmp;
  const ff::WaveSolution sol = ff::stream_solution(ff::ProblemTag::flow_force_scaled, 1.1, 8, 8, 2.0);
  ff::write_height_container(tmp.path(), ff::stored(sol));
  EXPECT_NE(ff::read_file(tmp.path() / "manifest.json").find("\"flow_force\": null"), std::string::npos);
  EXPECT_TRUE(std::isnan(ff::read_height_container(tmp.path()).flow_force));
}

TEST(WaveContainer, BitwiseRoundTrip) {
  TempDir tmp;
  ff::WaveField w = ff::make_stream_wave_field(1.3, 10, 9, 2.5);
  w.psi.values(3, 4) += 1.0 / 7.0;
  ff::write_wave_container(tmp.path(), w);
  const ff::WaveField r = ff::read_wave_container(tmp.path());
  expect_bitwise(w.psi.values, r.psi.values);
  EXPECT_EQ(r.psi.surface, w.psi.surface);
  EXPECT_EQ(r.bernoulli, w.bernoulli);
  EXPECT_EQ(r.tolerance, w.tolerance);
  EXPECT_EQ(r.psi.period, w.psi.period);
}

TEST(Schema, ManifestErrorsNameTheField) {
  TempDir tmp;
  ff::write_height_container(tmp.path(), ff::StoredHeightField{noisy_height(), 1e-12, 1e-3, 1.0});
  const fs::path mf = tmp.path() / "manifest.json";
  const std::string good = ff::read_file(mf);
  auto with = [&](const std::string& from, const std::string& to) {
    std::string m = good;
    const auto at = m.find(from);
    ASSERT_NE(at, std::string::npos) << from;
    m.replace(at, from.size(), to);
    ff::write_file_atomic(mf, m);
  };
  auto read = [&] { ff::read_height_container(tmp.path()); };

  with("\"head\"", "\"hed\"");
  EXPECT_NE(schema_message(read).find("missing field 'head'"), std::string::npos);
  with("\"nq\": 12", "\"nq\": \"12\"");
  EXPECT_NE(schema_message(read).find("field 'nq' has the wrong type"), std::string::npos);
  with("\"format\": 1", "\"format\": 2");
  EXPECT_NE(schema_message(read).find("unsupported format"), std::string::npos);
  with("\"irrotational", "\"rotational");
  EXPECT_FALSE(schema_message(read).empty());
  ff::write_file_atomic(mf, "{ not json");
  EXPECT_NE(schema_message(read).find("manifest.json"), std::string::npos);
  fs::remove(mf);
  EXPECT_NE(schema_message(read).find("cannot read"), std::string::npos);
}

TEST(Schema, GridErrorsNameTheLine) {
  TempDir tmp;
  ff::write_height_container(tmp.path(), ff::StoredHeightField{noisy_height(), 1e-12, 1e-3, 1.0});
  const fs::path block = tmp.path() / "h.csv";
  const std::string good = ff::read_file(block);
  auto read = [&] { ff::read_height_container(tmp.path()); };

  std::string bad = good;
  const auto third = bad.find('\n', bad.find('\n', bad.find('\n') + 1) + 1);  // end of line 3
  bad.insert(third, ",7");
  ff::write_file_atomic(block, bad);
  EXPECT_NE(schema_message(read).find("line 3: expected 10 fields, found 11"), std::string::npos);

  bad = good;
  const auto comma = bad.find(',', bad.find('\n') + 1);
  bad.replace(comma + 1, 1, "x");
  ff::write_file_atomic(block, bad);
  EXPECT_NE(schema_message(read).find("line 2, field 2: not a number"), std::string::npos);

  bad = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
  ff::write_file_atomic(block, bad);
  EXPECT_NE(schema_message(read).find("expected 12 rows, found 11"), std::string::npos);
}

TEST(Branch, SummaryIsDeterministic) {
  TempDir tmp;
  const ff::Branch a = ff::continue_branch(ff::ProblemTag::flow_force_scaled, 1.1, 0.004, 10, 32, 8);
  const ff::Branch b = ff::continue_branch(ff::ProblemTag::flow_force_scaled, 1.1, 0.004, 10, 32, 8);
  ff::write_branch(tmp.path() / "a", a);
  ff::write_branch(tmp.path() / "b", b);
  EXPECT_EQ(ff::read_file(tmp.path() / "a" / "branch.json"), ff::read_file(tmp.path() / "b" / "branch.json"));
  const auto pa = ff::container_provenance(tmp.path() / "a" / "point_001");
  const auto pb = ff::container_provenance(tmp.path() / "b" / "point_001");
  ASSERT_EQ(pa.size(), 2u);
  EXPECT_EQ(pa[0].path, "h.csv");
  EXPECT_EQ(pa[0].sha256, pb[0].sha256);
  EXPECT_EQ(pa[1].sha256, pb[1].sha256);
  const auto j = ff::json::parse(ff::read_file(tmp.path() / "a" / "branch.json"));
  EXPECT_EQ(j["points"].size(), a.points.size());
  EXPECT_EQ(j["points"][1]["container"], "point_001");
  EXPECT_TRUE(fs::exists(tmp.path() / "a" / "point_000" / "manifest.json"));
  const ff::StoredHeightField back = ff::read_height_container(tmp.path() / "a" / "point_002");
  expect_bitwise(back.h.h, a.points[2].h.h);
}

TEST(Report, JsonAndTable) {
  ff::CheckReport rep;
  rep.nq = 4;
  rep.np = 2;
  rep.inputs.push_back({"h.csv", ff::sha256_hex("abc")});
  rep.entries.push_back({"barrier", ff::CheckStatus::pass, 0.25, 0.0, "FF > r^2/2", ""});
  rep.entries.push_back({"region", ff::CheckStatus::skip, std::nan(""), -1e-9, "", "head below the cusp"});
  const ff::json j = ff::report_json(rep);
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["checks"][0]["value"], 0.25);
  EXPECT_TRUE(j["checks"][1]["value"].is_null());
  EXPECT_EQ(j["inputs"][0]["sha256"], ff::sha256_hex("abc"));
  const std::string t = ff::report_table(rep);
  EXPECT_NE(t.find("barrier"), std::string::npos);
  EXPECT_NE(t.find("verdict: pass"), std::string::npos);
}

TEST(Svg, DeterministicAndComplete) {
  const auto rows = ff::region_samples(1.5, 3.0, 64);
  const std::string a = ff::region_svg(rows);
  EXPECT_EQ(a, ff::region_svg(rows));
  EXPECT_EQ(a.rfind("<?xml", 0), 0u);
  EXPECT_NE(a.find("<svg xmlns"), std::string::npos);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  for (const char* s : {"F_minus", "F_plus", "r^2/2", "cusp", "Froude 2", "stroke-dasharray"}) EXPECT_NE(a.find(s), std::string::npos) << s;
  EXPECT_EQ(a.find("href"), std::string::npos);
}
