#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli_app.hpp"
#include "support.hpp"

using namespace varifold;
using vt::v2;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, {out, err});
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("varifold_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = (dir_ / name).string();
    io::write_text(p, text);
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(Io, RoundTripIsBitExact) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto V = vt::random_varifold(n, rng);
    const auto C = vt::random_cone(n, rng, 3, 0.1);
    const auto doc = io::document_from_json(io::parse_json(io::dump(io::to_json(V, &C))));
    EXPECT_TRUE(vt::same_pieces(doc.discrete, V, 0.0));
    ASSERT_TRUE(doc.conic.has_value());
    EXPECT_TRUE(vt::same_atoms(doc.conic->atoms(), C.atoms(), 0.0, 0.0));
    // canonical output is deterministic
    EXPECT_EQ(io::dump(io::to_json(V)), io::dump(io::to_json(doc.discrete)));
  }
  const ConicVarifold D(2, {}, SphereDensity::sample("trapezoid:16", [](const Vec& z) { return 1 + z[0] * z[0]; }));
  const auto back = io::document_from_json(io::to_json(D));
  EXPECT_EQ(back.conic->density()->values(), D.density()->values());
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}

TEST(Io, SchemaErrors) {
  EXPECT_THROW(io::document_from_json(io::parse_json("[]")), InvalidInput);
  EXPECT_THROW(io::document_from_json(io::parse_json(R"({"segments": []})")), InvalidInput);
  EXPECT_THROW(io::document_from_json(io::parse_json(R"({"ambient_dim": 2, "segments": [{"a": [0,0], "b": [1], "weight": 1}]})")),
               InvalidInput);
  EXPECT_THROW(io::document_from_json(io::parse_json(R"({"ambient_dim": 2, "rays": [{"origin": [0,0], "direction": [1,0]}]})")),
               InvalidInput);
  EXPECT_THROW(io::parse_json("{"), InvalidInput);
  EXPECT_THROW(io::parse_number_list("1,,2", "x"), InvalidInput);
  EXPECT_THROW(io::parse_number_list("1,a", "x"), InvalidInput);
  EXPECT_EQ(io::parse_number_list("[0.5, 0.25]", "x"), (std::vector<double>{0.5, 0.25}));
}

TEST(Io, SubspaceForms) {
  const auto a = io::subspace_from_json(io::parse_json(R"({"ambient_dim": 3, "basis": [[1,0,0],[0,1,0]]})"));
  const auto b = io::subspace_from_json(io::parse_json(R"([[1,0,0],[0,1,0]])"));
  EXPECT_EQ(a.basis(), b.basis());
  EXPECT_THROW(io::subspace_from_json(io::parse_json(R"([[1,0,0],[1,1,0]])")), InvalidInput);
  EXPECT_EQ(io::subspace_from_json(io::subspace_to_json(a)).basis(), a.basis());
}

TEST(Io, MeasurementCsvRoundTrip) {
  std::mt19937_64 rng(62);
  const auto C = vt::random_cone(3, rng, 3, 0.1);
  const auto rows = measurement_table(forward_oracle(C), normal_battery(3));
  const auto back = io::measurements_from_csv(io::measurements_csv(rows));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].v, rows[i].v);
    EXPECT_EQ(back[i].xi, rows[i].xi);
    EXPECT_EQ(back[i].s, rows[i].s);
    EXPECT_EQ(back[i].band_mass, rows[i].band_mass);
  }
  EXPECT_THROW(io::measurements_from_csv("a,b\n1,2\n"), InvalidInput);
  EXPECT_THROW(io::measurements_from_csv("v1,v2,xi1,xi2,s,t,band_mass\n1,0,0,1,0,1\n"), InvalidInput);
}

TEST_F(CliTest, CheckStationaryYJunction) {
  const auto in = write("y.json", io::dump(io::to_json(vt::y_junction())));
  const auto r = run_cli({"check-stationary", in});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("max_residual,", 0), 0u);
  EXPECT_LE(std::stod(r.out.substr(13, r.out.find('\n') - 13)), 1e-15);
  EXPECT_NE(r.out.find("stationary,true\n"), std::string::npos);
  EXPECT_NE(r.out.find("x1,x2,omega1,omega2,mass"), std::string::npos);

  DiscreteVarifold seg(2);
  seg.add(SegmentPiece(v2(0, 0), v2(1, 0), 1.0));
  const auto r2 = run_cli({"check-stationary", write("s.json", io::dump(io::to_json(seg))), "--out-dir", path("o")});
  EXPECT_EQ(r2.code, 0);
  const auto table = io::read_text(path("o/residuals.csv"));
  EXPECT_NE(table.find("max_residual,1\n"), std::string::npos);
  EXPECT_NE(table.find("0,0,-1,0,1\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("o/check-stationary_manifest.json")));
}

TEST_F(CliTest, ProjectRemarkExample) {
  DiscreteVarifold L(2);
  add_line(L, v2(0, 0), v2(1, 1));
  const auto in = write("l.json", io::dump(io::to_json(L)));
  const auto sub = write("p.json", R"([[1, 0]])");
  const auto w = run_cli({"project", in, "--subspace", sub, "--weighted"});
  ASSERT_EQ(w.code, 0) << w.err;
  const auto doc = io::document_from_json(io::parse_json(w.out));
  EXPECT_NEAR(*density(doc.discrete, Vec::Constant(1, 1.0)).value, std::sqrt(2.0) / 2, 1e-15);
  const auto m = run_cli({"project", in, "--subspace", sub, "--mapping"});
  EXPECT_EQ(*density(io::document_from_json(io::parse_json(m.out)).discrete, Vec::Constant(1, 1.0)).value, 1.0);
  EXPECT_EQ(run_cli({"project", in, "--subspace", sub, "--mapping", "--weighted"}).code, 2);
  EXPECT_EQ(run_cli({"project", in, "--subspace", path("missing.json")}).code, 2);
}

TEST_F(CliTest, SurgeryWritesOutputsAndManifest) {
  DiscreteVarifold chord(2);
  add_line(chord, v2(0, 0.3), v2(1, 0));
  const auto in = write("c.json", io::dump(io::to_json(chord)));
  const auto r = run_cli({"surgery", in, "--center", "0,0", "--radius", "1", "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto combined = io::read_document(path("o/surgery_combined.json")).discrete;
  EXPECT_TRUE(is_stationary(combined, 1e-12).stationary);
  const auto manifest = io::parse_json(io::read_text(path("o/surgery_manifest.json")));
  for (const auto& p : manifest["outputs"]) EXPECT_TRUE(fs::exists(p.get<std::string>()));
  EXPECT_EQ(manifest["tool_version"], kVersion);

  DiscreteVarifold tangent(2);
  add_line(tangent, v2(0, 1), v2(1, 0));
  const auto bad = run_cli({"surgery", write("t.json", io::dump(io::to_json(tangent))), "--center", "0,0", "--radius", "1",
                            "--out-dir", path("o2")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.err.rfind("DegenerateGeometry", 0), 0u);
}

TEST_F(CliTest, CounterexampleColumn) {
  const auto r = run_cli({"counterexample", "--directions", "360"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "angle,m_V1,m_V2,diff");
  int rows = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    const auto cells = io::split_csv_line(line);
    worst = std::max(worst, std::abs(std::stod(cells[3])));
    ++rows;
  }
  EXPECT_EQ(rows, 360);
  EXPECT_LT(worst, 1e-10);
}

TEST_F(CliTest, ReconstructRoundTripAndFromMeasurements) {
  std::mt19937_64 rng(63);
  const auto C = vt::random_cone(3, rng, 10, 1e-2);
  const auto in = write("cone.json", io::dump(io::to_json(C)));
  const auto r = run_cli({"reconstruct", in, "--report", path("errors.csv"), "--emit-measurements", path("m.csv"),
                          "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(io::read_text(path("errors.csv")));
  std::string line;
  std::getline(table, line);
  int rows = 0;
  while (std::getline(table, line)) {
    const auto cells = io::split_csv_line(line);
    EXPECT_LE(std::stod(cells[cells.size() - 2]), 1e-6);
    EXPECT_LE(std::stod(cells.back()), 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 10);

  const auto r2 = run_cli({"reconstruct", "--from-measurements", path("m.csv"), "--out-dir", path("o2")});
  ASSERT_EQ(r2.code, 0) << r2.err;
  const auto rec = io::read_document(path("o2/reconstruction.json"));
  EXPECT_TRUE(vt::same_atoms(rec.conic->atoms(), C.atoms(), 1e-6, 1e-6));

  EXPECT_EQ(run_cli({"reconstruct", write("bad.csv", "v1,v2\n")}).code, 2);
}

TEST_F(CliTest, BlowupAndFixture) {
  const auto in = write("y.json", io::dump(io::to_json(vt::y_junction())));
  const auto r = run_cli({"blowup", in, "--point", "0,0", "--lambdas", "0.5,0.25,0.125", "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_text(path("o/blowup_diagnostics.csv")), "lambda,weak_star_distance\n0.5,0\n0.25,0\n0.125,0\n");
  EXPECT_EQ(io::read_document(path("o/blowup_cone.json")).conic->atoms().size(), 3u);
  const auto zero = run_cli({"blowup", in, "--point", "3,3", "--lambdas", "0.5", "--out-dir", path("o")});
  EXPECT_EQ(zero.code, 1);
  EXPECT_EQ(zero.err.rfind("ZeroDensity", 0), 0u);

  const auto f = run_cli({"fixture", "dense-lines", "--k", "5", "--seed", "2", "--out-dir", path("f")});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto V = io::read_document(path("f/dense_lines.json")).discrete;
  EXPECT_EQ(V.rays.size(), 10u);
  // determinism
  const auto g = run_cli({"fixture", "dense-lines", "--k", "5", "--seed", "2", "--out-dir", path("g")});
  EXPECT_EQ(io::read_text(path("f/dense_lines_growth.csv")), io::read_text(path("g/dense_lines_growth.csv")));
  EXPECT_EQ(io::read_text(path("f/dense_lines.json")), io::read_text(path("g/dense_lines.json")));
}

TEST(Cli, UsageErrors) {
  const auto r = run_cli({"no-such-command"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"surgery", "x.json", "--radius", "1"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}
