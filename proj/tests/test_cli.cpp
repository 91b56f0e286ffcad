#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fgspca/run_cli.hpp"

using namespace fgspca;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fgspca_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream err;
  const int code = run_cli(std::move(args), err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_row(const std::string& content,
                                 const std::string& label) {
  std::stringstream ss(content);
  std::string line;
  while (std::getline(ss, line)) {
    auto cells = detail::split_csv_line(line);
    if (!cells.empty() && cells[0] == label) return cells;
  }
  return {};
}

const std::vector<std::string> kHidden3FitArgs{
    "--dataset", "hidden3", "--k", "2",    "--tau",     "0.2",
    "--lambda",  "30",      "--lambda1", "6", "--lambda2", "0.01",
    "--delta-star", "1e-7"};

}  // namespace

TEST(Cli, FitWritesArtifactsAndReproducesReference) {
  TempDir dir("fit");
  std::vector<std::string> args{"fit"};
  args.insert(args.end(), kHidden3FitArgs.begin(), kHidden3FitArgs.end());
  args.insert(args.end(), {"--out", dir.str()});
  ASSERT_EQ(run(args), 0);
  ASSERT_TRUE(fs::exists(dir.file("loadings.csv")));
  ASSERT_TRUE(fs::exists(dir.file("report.csv")));
  ASSERT_TRUE(fs::exists(dir.file("result.json")));

  auto cum = csv_row(slurp(dir.file("report.csv")), "Cum. Adj. Variance (%)");
  ASSERT_EQ(cum.size(), 3u);
  EXPECT_NEAR(std::stod(cum.back()), 98.39, 0.5);
  auto groups = csv_row(slurp(dir.file("report.csv")), "No. of Groups");
  EXPECT_EQ(groups[1], "2");
  EXPECT_EQ(groups[2], "1");

  nlohmann::json j;
  std::ifstream(dir.file("result.json")) >> j;
  EXPECT_EQ(j["method"], "fgspca");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_EQ(j["config"]["k"], 2);
  auto trace = j["objective_trace"].get<std::vector<double>>();
  for (size_t i = 0; i + 1 < trace.size(); ++i)
    EXPECT_LE(trace[i + 1], trace[i] + 1e-8);
}

TEST(Cli, RidgeOnlyFitMatchesSvdLoadings) {
  TempDir dir("lemma2");
  ASSERT_EQ(run({"fit", "--dataset", "pitprops", "--k", "6", "--lambda1", "0",
                 "--lambda2", "0", "--out", dir.str()}),
            0);
  auto loaded = cli_detail::read_loadings_csv(dir.file("loadings.csv"));
  DatasetInput d = pitprops();
  Matrix ref = svd(psd_root(d.matrix).root).v.leftCols(6);
  for (int j = 0; j < 6; ++j) {
    double cos = std::abs(loaded.v.col(j).dot(ref.col(j))) /
                 (loaded.v.col(j).norm() * ref.col(j).norm());
    EXPECT_GT(cos, 1.0 - 1e-5);
  }
  EXPECT_EQ(loaded.names.front(), "topdiam");
}

TEST(Cli, MissingCsvPathGivesDataError) {
  TempDir dir("badpath");
  std::string err;
  const int code = run({"fit", "--dataset", "/no/such/file.csv", "--mode",
                        "data", "--out", dir.str()},
                       &err);
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("/no/such/file.csv"), std::string::npos);
}

TEST(Cli, ThresholdReproducesReferenceBlock) {
  TempDir dir("thr");
  ASSERT_EQ(run({"threshold", "--dataset", "hidden3", "--k", "2",
                 "--cardinalities", "4,4", "--out", dir.str()}),
            0);
  auto cum = csv_row(slurp(dir.file("report.csv")), "Cum. Adj. Variance (%)");
  EXPECT_NEAR(std::stod(cum[1]), 38.88, 0.5);
  EXPECT_NEAR(std::stod(cum[2]), 77.61, 0.5);
  auto loaded = cli_detail::read_loadings_csv(dir.file("loadings.csv"));
  for (int l = 0; l < 6; ++l) EXPECT_EQ(loaded.v(l, 0), 0.0);
  for (int l = 6; l < 10; ++l) EXPECT_NE(loaded.v(l, 0), 0.0);
}

TEST(Cli, SpcaReproducesReferenceBlock) {
  TempDir dir("spca");
  ASSERT_EQ(run({"spca", "--dataset", "hidden3", "--k", "2", "--lambda", "0",
                 "--lambda1", "400,120", "--out", dir.str()}),
            0);
  auto cum = csv_row(slurp(dir.file("report.csv")), "Cum. Adj. Variance (%)");
  EXPECT_NEAR(std::stod(cum[1]), 41.02, 0.5);
  EXPECT_NEAR(std::stod(cum[2]), 80.67, 0.5);
  auto nnz = csv_row(slurp(dir.file("report.csv")), "No. of Nonzeroes");
  EXPECT_EQ(nnz[1], "4");
  EXPECT_EQ(nnz[2], "4");
}

TEST(Cli, ReportRoundTripIsByteStable) {
  TempDir dir("round");
  std::vector<std::string> args{"fit"};
  args.insert(args.end(), kHidden3FitArgs.begin(), kHidden3FitArgs.end());
  args.insert(args.end(), {"--out", dir.str()});
  ASSERT_EQ(run(args), 0);
  const std::string first = slurp(dir.file("report.csv"));

  TempDir dir2("round2");
  ASSERT_EQ(run({"report", "--dataset", "hidden3", "--loadings",
                 dir.file("loadings.csv"), "--method", "fgspca", "--out",
                 dir2.str()}),
            0);
  EXPECT_EQ(slurp(dir2.file("report.csv")), first);
}

TEST(Cli, ReportVerbatimReferenceBlocks) {
  TempDir dir("t1");
  {
    std::ofstream out(dir.file("fgspca_loadings.csv"));
    out << "variable,PC1,PC2,PC3,PC4,PC5,PC6\n"
        << "topdiam,-0.373,0.293,0,0,0,0\n"
        << "length,-0.373,0.293,0,0,0,0\n"
        << "moist,0,0,0.704,0,0,0\n"
        << "testsg,0,0,0.710,0,0,0\n"
        << "ovensg,0,-0.621,0,0,0,0\n"
        << "ringtop,-0.373,-0.368,0,0,-0.387,0\n"
        << "ringbut,-0.373,-0.368,0,0,0,0\n"
        << "bowmax,-0.373,0,0,0,0.479,0\n"
        << "bowdist,-0.373,0.293,0,0,0,0\n"
        << "whorls,-0.373,0,0,0.418,0,0\n"
        << "clear,0,0,0,-0.908,0,0\n"
        << "knots,0.110,0,0,0,-0.788,0\n"
        << "diaknot,0.110,0.293,0,0,0,1\n";
  }
  ASSERT_EQ(run({"report", "--dataset", "pitprops", "--loadings",
                 dir.file("fgspca_loadings.csv"), "--method", "fgspca",
                 "--out", dir.str()}),
            0);
  const std::string rep = slurp(dir.file("report.csv"));
  auto cum = csv_row(rep, "Cum. Adj. Variance (%)");
  const std::vector<double> want{31.0, 44.7, 58.6, 66.7, 74.4, 78.9};
  for (int j = 0; j < 6; ++j)
    EXPECT_NEAR(std::stod(cum[static_cast<size_t>(j + 1)]),
                want[static_cast<size_t>(j)], 0.3);
  nlohmann::json j;
  std::ifstream(dir.file("result.json")) >> j;
  EXPECT_EQ(j["report"]["model_complexity"].get<long>(), 12);
}

TEST(Cli, ReportRejectsBadNorms) {
  TempDir dir("badnorm");
  {
    std::ofstream out(dir.file("loadings.csv"));
    out << "0.5,0\n0.5,0.9\n0.5,0\n0.5,0\n0,0\n0,0\n0,0\n0,0\n0,0\n0,0\n";
  }
  std::string err;
  EXPECT_EQ(run({"report", "--dataset", "hidden3", "--loadings",
                 dir.file("loadings.csv"), "--out", dir.str()},
                &err),
            2);
  EXPECT_NE(err.find("norm"), std::string::npos);
}

TEST(Cli, GridSweepsAndMatchesFit) {
  TempDir dir("grid");
  ASSERT_EQ(run({"grid", "--dataset", "hidden3", "--k", "2", "--tau", "0.2",
                 "--lambda", "30", "--delta-star", "1e-7", "--lambda1-grid",
                 "6,12", "--lambda2-grid", "0.01,0.05", "--out", dir.str()}),
            0);
  const std::string grid = slurp(dir.file("grid.csv"));
  std::stringstream ss(grid);
  std::string line;
  std::getline(ss, line);  // header
  int rows = 0, converged = 0;
  while (std::getline(ss, line)) {
    ++rows;
    if (line.find(",ok,true,") != std::string::npos) ++converged;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(converged, 4);

  // degenerate single-point grid equals cmd_fit's numbers
  TempDir dir2("grid1");
  ASSERT_EQ(run({"grid", "--dataset", "hidden3", "--k", "2", "--tau", "0.2",
                 "--lambda", "30", "--delta-star", "1e-7", "--lambda1-grid",
                 "6", "--lambda2-grid", "0.01", "--out", dir2.str()}),
            0);
  TempDir dir3("gridfit");
  std::vector<std::string> args{"fit"};
  args.insert(args.end(), kHidden3FitArgs.begin(), kHidden3FitArgs.end());
  args.insert(args.end(), {"--out", dir3.str()});
  ASSERT_EQ(run(args), 0);
  auto cum = csv_row(slurp(dir3.file("report.csv")), "Cum. Adj. Variance (%)");
  const std::string cell = cum.back();
  EXPECT_NE(slurp(dir2.file("grid.csv")).find("," + cell + ","),
            std::string::npos);
}

TEST(Cli, GridZeroPenaltiesKeepEverything) {
  TempDir dir("grid0");
  ASSERT_EQ(run({"grid", "--dataset", "hidden3", "--k", "2", "--lambda1-grid",
                 "0", "--lambda2-grid", "0", "--out", dir.str()}),
            0);
  const std::string grid = slurp(dir.file("grid.csv"));
  EXPECT_NE(grid.find(",10;10,"), std::string::npos);  // nonzeros = p per component
}

TEST(Cli, PlotdataSeries) {
  TempDir fitdir("pd_fit");
  std::vector<std::string> args{"fit"};
  args.insert(args.end(), kHidden3FitArgs.begin(), kHidden3FitArgs.end());
  args.insert(args.end(), {"--out", fitdir.str()});
  ASSERT_EQ(run(args), 0);
  TempDir spcadir("pd_spca");
  ASSERT_EQ(run({"spca", "--dataset", "hidden3", "--k", "2", "--lambda", "0",
                 "--lambda1", "400,120", "--out", spcadir.str()}),
            0);
  TempDir out("pd_out");
  ASSERT_EQ(run({"plotdata", fitdir.file("result.json"),
                 spcadir.file("result.json"), "--out", out.str()}),
            0);
  const std::string cum = slurp(out.file("cumvar.csv"));
  // final cumulative values near the printed 98.39 / 80.67
  double fg_end = 0.0, spca_end = 0.0;
  {
    std::stringstream ss(cum);
    std::string line;
    while (std::getline(ss, line)) {
      auto cells = detail::split_csv_line(line);
      if (cells.size() == 3 && cells[1] == "2") {
        if (cells[0] == "fgspca") fg_end = std::stod(cells[2]);
        if (cells[0] == "spca") spca_end = std::stod(cells[2]);
      }
    }
  }
  EXPECT_NEAR(fg_end, 98.39, 0.5);
  EXPECT_NEAR(spca_end, 80.67, 0.5);
  const std::string cx = slurp(out.file("complexity.csv"));
  EXPECT_NE(cx.find("fgspca,"), std::string::npos);
  const std::string pev = slurp(out.file("pev.csv"));
  EXPECT_EQ(pev.substr(0, 23), "method,component,value\n");

  std::string err;
  EXPECT_EQ(run({"plotdata", "--out", out.str()}, &err), 1);
  TempDir bad("pd_bad");
  {
    std::ofstream o(bad.file("x.json"));
    o << "{\"no\": 1}";
  }
  EXPECT_EQ(run({"plotdata", bad.file("x.json"), "--out", out.str()}, &err), 2);
  EXPECT_NE(err.find("x.json"), std::string::npos);
}

TEST(Cli, PlotdataComplexityPairFromPitpropsReports) {
  // reference loading blocks through cmd_report, then plotdata: the model
  // complexity series is (18, 12).
  TempDir dir("cxpair");
  {
    std::ofstream out(dir.file("fg.csv"));
    out << "-0.373,0.293,0,0,0,0\n-0.373,0.293,0,0,0,0\n0,0,0.704,0,0,0\n"
        << "0,0,0.710,0,0,0\n0,-0.621,0,0,0,0\n-0.373,-0.368,0,0,-0.387,0\n"
        << "-0.373,-0.368,0,0,0,0\n-0.373,0,0,0,0.479,0\n-0.373,0.293,0,0,0,0\n"
        << "-0.373,0,0,0.418,0,0\n0,0,0,-0.908,0,0\n0.110,0,0,0,-0.788,0\n"
        << "0.110,0.293,0,0,0,1\n";
  }
  {
    std::ofstream out(dir.file("sp.csv"));
    out << "-0.477,0,0,0,0,0\n-0.476,0,0,0,0,0\n0,0.785,0,0,0,0\n"
        << "0,0.619,0,0,0,0\n0.177,0,0.641,0,0,0\n0,0,0.589,0,0,0\n"
        << "-0.250,0,0.492,0,0,0\n-0.344,-0.021,0,0,0,0\n-0.416,0,0,0,0,0\n"
        << "-0.400,0,0,0,0,0\n0,0,0,-1,0,0\n0,0.013,0,0,-1,0\n"
        << "0,0,-0.016,0,0,1\n";
  }
  TempDir fgout("cx_fg"), spout("cx_sp"), pd("cx_pd");
  ASSERT_EQ(run({"report", "--dataset", "pitprops", "--loadings",
                 dir.file("fg.csv"), "--method", "fgspca", "--out",
                 fgout.str()}),
            0);
  ASSERT_EQ(run({"report", "--dataset", "pitprops", "--loadings",
                 dir.file("sp.csv"), "--method", "spca", "--out",
                 spout.str()}),
            0);
  ASSERT_EQ(run({"plotdata", spout.file("result.json"),
                 fgout.file("result.json"), "--out", pd.str()}),
            0);
  const std::string cx = slurp(pd.file("complexity.csv"));
  EXPECT_NE(cx.find("spca,18"), std::string::npos);
  EXPECT_NE(cx.find("fgspca,12"), std::string::npos);
}

TEST(Cli, DeterministicArtifacts) {
  TempDir a("det_a"), b("det_b");
  ASSERT_EQ(run({"gen", "--dataset", "hidden3", "--sample-n", "50", "--seed",
                 "9", "--out", a.str()}),
            0);
  ASSERT_EQ(run({"gen", "--dataset", "hidden3", "--sample-n", "50", "--seed",
                 "9", "--out", b.str()}),
            0);
  EXPECT_EQ(slurp(a.file("matrix.csv")), slurp(b.file("matrix.csv")));

  TempDir c("det_c"), d("det_d");
  std::vector<std::string> args{"fit"};
  args.insert(args.end(), kHidden3FitArgs.begin(), kHidden3FitArgs.end());
  auto ac = args;
  ac.insert(ac.end(), {"--out", c.str()});
  auto ad = args;
  ad.insert(ad.end(), {"--out", d.str()});
  ASSERT_EQ(run(ac), 0);
  ASSERT_EQ(run(ad), 0);
  EXPECT_EQ(slurp(c.file("loadings.csv")), slurp(d.file("loadings.csv")));
  EXPECT_EQ(slurp(c.file("report.csv")), slurp(d.file("report.csv")));
}

TEST(Cli, GenWritesCovariance) {
  TempDir dir("gen");
  ASSERT_EQ(run({"gen", "--dataset", "pitprops", "--out", dir.str()}), 0);
  CsvTable t = read_csv(dir.file("matrix.csv"), true);
  EXPECT_EQ(t.values.rows(), 13);
  EXPECT_EQ(t.header.front(), "topdiam");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir("conf");
  {
    std::ofstream out(dir.file("run.conf"));
    out << "# hidden3 reproduction\n"
        << "dataset=hidden3\n"
        << "k=2\n"
        << "tau=0.2\n"
        << "lambda=30\n"
        << "lambda1=6\n"
        << "lambda2=0.01\n"
        << "delta_star=1e-7\n";
  }
  ASSERT_EQ(run({"fit", "--config", dir.file("run.conf"), "--lambda2", "0.05",
                 "--out", dir.str()}),
            0);
  nlohmann::json j;
  std::ifstream(dir.file("result.json")) >> j;
  EXPECT_DOUBLE_EQ(j["config"]["lambda2"].get<double>(), 0.05);  // flag wins
  EXPECT_DOUBLE_EQ(j["config"]["tau"].get<double>(), 0.2);       // file value
}

TEST(Cli, UsageErrors) {
  std::string err;
  EXPECT_EQ(run({"frobnicate"}, &err), 1);
  EXPECT_EQ(run({"threshold", "--dataset", "hidden3", "--k", "2",
                 "--cardinalities", "4"},
                &err),
            1);
  EXPECT_EQ(run({"nnfit", "--dataset", "hidden3"}, &err), 1);
  EXPECT_EQ(run({"fit", "--dataset", "somefile.csv"}, &err), 1);  // no --mode
  EXPECT_EQ(run({"threshold", "--dataset", "hidden3", "--k", "2",
                 "--cardinalities", "4,40"},
                &err),
            2);  // cardinality beyond p is a data error
  EXPECT_EQ(run({"fit", "--dataset", "hidden3", "--k", "99"}, &err), 1);
  EXPECT_NE(err.find("exceeds"), std::string::npos);
}

TEST(Cli, PcaReportsEigenShares) {
  TempDir dir("pca");
  ASSERT_EQ(run({"pca", "--dataset", "hidden3", "--k", "3", "--format", "json",
                 "--out", dir.str()}),
            0);
  nlohmann::json j;
  std::ifstream(dir.file("result.json")) >> j;
  const auto raw = j["report"]["variance_pct"].get<std::vector<double>>();
  const auto cum =
      j["report"]["cumulative_adjusted_pct"].get<std::vector<double>>();
  EXPECT_NEAR(raw[0], 60.04, 0.3);
  EXPECT_NEAR(raw[1], 39.64, 0.3);
  EXPECT_GE(cum[1], 99.5);
  EXPECT_TRUE(fs::exists(dir.file("report.json")));  // --format json extra
  EXPECT_TRUE(fs::exists(dir.file("report.csv")));
  std::string err;
  EXPECT_EQ(run({"gen", "--dataset", "hidden3", "--sample-n", "5", "--seed",
                 "oops", "--out", dir.str()},
                &err),
            1);
}

TEST(Cli, GenLoadRoundTrip) {
  TempDir dir("genload");
  ASSERT_EQ(run({"gen", "--dataset", "pitprops", "--out", dir.str()}), 0);
  DatasetInput loaded =
      load_csv(dir.file("matrix.csv"), true, DataKind::covariance);
  DatasetInput ref = pitprops();
  EXPECT_LT((loaded.matrix - ref.matrix).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(loaded.variable_names, ref.variable_names);
}

TEST(Cli, ConfigFileErrorsAreDataErrors) {
  TempDir dir("confbad");
  {
    std::ofstream out(dir.file("bad.conf"));
    out << "tau=not_a_number\n";
  }
  std::string err;
  EXPECT_EQ(run({"fit", "--config", dir.file("bad.conf")}, &err), 2);
  EXPECT_NE(err.find("tau"), std::string::npos);
  EXPECT_EQ(run({"fit", "--config=" + dir.file("missing.conf")}, &err), 2);
}

TEST(Cli, NnfitRuns) {
  TempDir dir("nn");
  ASSERT_EQ(run({"nnfit", "--dataset", "hidden3", "--k", "1", "--lambda1", "0",
                 "--lambda2", "0", "--lambda3", "100", "--out", dir.str()}),
            0);
  nlohmann::json j;
  std::ifstream(dir.file("result.json")) >> j;
  EXPECT_EQ(j["method"], "fgspca");
  EXPECT_DOUBLE_EQ(j["config"]["lambda3"].get<double>(), 100.0);
}
