#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgspca/csv.hpp"
#include "fgspca/datasets.hpp"
#include "fgspca/fgspca.hpp"
#include "fgspca/variance.hpp"

namespace fgspca {

// Wrong invocation rather than bad data; maps to exit code 1.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

struct RunConfig {
  std::string command;   // fit | pca | spca | threshold | nnfit | gen | report | grid | plotdata
  std::string dataset;   // builtin name or CSV path
  std::string mode;      // data | covariance (CSV datasets only)
  bool csv_has_header{false};

  int k{0};  // 0 = dataset default (pitprops 6, hidden3 2, otherwise 2)
  double lambda{0.05};
  std::vector<double> lambda1{0.1};
  double lambda2{0.005};
  double tau{0.05};
  double lambda3{0.0};
  int max_alternations{200};
  double alternation_tol{1e-6};

  SolverControls controls;

  std::string out{"."};
  std::string format{"csv"};
  std::optional<long> seed;
  double group_tol{0.01};  // CLI-level default, suited to table-precision loadings
  double zero_tol{1e-4};

  std::vector<int> cardinalities;          // threshold
  std::vector<double> lambda1_grid;        // grid
  std::vector<double> lambda2_grid;        // grid
  std::string loadings_path;               // report
  std::string method_tag;                  // report complexity convention
  std::vector<std::string> result_files;   // plotdata
  int sample_n{0};                         // gen
};

namespace cli_detail {

inline DatasetInput resolve_dataset(const RunConfig& cfg) {
  if (cfg.dataset == "pitprops") return pitprops();
  if (cfg.dataset == "hidden3") return hidden_factors_covariance();
  if (cfg.dataset == "hidden-groups") return hidden_groups_covariance();
  if (cfg.dataset.empty()) throw UsageError("no dataset given");
  if (cfg.mode == "data")
    return load_csv(cfg.dataset, cfg.csv_has_header, DataKind::data_matrix);
  if (cfg.mode == "covariance")
    return load_csv(cfg.dataset, cfg.csv_has_header, DataKind::covariance);
  throw UsageError("CSV dataset '" + cfg.dataset +
                   "' needs --mode data|covariance");
}

inline int default_k(const RunConfig& cfg, const DatasetInput& data) {
  if (cfg.k > 0) return cfg.k;
  if (cfg.dataset == "pitprops") return 6;
  if (cfg.dataset == "hidden3") return 2;
  return std::min<int>(2, static_cast<int>(data.n_variables()));
}

inline std::vector<std::string> names_or_default(const DatasetInput& data) {
  if (!data.variable_names.empty() &&
      data.variable_names.size() == static_cast<size_t>(data.n_variables()))
    return data.variable_names;
  return numbered_names(static_cast<int>(data.n_variables()));
}

inline std::filesystem::path out_path(const RunConfig& cfg,
                                      const std::string& file) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / file;
}

inline std::vector<std::string> pc_header(int k, const std::string& first) {
  std::vector<std::string> h{first};
  for (int j = 1; j <= k; ++j) h.push_back("PC" + std::to_string(j));
  return h;
}

inline void write_loadings_csv(const RunConfig& cfg, const Matrix& v,
                               const std::vector<std::string>& names) {
  std::ofstream out(out_path(cfg, "loadings.csv"));
  if (!out) throw IoError("cannot write loadings.csv");
  auto h = pc_header(static_cast<int>(v.cols()), "variable");
  for (size_t j = 0; j < h.size(); ++j) out << (j ? "," : "") << h[j];
  out << "\n";
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out << names[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      out << "," << format_value(v(i, j), 10);
    out << "\n";
  }
}

inline void write_report_csv(const std::string& path, const VarianceReport& rep) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const int k = static_cast<int>(rep.group_counts.size());
  auto h = pc_header(k, "row");
  for (size_t j = 0; j < h.size(); ++j) out << (j ? "," : "") << h[j];
  out << "\n";
  auto ints = [&](const std::string& label, const std::vector<int>& xs) {
    out << label;
    for (int x : xs) out << "," << x;
    out << "\n";
  };
  auto reals = [&](const std::string& label, const std::vector<double>& xs) {
    out << label;
    for (double x : xs) out << "," << format_value(x);
    out << "\n";
  };
  ints("No. of Groups", rep.group_counts);
  ints("No. of Nonzeroes", rep.nonzero_counts);
  reals("Variance (%)", rep.per_pc_variance_pct);
  reals("Adjusted Variance (%)", rep.per_pc_adjusted_pct);
  reals("Cum. Adj. Variance (%)", rep.cumulative_adjusted_pct);
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json report_to_json(const VarianceReport& rep) {
  return nlohmann::json{
      {"method", rep.method},
      {"groups", rep.group_counts},
      {"nonzeros", rep.nonzero_counts},
      {"variance_pct", rep.per_pc_variance_pct},
      {"adjusted_variance_pct", rep.per_pc_adjusted_pct},
      {"cumulative_adjusted_pct", rep.cumulative_adjusted_pct},
      {"total_variance", rep.total_variance},
      {"model_complexity", rep.model_complexity},
      {"zero_column", rep.zero_column}};
}

inline nlohmann::json config_to_json(const RunConfig& cfg, int k) {
  nlohmann::json j{
      {"dataset", cfg.dataset},
      {"k", k},
      {"lambda", cfg.lambda},
      {"lambda1", cfg.lambda1},
      {"lambda2", cfg.lambda2},
      {"tau", cfg.tau},
      {"lambda3", cfg.lambda3},
      {"max_alternations", cfg.max_alternations},
      {"alternation_tol", cfg.alternation_tol},
      {"group_tol", cfg.group_tol},
      {"zero_tol", cfg.zero_tol},
      {"controls",
       {{"rho", cfg.controls.rho},
        {"nu0", cfg.controls.nu0},
        {"delta_star", cfg.controls.delta_star},
        {"max_inner", cfg.controls.max_inner},
        {"max_outer", cfg.controls.max_outer},
        {"outer_tol", cfg.controls.outer_tol}}}};
  if (cfg.seed) j["seed"] = *cfg.seed;
  return j;
}

inline void write_result_json(const RunConfig& cfg, const std::string& method,
                              const FgspcaResult* fit_result, const Matrix& v,
                              const VarianceReport& rep,
                              const std::vector<std::string>& names, int k) {
  nlohmann::json j{{"command", cfg.command},
                   {"method", method},
                   {"config", config_to_json(cfg, k)},
                   {"variable_names", names},
                   {"loadings", matrix_to_json(v)},
                   {"report", report_to_json(rep)}};
  if (fit_result) {
    j["converged"] = fit_result->converged;
    j["alternations"] = fit_result->alternations;
    j["objective_trace"] = fit_result->objective_trace;
    j["covariance_clamped"] = fit_result->covariance_clamped;
    j["a"] = matrix_to_json(fit_result->a);
    j["b"] = matrix_to_json(fit_result->b);
  }
  std::ofstream out(out_path(cfg, "result.json"));
  if (!out) throw IoError("cannot write result.json");
  out << j.dump(2) << "\n";
}

inline void write_reports(const RunConfig& cfg, const VarianceReport& rep) {
  write_report_csv(out_path(cfg, "report.csv").string(), rep);
  if (cfg.format == "json") {
    std::ofstream out(out_path(cfg, "report.json"));
    if (!out) throw IoError("cannot write report.json");
    out << report_to_json(rep).dump(2) << "\n";
  }
}

struct NamedLoadings {
  Matrix v;
  std::vector<std::string> names;
};

// Loadings CSV reader tolerant of an optional header row and an optional
// leading variable-name column (the layout cmd_fit writes).
inline NamedLoadings read_loadings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    lines.push_back(detail::split_csv_line(line));
  }
  if (lines.empty()) throw ParseError(path + ": empty file");
  double tmp;
  size_t first_row = detail::parse_double(lines[0].back(), tmp) ? 0 : 1;
  if (first_row >= lines.size()) throw ParseError(path + ": no data rows");
  const bool label_col = !detail::parse_double(lines[first_row][0], tmp);
  const size_t c0 = label_col ? 1 : 0;
  const size_t width = lines[first_row].size();
  NamedLoadings out;
  out.v.resize(static_cast<Eigen::Index>(lines.size() - first_row),
               static_cast<Eigen::Index>(width - c0));
  for (size_t i = first_row; i < lines.size(); ++i) {
    if (lines[i].size() != width)
      throw ParseError(path + ":" + std::to_string(i + 1) + ": ragged row");
    if (label_col) out.names.push_back(lines[i][0]);
    for (size_t c = c0; c < width; ++c) {
      double val;
      if (!detail::parse_double(lines[i][c], val))
        throw ParseError(path + ":" + std::to_string(i + 1) + ":" +
                         std::to_string(c + 1) + ": not a number");
      out.v(static_cast<Eigen::Index>(i - first_row),
            static_cast<Eigen::Index>(c - c0)) = val;
    }
  }
  return out;
}

// Bad model parameters are a usage problem, not a data problem.
inline void validate_for_usage(const FgspcaConfig& mc, Eigen::Index p) {
  try {
    mc.validate(p);
  } catch (const InvalidInputError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace cli_detail

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts under cfg.out and returns normally;
// errors surface as exceptions which run_cli maps to exit codes.
// ---------------------------------------------------------------------------

inline void cmd_fit(const RunConfig& cfg, Method method = Method::fgspca) {
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  const int k = cli_detail::default_k(cfg, data);
  FgspcaConfig mc;
  mc.k = k;
  mc.lambda = cfg.lambda;
  mc.lambda1 = cfg.lambda1;
  mc.lambda2 = cfg.lambda2;
  mc.tau = cfg.tau;
  mc.lambda3 = cfg.lambda3;
  mc.max_alternations = cfg.max_alternations;
  mc.alternation_tol = cfg.alternation_tol;
  cli_detail::validate_for_usage(mc, data.n_variables());
  FgspcaResult res = cfg.lambda3 > 0.0 ? fit_nn(data, mc, cfg.controls)
                                       : fit(data, mc, cfg.controls);
  VarianceReport rep = make_variance_report(res.design, res.v, method,
                                            cfg.group_tol, cfg.zero_tol);
  auto names = cli_detail::names_or_default(data);
  cli_detail::write_loadings_csv(cfg, res.v, names);
  cli_detail::write_reports(cfg, rep);
  cli_detail::write_result_json(cfg, method_to_string(method), &res, res.v, rep,
                                names, k);
}

inline void cmd_nnfit(const RunConfig& cfg) {
  if (!(cfg.lambda3 > 0.0)) throw UsageError("nnfit: requires --lambda3 > 0");
  cmd_fit(cfg);
}

inline void cmd_spca(const RunConfig& cfg) {
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  const int k = cli_detail::default_k(cfg, data);
  std::vector<double> l1 = cfg.lambda1;
  if (l1.size() != 1 && l1.size() != static_cast<size_t>(k))
    throw UsageError("spca: --lambda1 needs 1 or k values");
  if (l1.size() == 1) l1.assign(static_cast<size_t>(k), l1[0]);
  FgspcaResult res = fit_spca(data, k, cfg.lambda, l1, cfg.controls);
  VarianceReport rep = make_variance_report(res.design, res.v, Method::spca,
                                            cfg.group_tol, cfg.zero_tol);
  auto names = cli_detail::names_or_default(data);
  cli_detail::write_loadings_csv(cfg, res.v, names);
  cli_detail::write_reports(cfg, rep);
  cli_detail::write_result_json(cfg, "spca", &res, res.v, rep, names, k);
}

inline void cmd_pca(const RunConfig& cfg) {
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  const int k = cli_detail::default_k(cfg, data);
  bool clamped = false;
  const Matrix x = detail::design_from(data, &clamped);
  const Matrix v = svd(x).v.leftCols(k);
  VarianceReport rep =
      make_variance_report(x, v, Method::pca, cfg.group_tol, cfg.zero_tol);
  auto names = cli_detail::names_or_default(data);
  cli_detail::write_loadings_csv(cfg, v, names);
  cli_detail::write_reports(cfg, rep);
  cli_detail::write_result_json(cfg, "pca", nullptr, v, rep, names, k);
}

inline void cmd_threshold(const RunConfig& cfg) {
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  const int k = cli_detail::default_k(cfg, data);
  if (cfg.cardinalities.size() != static_cast<size_t>(k))
    throw UsageError("threshold: --cardinalities needs exactly k values");
  bool clamped = false;
  const Matrix x = detail::design_from(data, &clamped);
  const Matrix pca_v = svd(x).v.leftCols(k);
  const Matrix v = simple_threshold_loadings(pca_v, cfg.cardinalities);
  VarianceReport rep = make_variance_report(x, v, Method::threshold,
                                            cfg.group_tol, cfg.zero_tol);
  auto names = cli_detail::names_or_default(data);
  cli_detail::write_loadings_csv(cfg, v, names);
  cli_detail::write_reports(cfg, rep);
  cli_detail::write_result_json(cfg, "threshold", nullptr, v, rep, names, k);
}

inline void cmd_report(const RunConfig& cfg) {
  if (cfg.loadings_path.empty()) throw UsageError("report: needs --loadings FILE");
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  cli_detail::NamedLoadings in = cli_detail::read_loadings_csv(cfg.loadings_path);
  if (in.v.rows() != data.n_variables())
    throw InvalidInputError("report: loadings have " +
                            std::to_string(in.v.rows()) + " rows, dataset has " +
                            std::to_string(data.n_variables()) + " variables");
  Matrix v = in.v;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double nrm = v.col(j).norm();
    if (std::abs(nrm - 1.0) > 1e-3)
      throw InvalidInputError("report: column " + std::to_string(j + 1) +
                              " norm " + std::to_string(nrm) +
                              " not unit within 1e-3");
    if (nrm != 1.0) {
      if (std::abs(nrm - 1.0) > 1e-9)
        std::cerr << "report: renormalizing column " << (j + 1) << " (norm "
                  << nrm << ")\n";
      v.col(j) /= nrm;
    }
  }
  bool clamped = false;
  const Matrix x = detail::design_from(data, &clamped);
  const Method method = cfg.method_tag.empty()
                            ? Method::fgspca
                            : method_from_string(cfg.method_tag);
  VarianceReport rep =
      make_variance_report(x, v, method, cfg.group_tol, cfg.zero_tol);
  cli_detail::write_reports(cfg, rep);
  cli_detail::write_result_json(cfg, method_to_string(method), nullptr, v, rep,
                                cli_detail::names_or_default(data),
                                static_cast<int>(v.cols()));
}

inline void cmd_gen(const RunConfig& cfg) {
  DatasetInput data;
  if (cfg.sample_n > 0) {
    if (cfg.dataset != "hidden3")
      throw UsageError("gen: sampling is defined for --dataset hidden3 only");
    data = sample_hidden_factors(cfg.sample_n,
                                 static_cast<unsigned long>(cfg.seed.value_or(0)));
  } else {
    data = cli_detail::resolve_dataset(cfg);
  }
  auto names = cli_detail::names_or_default(data);
  write_csv(cli_detail::out_path(cfg, "matrix.csv").string(), names, data.matrix,
            {}, 10);
}

inline void cmd_grid(const RunConfig& cfg) {
  DatasetInput data = cli_detail::resolve_dataset(cfg);
  const int k = cli_detail::default_k(cfg, data);
  std::vector<double> grid1 =
      cfg.lambda1_grid.empty() ? cfg.lambda1 : cfg.lambda1_grid;
  std::vector<double> grid2 =
      cfg.lambda2_grid.empty() ? std::vector<double>{cfg.lambda2} : cfg.lambda2_grid;
  std::ofstream out(cli_detail::out_path(cfg, "grid.csv"));
  if (!out) throw IoError("cannot write grid.csv");
  out << "lambda1,lambda2,status,converged,groups,nonzeros,"
         "cum_adj_variance_pct,model_complexity\n";
  for (double l1 : grid1)
    for (double l2 : grid2) {
      out << format_value(l1, 6) << "," << format_value(l2, 6) << ",";
      try {
        FgspcaConfig mc;
        mc.k = k;
        mc.lambda = cfg.lambda;
        mc.lambda1 = {l1};
        mc.lambda2 = l2;
        mc.tau = cfg.tau;
        mc.lambda3 = cfg.lambda3;
        mc.max_alternations = cfg.max_alternations;
        mc.alternation_tol = cfg.alternation_tol;
        FgspcaResult res = fit(data, mc, cfg.controls);
        VarianceReport rep = make_variance_report(
            res.design, res.v, Method::fgspca, cfg.group_tol, cfg.zero_tol);
        std::string groups, nonzeros;
        for (size_t j = 0; j < rep.group_counts.size(); ++j) {
          groups += (j ? ";" : "") + std::to_string(rep.group_counts[j]);
          nonzeros += (j ? ";" : "") + std::to_string(rep.nonzero_counts[j]);
        }
        out << "ok," << (res.converged ? "true" : "false") << "," << groups
            << "," << nonzeros << ","
            << format_value(rep.cumulative_adjusted_pct.back()) << ","
            << rep.model_complexity << "\n";
      } catch (const Error& e) {
        std::string what = e.what();
        for (char& c : what)
          if (c == ',' || c == '\n') c = ';';
        out << "error:" << what << ",,,,\n";
      }
    }
}

inline void cmd_plotdata(const RunConfig& cfg) {
  if (cfg.result_files.empty()) throw UsageError("plotdata: needs result.json files");
  std::ofstream pev(cli_detail::out_path(cfg, "pev.csv"));
  std::ofstream cum(cli_detail::out_path(cfg, "cumvar.csv"));
  std::ofstream cx(cli_detail::out_path(cfg, "complexity.csv"));
  if (!pev || !cum || !cx) throw IoError("cannot write plotdata outputs");
  pev << "method,component,value\n";
  cum << "method,component,value\n";
  cx << "method,value\n";
  for (const auto& path : cfg.result_files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("method") || !j.contains("report"))
      throw InvalidInputError(path + ": not a result.json (missing method/report)");
    const std::string method = j["method"];
    const auto& rep = j["report"];
    if (!rep.contains("variance_pct") || !rep.contains("cumulative_adjusted_pct") ||
        !rep.contains("model_complexity"))
      throw InvalidInputError(path + ": report block incomplete");
    const auto raw = rep["variance_pct"].get<std::vector<double>>();
    const auto cumv = rep["cumulative_adjusted_pct"].get<std::vector<double>>();
    for (size_t i = 0; i < raw.size(); ++i)
      pev << method << "," << (i + 1) << "," << format_value(raw[i]) << "\n";
    for (size_t i = 0; i < cumv.size(); ++i)
      cum << method << "," << (i + 1) << "," << format_value(cumv[i]) << "\n";
    cx << method << "," << rep["model_complexity"].get<long>() << "\n";
  }
}

}  // namespace fgspca
