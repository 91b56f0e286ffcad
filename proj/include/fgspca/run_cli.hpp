#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fgspca/commands.hpp"

namespace fgspca {

namespace cli_detail {

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!detail::parse_double(item, v))
      throw UsageError("not a number in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty numeric list");
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

// Flat key=value file; '#' starts a comment; flags override file values.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  auto kv = read_config_file(path);
  auto num = [&](const char* key, double& slot) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if (!detail::parse_double(it->second, slot))
      throw ParseError(path + ": bad number for " + std::string(key));
  };
  auto integer = [&](const char* key, int& slot) {
    double v = slot;
    num(key, v);
    slot = static_cast<int>(v);
  };
  if (kv.count("dataset")) cfg.dataset = kv["dataset"];
  if (kv.count("mode")) cfg.mode = kv["mode"];
  if (kv.count("has_header")) cfg.csv_has_header = kv["has_header"] == "true";
  integer("k", cfg.k);
  num("lambda", cfg.lambda);
  if (kv.count("lambda1")) cfg.lambda1 = parse_double_list(kv["lambda1"]);
  num("lambda2", cfg.lambda2);
  num("tau", cfg.tau);
  num("lambda3", cfg.lambda3);
  integer("max_alternations", cfg.max_alternations);
  num("alternation_tol", cfg.alternation_tol);
  num("rho", cfg.controls.rho);
  num("nu0", cfg.controls.nu0);
  num("delta_star", cfg.controls.delta_star);
  integer("max_inner", cfg.controls.max_inner);
  integer("max_outer", cfg.controls.max_outer);
  num("outer_tol", cfg.controls.outer_tol);
  num("group_tol", cfg.group_tol);
  num("zero_tol", cfg.zero_tol);
  if (kv.count("out")) cfg.out = kv["out"];
  if (kv.count("format")) cfg.format = kv["format"];
  if (kv.count("cardinalities"))
    cfg.cardinalities = parse_int_list(kv["cardinalities"]);
  if (kv.count("seed")) {
    double v;
    if (!detail::parse_double(kv["seed"], v))
      throw ParseError(path + ": bad number for seed");
    cfg.seed = static_cast<long>(v);
  }
}

inline void add_model_options(CLI::App* sub, RunConfig& cfg,
                              std::string& lambda1_str) {
  sub->add_option("--dataset", cfg.dataset,
                  "pitprops | hidden3 | hidden-groups | path to CSV");
  sub->add_option("--mode", cfg.mode, "CSV interpretation: data | covariance");
  sub->add_flag("--has-header", cfg.csv_has_header, "CSV has a header row");
  sub->add_option("--k", cfg.k, "number of components (0 = dataset default)");
  sub->add_option("--lambda", cfg.lambda, "ridge weight");
  sub->add_option("--lambda1", lambda1_str,
                  "selection weight, scalar or comma list per component");
  sub->add_option("--lambda2", cfg.lambda2, "grouping weight");
  sub->add_option("--tau", cfg.tau, "truncation threshold");
  sub->add_option("--lambda3", cfg.lambda3, "non-negativity weight");
  sub->add_option("--max-alternations", cfg.max_alternations, "alternation cap");
  sub->add_option("--alternation-tol", cfg.alternation_tol,
                  "max-abs B change to declare convergence");
  sub->add_option("--rho", cfg.controls.rho, "penalty growth factor");
  sub->add_option("--nu0", cfg.controls.nu0, "initial penalty weight");
  sub->add_option("--delta-star", cfg.controls.delta_star, "inner tolerance");
  sub->add_option("--max-inner", cfg.controls.max_inner, "inner iteration cap");
  sub->add_option("--max-outer", cfg.controls.max_outer, "outer iteration cap");
  sub->add_option("--outer-tol", cfg.controls.outer_tol,
                  "relative objective-decrease floor");
  sub->add_option("--group-tol", cfg.group_tol, "group equivalence tolerance");
  sub->add_option("--zero-tol", cfg.zero_tol, "nonzero threshold");
  sub->add_option("--out", cfg.out, "output directory");
  sub->add_option("--format", cfg.format, "report format: csv | json");
  sub->add_option("--seed", [&cfg](const CLI::results_t& res) {
    double v;
    if (!detail::parse_double(res[0], v)) return false;
    cfg.seed = static_cast<long>(v);
    return true;
  }, "random seed");
}

}  // namespace cli_detail

// Parses argv-style arguments, dispatches the subcommand, maps errors to exit
// codes: 0 success, 1 usage, 2 data error, 3 solver divergence.
inline int run_cli(std::vector<std::string> args, std::ostream& err = std::cerr) {
  RunConfig cfg;
  std::string lambda1_str, cards_str, grid1_str, grid2_str, config_path;

  // Config file first, flags override: scan for --config before CLI11 binds
  // defaults from cfg.
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  try {
    if (!config_path.empty()) cli_detail::apply_config_file(cfg, config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Feature grouping and sparse principal component analysis"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file");
    cli_detail::add_model_options(sub, cfg, lambda1_str);
    return sub;
  };

  auto* fit_cmd = add_common(app.add_subcommand("fit", "FGSPCA fit"));
  auto* pca_cmd = add_common(app.add_subcommand("pca", "ordinary PCA loadings"));
  auto* spca_cmd = add_common(
      app.add_subcommand("spca", "sparse PCA (lasso selection, no grouping)"));
  auto* thr_cmd = add_common(
      app.add_subcommand("threshold", "simple thresholding baseline"));
  thr_cmd->add_option("--cardinalities", cards_str,
                      "comma list, kept entries per component");
  auto* nn_cmd = add_common(app.add_subcommand("nnfit", "non-negative FGSPCA"));
  auto* gen_cmd = add_common(app.add_subcommand("gen", "write a dataset matrix"));
  gen_cmd->add_option("--sample-n", cfg.sample_n,
                      "draw this many rows from the hidden3 model");
  auto* rep_cmd = add_common(
      app.add_subcommand("report", "variance report for supplied loadings"));
  rep_cmd->add_option("--loadings", cfg.loadings_path, "loadings CSV");
  rep_cmd->add_option("--method", cfg.method_tag,
                      "complexity convention: fgspca|spca|pca|threshold");
  auto* grid_cmd = add_common(app.add_subcommand("grid", "penalty grid sweep"));
  grid_cmd->add_option("--lambda1-grid", grid1_str, "comma list of lambda1 values");
  grid_cmd->add_option("--lambda2-grid", grid2_str, "comma list of lambda2 values");
  auto* plot_cmd = app.add_subcommand("plotdata", "long-format series from results");
  plot_cmd->add_option("files", cfg.result_files, "result.json files");
  plot_cmd->add_option("--out", cfg.out, "output directory");

  std::vector<const char*> argv;
  argv.push_back("fgspca");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (!lambda1_str.empty()) cfg.lambda1 = cli_detail::parse_double_list(lambda1_str);
    if (!cards_str.empty()) cfg.cardinalities = cli_detail::parse_int_list(cards_str);
    if (!grid1_str.empty()) cfg.lambda1_grid = cli_detail::parse_double_list(grid1_str);
    if (!grid2_str.empty()) cfg.lambda2_grid = cli_detail::parse_double_list(grid2_str);

    if (fit_cmd->parsed()) {
      cfg.command = "fit";
      cmd_fit(cfg);
    } else if (pca_cmd->parsed()) {
      cfg.command = "pca";
      cmd_pca(cfg);
    } else if (spca_cmd->parsed()) {
      cfg.command = "spca";
      cmd_spca(cfg);
    } else if (thr_cmd->parsed()) {
      cfg.command = "threshold";
      cmd_threshold(cfg);
    } else if (nn_cmd->parsed()) {
      cfg.command = "nnfit";
      cmd_nnfit(cfg);
    } else if (gen_cmd->parsed()) {
      cfg.command = "gen";
      cmd_gen(cfg);
    } else if (rep_cmd->parsed()) {
      cfg.command = "report";
      cmd_report(cfg);
    } else if (grid_cmd->parsed()) {
      cfg.command = "grid";
      cmd_grid(cfg);
    } else if (plot_cmd->parsed()) {
      cfg.command = "plotdata";
      cmd_plotdata(cfg);
    }
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "solver divergence: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fgspca
