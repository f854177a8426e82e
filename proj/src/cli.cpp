#include "factorpred/cli.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "factorpred/csv_io.hpp"
#include "factorpred/factor_core.hpp"
#include "factorpred/regress.hpp"

namespace factorpred {

namespace {

using nlohmann::json;

constexpr std::string_view kInvalidReportCode = "E_INVALID_REPORT";

const std::vector<int> kBenchT{100, 200, 500, 1000};
const std::vector<int> kBenchP{48, 96, 192};
const std::vector<int> kDiagnoseT{100, 1000};
const std::vector<int> kDiagnoseP{100, 400};

struct CommandLineState {
  std::string slope = "smooth";
  std::string format = "csv";
  std::string panel, response, out;
  std::optional<int> order;
};

void build_app(CLI::App& app, RunConfig& cfg, CommandLineState& st) {
  app.set_config("--config", "", "Read flags from a 'key = value' file (flags on the command line win)");
  app.require_subcommand(1, 1);
  app.add_option("--panel", st.panel, "Panel CSV: grid row followed by one row per curve");
  app.add_option("--response", st.response, "Response CSV: one value per line");
  app.add_option("--lmax", cfg.l_max, "Largest order considered by GCV")->capture_default_str();
  app.add_option("--order", st.order, "Fixed number of factors (predict, diagnose)");
  app.add_option("--out", st.out, "Output file (fit, predict, bench, diagnose) or directory (simulate)");
  app.add_option("--format", st.format, "Output format: csv or json")->capture_default_str();
  app.add_option("--seed", cfg.sim.seed, "Base seed")->capture_default_str();
  app.add_option("--reps", cfg.sim.replications, "Replications per cell")->capture_default_str();
  app.add_option("--T", cfg.sim.T, "Training sizes (comma separated for bench/diagnose)")
      ->delimiter(',');
  app.add_option("--p", cfg.sim.p, "Grid sizes (comma separated for bench/diagnose)")
      ->delimiter(',');
  app.add_option("--ntest", cfg.sim.n_test, "Test curves per replication")->capture_default_str();
  app.add_option("--sigma-u", cfg.sim.sigma_u, "Measurement noise standard deviation")
      ->capture_default_str();
  app.add_option("--sigma-eps", cfg.sim.sigma_eps, "Regression error standard deviation")
      ->capture_default_str();
  app.add_option("--slope", st.slope, "Slope function: smooth or rough")->capture_default_str();
  app.add_option("--rho", cfg.sim.rho, "AR(1) correlation of the noise along each curve")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (0: FACTORPRED_THREADS or all cores)")
      ->capture_default_str();

  const std::pair<const char*, const char*> commands[] = {
      {"fit", "Select the number of factors by GCV and write the GCV trace"},
      {"predict", "Predict the response of the last panel row"},
      {"simulate", "Write a simulated dataset"},
      {"bench", "Monte Carlo prediction benchmark over a (T, p) grid"},
      {"diagnose", "Rotation-matrix diagnostic over a (T, p) grid"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
}

Command command_from(const CLI::App& app) {
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "fit") return Command::kFit;
  if (name == "predict") return Command::kPredict;
  if (name == "simulate") return Command::kSimulate;
  if (name == "bench") return Command::kBench;
  return Command::kDiagnose;
}

void finish_config(const CLI::App& app, RunConfig& cfg, const CommandLineState& st) {
  cfg.command = command_from(app);
  cfg.panel_path = st.panel;
  cfg.response_path = st.response;
  cfg.output_path = st.out;
  cfg.order = st.order;
  cfg.format = parse_format(st.format);
  if (st.slope == "smooth") {
    cfg.sim.slope = SlopeKind::kSmooth;
  } else if (st.slope == "rough") {
    cfg.sim.slope = SlopeKind::kRough;
  } else {
    throw Error(ErrorCode::kConfig, "unknown slope '" + st.slope + "' (use smooth or rough)");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, message);
}

std::vector<Cell> cartesian(const std::vector<int>& ts, const std::vector<int>& ps) {
  std::vector<Cell> cells;
  for (int t : ts)
    for (int p : ps) cells.push_back({t, p});
  return cells;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output_path.empty()) {
    out << text;
  } else {
    write_text_file(cfg.output_path, text);
  }
}

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_metadata(const RunConfig& cfg, double seconds) {
  const json meta{{"command", cfg.command == Command::kBench ? "bench" : "diagnose"},
                  {"started_utc", utc_timestamp()},
                  {"elapsed_seconds", seconds},
                  {"threads", cfg.threads > 0 ? cfg.threads : default_thread_count()}};
  write_text_file(sibling(cfg.output_path, "_meta.json"), meta.dump(2) + "\n");
}

json trace_json(const std::vector<GcvPoint>& trace) {
  json out = json::array();
  for (const auto& pt : trace) {
    out.push_back({{"ell", pt.ell}, {"gcv", pt.gcv}, {"residual_ss", pt.residual_ss}});
  }
  return out;
}

void warn_if_capped(std::ostream& log, int requested, int n_train, int p) {
  const int cap = admissible_max_order(n_train, p);
  if (requested > cap) {
    log << "warning: l_max " << requested << " capped to " << cap << " (T = " << n_train
        << ", p = " << p << ")\n";
  }
}

void run_fit(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const CurvePanel panel = load_panel_csv(cfg.panel_path);
  const Eigen::VectorXd response = load_vector_csv(cfg.response_path);
  warn_if_capped(log, cfg.l_max, static_cast<int>(response.size()),
                 static_cast<int>(panel.n_points()));
  const OrderSelection sel = select_order(panel, response, cfg.l_max);

  if (cfg.format == OutputFormat::kJson) {
    const json doc{{"selected_order", sel.order},
                   {"l_max_requested", sel.l_max_requested},
                   {"l_max_used", sel.l_max_used},
                   {"capped", sel.capped},
                   {"gcv_trace", trace_json(sel.trace)}};
    emit(cfg, out, doc.dump(2) + "\n");
    return;
  }
  std::string text = "ell,gcv,residual_ss,selected\n";
  for (const auto& pt : sel.trace) {
    text += std::to_string(pt.ell) + ',' + format_double(pt.gcv) + ',' +
            format_double(pt.residual_ss) + ',' + (pt.ell == sel.order ? "1" : "0") + '\n';
  }
  emit(cfg, out, text);
}

void run_predict(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const CurvePanel panel = load_panel_csv(cfg.panel_path);
  const Eigen::VectorXd response = load_vector_csv(cfg.response_path);
  PredictionResult result;
  if (cfg.order) {
    result = predict_next(panel, response, *cfg.order);
  } else {
    warn_if_capped(log, cfg.l_max, static_cast<int>(response.size()),
                   static_cast<int>(panel.n_points()));
    result = fit_predict(panel, response, cfg.l_max);
  }

  if (cfg.format == OutputFormat::kJson) {
    json doc{{"prediction", result.prediction},
             {"order_used", result.order_used},
             {"formula_prediction", result.formula_prediction},
             {"score_new", std::vector<double>(result.score_new.data(),
                                               result.score_new.data() + result.score_new.size())}};
    if (!result.gcv_trace.empty()) doc["gcv_trace"] = trace_json(result.gcv_trace);
    emit(cfg, out, doc.dump(2) + "\n");
    return;
  }
  std::string text = "name,value\n";
  text += "prediction," + format_double(result.prediction) + '\n';
  text += "order_used," + std::to_string(result.order_used) + '\n';
  text += "formula_prediction," + format_double(result.formula_prediction) + '\n';
  for (Eigen::Index l = 0; l < result.score_new.size(); ++l) {
    text += "score_" + std::to_string(l + 1) + ',' + format_double(result.score_new[l]) + '\n';
  }
  emit(cfg, out, text);
}

GroundTruth configured_truth(const RunConfig& cfg) {
  return default_ground_truth(cfg.sim.slope, cfg.sim.sigma_u, cfg.sim.sigma_eps, cfg.sim.rho);
}

void run_simulate(const RunConfig& cfg) {
  const int t = cfg.sim.T.empty() ? 100 : cfg.sim.T.front();
  const int p = cfg.sim.p.empty() ? 96 : cfg.sim.p.front();
  const SimulatedDataset data = simulate(configured_truth(cfg), t, p, cfg.sim.n_test, cfg.sim.seed);

  const auto& dir = cfg.output_path;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory '" + dir.string() + "'");

  save_panel_csv(data.panel, dir / "panel.csv");
  save_panel_csv(CurvePanel(data.signal, data.panel.grid()), dir / "signal.csv");
  std::vector<std::string> names;
  for (Eigen::Index l = 0; l < data.scores.cols(); ++l) names.push_back("f" + std::to_string(l + 1));
  save_matrix_csv(data.scores, dir / "scores.csv", names);
  save_matrix_csv(data.loadings, dir / "loadings.csv", names);
  save_vector_csv(data.response, dir / "response.csv", "y");
  save_vector_csv(data.oracle, dir / "oracle.csv", "oracle");
  save_vector_csv(data.training_response(), dir / "train_response.csv", "y");
  if (data.n_test > 0) save_panel_csv(data.panel_with_test(0), dir / "predict_panel.csv");

  const Eigen::VectorXd& b = data.coefficients.slope;
  const json meta{{"T", data.n_train},
                  {"p", p},
                  {"n_test", data.n_test},
                  {"seed", data.seed},
                  {"sigma_u", cfg.sim.sigma_u},
                  {"sigma_eps", cfg.sim.sigma_eps},
                  {"rho", cfg.sim.rho},
                  {"slope", cfg.sim.slope == SlopeKind::kSmooth ? "smooth" : "rough"},
                  {"true_order", data.scores.cols()},
                  {"intercept", data.coefficients.intercept},
                  {"coefficients", std::vector<double>(b.data(), b.data() + b.size())}};
  write_text_file(dir / "dataset.json", meta.dump(2) + "\n");
}

int run_bench(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  const auto cells = cartesian(cfg.sim.T.empty() ? kBenchT : cfg.sim.T,
                               cfg.sim.p.empty() ? kBenchP : cfg.sim.p);
  MonteCarloOptions options;
  options.n_test = cfg.sim.n_test;
  options.l_max = cfg.l_max;
  options.threads = cfg.threads;
  const PredictionReport report =
      monte_carlo(configured_truth(cfg), cells, cfg.sim.replications, cfg.sim.seed, options);

  emit(cfg, out, render_report(report_rows(report), cfg.format));
  if (!cfg.output_path.empty()) {
    write_text_file(sibling(cfg.output_path, "_long.csv"), render_replications(report));
    write_metadata(cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  if (!report.valid) {
    log << error_record(kInvalidReportCode, 4,
                        "more than 10% of the replications failed in at least one cell")
        << '\n';
    return 4;
  }
  return 0;
}

void run_diagnose(const RunConfig& cfg, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const auto cells = cartesian(cfg.sim.T.empty() ? kDiagnoseT : cfg.sim.T,
                               cfg.sim.p.empty() ? kDiagnoseP : cfg.sim.p);
  const int order = cfg.order.value_or(3);
  const GroundTruth truth =
      diagnostic_ground_truth(order, cfg.sim.slope, cfg.sim.sigma_u, cfg.sim.sigma_eps);
  const auto records =
      rotation_study(truth, cells, cfg.sim.replications, cfg.sim.seed, cfg.threads);

  json rows = json::array();
  std::string csv = "T,p,sigma_u,order,median_deviation,mean_deviation,replications_ok\n";
  std::string long_csv = "T,p,replication,seed,ok,deviation\n";
  const auto reps = static_cast<std::size_t>(cfg.sim.replications);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> devs;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rec = records[c * reps + r];
      long_csv += std::to_string(rec.cell.n_train) + ',' + std::to_string(rec.cell.p) + ',' +
                  std::to_string(rec.index) + ',' + std::to_string(rec.seed) + ',' +
                  (rec.ok ? "1," + format_double(rec.deviation) : std::string("0,nan")) + '\n';
      if (rec.ok) devs.push_back(rec.deviation);
    }
    double total = 0.0;
    for (double d : devs) total += d;
    const double mean = devs.empty() ? std::nan("") : total / static_cast<double>(devs.size());
    const double med = median(devs);
    csv += std::to_string(cells[c].n_train) + ',' + std::to_string(cells[c].p) + ',' +
           format_double(cfg.sim.sigma_u) + ',' + std::to_string(order) + ',' +
           format_double(med) + ',' + format_double(mean) + ',' + std::to_string(devs.size()) +
           '\n';
    rows.push_back({{"T", cells[c].n_train},
                    {"p", cells[c].p},
                    {"sigma_u", cfg.sim.sigma_u},
                    {"order", order},
                    {"median_deviation", std::isfinite(med) ? json(med) : json(nullptr)},
                    {"mean_deviation", std::isfinite(mean) ? json(mean) : json(nullptr)},
                    {"replications_ok", devs.size()}});
  }
  emit(cfg, out, cfg.format == OutputFormat::kJson ? rows.dump(2) + "\n" : csv);
  if (!cfg.output_path.empty()) {
    write_text_file(sibling(cfg.output_path, "_long.csv"), long_csv);
    write_metadata(cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
}

}  // namespace

std::string error_record(std::string_view code, int exit_code, std::string_view message) {
  const json doc{{"error", {{"code", code}, {"exit_code", exit_code}, {"message", message}}}};
  return doc.dump();
}

RunConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"factorpred"};
  RunConfig cfg;
  CommandLineState st;
  build_app(app, cfg, st);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  finish_config(app, cfg, st);
  return cfg;
}

void validate(const RunConfig& cfg) {
  const auto& sim = cfg.sim;
  require(cfg.l_max >= 1, "--lmax must be at least 1");
  require(!cfg.order || *cfg.order >= 1, "--order must be at least 1");
  require(cfg.threads >= 0, "--threads must be non-negative");
  require(sim.replications >= 1, "--reps must be at least 1");
  require(sim.n_test >= 0, "--ntest must be non-negative");
  require(sim.sigma_u >= 0.0 && sim.sigma_eps >= 0.0, "noise levels must be non-negative");
  require(sim.rho >= 0.0 && sim.rho <= 0.9, "--rho must lie in [0, 0.9]");
  for (int t : sim.T) require(t >= 10, "--T values must be at least 10");
  for (int p : sim.p) require(p >= 4, "--p values must be at least 4");

  switch (cfg.command) {
    case Command::kFit:
    case Command::kPredict:
      require(!cfg.panel_path.empty(), "--panel is required");
      require(!cfg.response_path.empty(), "--response is required");
      break;
    case Command::kSimulate:
      require(!cfg.output_path.empty(), "simulate needs --out (a directory)");
      require(sim.T.size() <= 1 && sim.p.size() <= 1, "simulate takes a single --T and --p");
      break;
    case Command::kBench:
      require(sim.n_test >= 1, "bench needs --ntest >= 1");
      break;
    case Command::kDiagnose:
      break;
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    validate(cfg);
    switch (cfg.command) {
      case Command::kFit: run_fit(cfg, out, log); return 0;
      case Command::kPredict: run_predict(cfg, out, log); return 0;
      case Command::kSimulate: run_simulate(cfg); return 0;
      case Command::kBench: return run_bench(cfg, out, log);
      case Command::kDiagnose: run_diagnose(cfg, out); return 0;
    }
  } catch (const Error& e) {
    log << error_record(code_name(e.code()), exit_code(e.code()), e.what()) << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    log << error_record("E_INTERNAL", 4, e.what()) << '\n';
    return 4;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Factor-model prediction for scalar-on-function regression", "factorpred"};
  RunConfig cfg;
  CommandLineState st;
  build_app(app, cfg, st);
  try {
    app.parse(argc, argv);
    finish_config(app, cfg, st);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_record(code_name(ErrorCode::kConfig), 2, e.what()) << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << error_record(code_name(e.code()), exit_code(e.code()), e.what()) << '\n';
    return exit_code(e.code());
  }
  return run(cfg, std::cout, std::cerr);
}

}  // namespace factorpred
