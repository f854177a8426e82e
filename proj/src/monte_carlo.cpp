#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "factorpred/errors.hpp"
#include "factorpred/factor_core.hpp"
#include "factorpred/regress.hpp"
#include "factorpred/simkit.hpp"

namespace factorpred {

namespace {

ReplicationRecord run_replication(const GroundTruth& truth, const Cell& cell, int index,
                                  std::uint64_t seed, const MonteCarloOptions& options) {
  ReplicationRecord record;
  record.index = index;
  record.seed = seed;
  try {
    const SimulatedDataset data = simulate(truth, cell.n_train, cell.p, options.n_test, seed);
    const AugmentedFactorEstimator estimator(data.training_panel());
    const Eigen::VectorXd response = data.training_response();
    Eigen::VectorXd predictions(options.n_test);
    std::vector<double> orders(options.n_test);
    for (int j = 0; j < options.n_test; ++j) {
      const Eigen::VectorXd row = data.panel.values().row(cell.n_train + j).transpose();
      const PredictionResult result = fit_predict(estimator, row, response, options.l_max);
      predictions[j] = result.prediction;
      orders[j] = result.order_used;
    }
    record.sse = sse(data.oracle, predictions);
    record.l_hat = median(std::move(orders));
    record.ok = true;
  } catch (const Error& e) {
    record.ok = false;
    record.error = std::string(code_name(e.code())) + ": " + e.what();
  }
  return record;
}

void summarize(CellReport& report) {
  std::vector<double> orders;
  double total = 0.0;
  for (const auto& rep : report.replications) {
    if (!rep.ok) continue;
    total += rep.sse;
    orders.push_back(rep.l_hat);
  }
  report.replications_ok = static_cast<int>(orders.size());
  report.mean_sse = orders.empty() ? std::nan("") : total / static_cast<double>(orders.size());
  report.median_l_hat = median(orders);
  const auto failed = report.replications.size() - orders.size();
  report.valid = !orders.empty() && failed * 10 <= report.replications.size();
}

// Runs body(task) for task in [0, tasks) on up to `threads` workers. The
// first exception escaping body is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t tasks, int threads, Body body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      try {
        body(task);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int count =
      std::max(1, std::min(threads > 0 ? threads : default_thread_count(),
                           static_cast<int>(std::min<std::size_t>(tasks, 1u << 20))));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("FACTORPRED_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

PredictionReport monte_carlo(const GroundTruth& truth, const std::vector<Cell>& cells,
                             int replications, std::uint64_t base_seed,
                             const MonteCarloOptions& options) {
  truth.validate();
  if (replications < 1) {
    throw Error(ErrorCode::kInvalidInput, "replications must be at least 1");
  }
  if (options.n_test < 1) {
    throw Error(ErrorCode::kInvalidInput, "Monte Carlo needs at least one test row");
  }

  PredictionReport report;
  report.cells.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    report.cells[c].cell = cells[c];
    report.cells[c].sigma_u = truth.sigma_u;
    report.cells[c].sigma_eps = truth.sigma_eps;
    report.cells[c].replications.resize(static_cast<std::size_t>(replications));
  }

  // Every task writes only its own slot, so the merge is by index.
  const auto reps = static_cast<std::size_t>(replications);
  parallel_for(cells.size() * reps, options.threads, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const int r = static_cast<int>(task % reps);
    report.cells[c].replications[task % reps] =
        run_replication(truth, cells[c], r, base_seed + static_cast<std::uint64_t>(r), options);
  });

  report.valid = true;
  for (auto& cell : report.cells) {
    summarize(cell);
    report.valid = report.valid && cell.valid;
  }
  return report;
}

}  // namespace factorpred

namespace factorpred {

std::vector<RotationRecord> rotation_study(const GroundTruth& truth, const std::vector<Cell>& cells,
                                           int replications, std::uint64_t base_seed,
                                           int threads) {
  truth.validate();
  if (replications < 1) {
    throw Error(ErrorCode::kInvalidInput, "replications must be at least 1");
  }
  const auto reps = static_cast<std::size_t>(replications);
  std::vector<RotationRecord> records(cells.size() * reps);
  parallel_for(records.size(), threads, [&](std::size_t task) {
    RotationRecord& rec = records[task];
    rec.cell = cells[task / reps];
    rec.index = static_cast<int>(task % reps);
    rec.seed = base_seed + static_cast<std::uint64_t>(rec.index);
    try {
      const SimulatedDataset data = simulate(truth, rec.cell.n_train, rec.cell.p, 1, rec.seed);
      const FactorFit fit = estimate_factors(data.panel, truth.true_order());
      rec.deviation = compute_rotation(fit, data.scores, data.loadings).deviation;
      rec.ok = true;
    } catch (const Error& e) {
      rec.error = std::string(code_name(e.code())) + ": " + e.what();
    }
  });
  return records;
}

}  // namespace factorpred
