#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "factorpred/simkit.hpp"

namespace factorpred {

enum class OutputFormat { kCsv, kJson };

/// One summary line of a Monte Carlo cell, shaped like the published tables.
struct ReportRow {
  int T = 0;
  int p = 0;
  double sigma_u = 0.0;
  double sigma_eps = 0.0;
  double mean_sse = 0.0;
  double median_L_hat = 0.0;
  int replications_ok = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::vector<ReportRow> report_rows(const PredictionReport& report);

/// CSV (columns T, p, sigma_u, sigma_eps, mean_sse, median_L_hat,
/// replications_ok) or a JSON array of records; rows sorted by T, then p.
std::string render_report(std::vector<ReportRow> rows, OutputFormat format);
void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path,
                  OutputFormat format);
std::vector<ReportRow> parse_report(const std::string& text, OutputFormat format);

/// Tidy per-replication table: T, p, sigma_u, sigma_eps, replication, seed,
/// ok, sse, L_hat.
std::string render_replications(const PredictionReport& report);

OutputFormat parse_format(const std::string& name);

}  // namespace factorpred
