#include "factorpred/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "factorpred/csv_io.hpp"
#include "factorpred/errors.hpp"

namespace factorpred {

namespace {

const char* const kColumns = "T,p,sigma_u,sigma_eps,mean_sse,median_L_hat,replications_ok";

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& v) {
  return v.is_null() ? std::nan("") : v.get<double>();
}

double parse_cell(const std::string& field) {
  if (field == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "report field '" + field + "' is not a number");
  }
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw Error(ErrorCode::kConfig, "unknown output format '" + name + "' (use csv or json)");
}

std::vector<ReportRow> report_rows(const PredictionReport& report) {
  std::vector<ReportRow> rows;
  for (const auto& cell : report.cells) {
    rows.push_back({cell.cell.n_train, cell.cell.p, cell.sigma_u, cell.sigma_eps, cell.mean_sse,
                    cell.median_l_hat, cell.replications_ok});
  }
  return rows;
}

std::string render_report(std::vector<ReportRow> rows, OutputFormat format) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidInput, "report has no rows");
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return a.T != b.T ? a.T < b.T : a.p < b.p;
  });

  if (format == OutputFormat::kJson) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      out.push_back({{"T", r.T},
                     {"p", r.p},
                     {"sigma_u", number_or_null(r.sigma_u)},
                     {"sigma_eps", number_or_null(r.sigma_eps)},
                     {"mean_sse", number_or_null(r.mean_sse)},
                     {"median_L_hat", number_or_null(r.median_L_hat)},
                     {"replications_ok", r.replications_ok}});
    }
    return out.dump(2) + "\n";
  }

  std::string out = std::string(kColumns) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.T) + ',' + std::to_string(r.p) + ',' + format_double(r.sigma_u) +
           ',' + format_double(r.sigma_eps) + ',' + format_double(r.mean_sse) + ',' +
           format_double(r.median_L_hat) + ',' + std::to_string(r.replications_ok) + '\n';
  }
  return out;
}

void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path,
                  OutputFormat format) {
  write_text_file(path, render_report(rows, format));
}

std::vector<ReportRow> parse_report(const std::string& text, OutputFormat format) {
  std::vector<ReportRow> rows;
  if (format == OutputFormat::kJson) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
      for (const auto& r : doc) {
        rows.push_back({r.at("T").get<int>(), r.at("p").get<int>(), number_from(r.at("sigma_u")),
                        number_from(r.at("sigma_eps")), number_from(r.at("mean_sse")),
                        number_from(r.at("median_L_hat")), r.at("replications_ok").get<int>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("malformed JSON report: ") + e.what());
    }
    return rows;
  }

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kColumns) {
    throw Error(ErrorCode::kParse, "CSV report header mismatch");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw Error(ErrorCode::kParse, "CSV report row has wrong field count");
    rows.push_back({static_cast<int>(parse_cell(f[0])), static_cast<int>(parse_cell(f[1])),
                    parse_cell(f[2]), parse_cell(f[3]), parse_cell(f[4]), parse_cell(f[5]),
                    static_cast<int>(parse_cell(f[6]))});
  }
  return rows;
}

std::string render_replications(const PredictionReport& report) {
  std::string out = "T,p,sigma_u,sigma_eps,replication,seed,ok,sse,L_hat\n";
  for (const auto& cell : report.cells) {
    for (const auto& rep : cell.replications) {
      out += std::to_string(cell.cell.n_train) + ',' + std::to_string(cell.cell.p) + ',' +
             format_double(cell.sigma_u) + ',' + format_double(cell.sigma_eps) + ',' +
             std::to_string(rep.index) + ',' + std::to_string(rep.seed) + ',' +
             (rep.ok ? "1" : "0") + ',' + (rep.ok ? format_double(rep.sse) : "nan") + ',' +
             (rep.ok ? format_double(rep.l_hat) : "nan") + '\n';
    }
  }
  return out;
}

}  // namespace factorpred
