#include "factorpred/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "factorpred/errors.hpp"

namespace factorpred {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

struct Line {
  std::size_t number;  // 1-based line number in the file
  std::string_view text;
};

// Non-empty, non-comment lines.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++number;
    const auto body = trim(raw);
    if (!body.empty() && body.front() != '#') lines.push_back({number, body});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

double numeric_field(std::string_view field, const Line& line, std::size_t column) {
  const auto value = parse_number(field);
  if (!value) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line.number) + ", column " +
                                       std::to_string(column + 1) + ": cannot parse '" +
                                       std::string(field) + "' as a number");
  }
  return *value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

CurvePanel parse_panel_csv(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error(ErrorCode::kParse, "panel file is empty");

  auto header = split_fields(lines.front().text);
  const bool labelled = !parse_number(header.front()).has_value();
  const std::size_t skip = labelled ? 1 : 0;
  if (header.size() <= skip) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(lines.front().number) +
                                       ": grid row has no values");
  }
  const std::size_t p = header.size() - skip;
  Eigen::VectorXd grid(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    grid[static_cast<Eigen::Index>(j)] = numeric_field(header[j + skip], lines.front(), j + skip);
  }
  for (Eigen::Index j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) {
      throw Error(ErrorCode::kInvalidInput,
                  "grid (line " + std::to_string(lines.front().number) +
                      ") is not strictly increasing at column " + std::to_string(j + 1));
    }
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 2) {
    throw Error(ErrorCode::kParse, "panel file needs at least 2 observation rows, found " +
                                       std::to_string(n));
  }
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Line& line = lines[static_cast<std::size_t>(i) + 1];
    const auto fields = split_fields(line.text);
    if (fields.size() != p + skip) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line.number) + ": expected " +
                                         std::to_string(p + skip) + " fields, found " +
                                         std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double v = numeric_field(fields[j + skip], line, j + skip);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidInput,
                    "non-finite value at line " + std::to_string(line.number) +
                        " (observation " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1) + ")");
      }
      values(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  return CurvePanel(std::move(values), std::move(grid));
}

CurvePanel load_panel_csv(const std::filesystem::path& path) {
  return parse_panel_csv(read_text_file(path));
}

void save_panel_csv(const CurvePanel& panel, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index j = 0; j < panel.n_points(); ++j) {
    if (j > 0) out += ',';
    out += format_double(panel.grid()[j]);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < panel.n_obs(); ++i) {
    for (Eigen::Index j = 0; j < panel.n_points(); ++j) {
      if (j > 0) out += ',';
      out += format_double(panel.values()(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

Eigen::VectorXd parse_vector_csv(std::string_view text) {
  auto lines = content_lines(text);
  if (!lines.empty() && !parse_number(split_fields(lines.front().text).front())) {
    lines.erase(lines.begin());
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i].text);
    if (fields.size() != 1) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lines[i].number) +
                                         ": expected a single value, found " +
                                         std::to_string(fields.size()) + " fields");
    }
    const double v = numeric_field(fields.front(), lines[i], 0);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidInput,
                  "non-finite value at line " + std::to_string(lines[i].number));
    }
    values[static_cast<Eigen::Index>(i)] = v;
  }
  return values;
}

Eigen::VectorXd load_vector_csv(const std::filesystem::path& path) {
  return parse_vector_csv(read_text_file(path));
}

void save_vector_csv(const Eigen::VectorXd& values, const std::filesystem::path& path,
                     std::string_view header) {
  std::string out;
  if (!header.empty()) {
    out += header;
    out += '\n';
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out += format_double(values[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

void save_matrix_csv(const Eigen::MatrixXd& values, const std::filesystem::path& path,
                     const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out += ',';
    out += header[j];
  }
  if (!header.empty()) out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace factorpred
