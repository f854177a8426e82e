#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "factorpred/panel.hpp"

namespace factorpred {

/// Panel CSV layout: the first non-empty line holds the p grid values, every
/// following line one observation with p values. A header whose first field
/// is a label (e.g. "s,0,0.5,1") switches to the labelled layout, where
/// each observation line also starts with a label field that is ignored.
/// Lines starting with '#' are comments.
CurvePanel load_panel_csv(const std::filesystem::path& path);
CurvePanel parse_panel_csv(std::string_view text);

/// Writes the plain layout with 17 significant digits, so that
/// load_panel_csv() returns the identical panel.
void save_panel_csv(const CurvePanel& panel, const std::filesystem::path& path);

/// One value per line; an optional non-numeric first line is a header.
Eigen::VectorXd load_vector_csv(const std::filesystem::path& path);
Eigen::VectorXd parse_vector_csv(std::string_view text);
void save_vector_csv(const Eigen::VectorXd& values, const std::filesystem::path& path,
                     std::string_view header = {});

/// Comma-separated matrix with an optional header line of column names.
void save_matrix_csv(const Eigen::MatrixXd& values, const std::filesystem::path& path,
                     const std::vector<std::string>& header = {});

/// Shortest text that is exact to 17 significant digits.
std::string format_double(double value);

/// Reads a whole file; throws kIo if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Writes a whole file; throws kIo if it cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace factorpred
