#pragma once

// Text emission shared by the experiment commands: fixed-format numbers,
// CSV tables and atomic file writes.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace netctl {

/// "%.17g", enough to round-trip any double.
std::string format_g17(double x);

/// Header row followed by one row per column of `values`, prefixed by t.
/// values is (columns x times).
std::string time_series_csv(const std::vector<std::string>& header,
                            const std::vector<double>& times, const Eigen::MatrixXd& values);

/// Header names "<prefix>1".."<prefix>k" after a leading "t".
std::vector<std::string> series_header(const std::string& prefix, Eigen::Index k);

/// Writes via a temporary file and rename. GenerationError on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// ConfigError if the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace netctl
