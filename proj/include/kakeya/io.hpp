#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace kakeya {

inline constexpr const char* kVersion = "kakeya-lab 0.1.0";

/// Shortest round-trip text for a double ("%.17g"); identical inputs give identical bytes.
std::string format_double(double v);

/// Row-oriented CSV writer. Throws InvalidArgument when the file cannot be opened.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(std::span<const double> values);
  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Reads a numeric CSV with a header row into a matrix (one row per data line).
Eigen::MatrixXd read_csv_matrix(const std::string& path, std::vector<std::string>* header = nullptr);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace kakeya
