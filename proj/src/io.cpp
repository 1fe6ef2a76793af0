#include "kakeya/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kakeya/errors.hpp"

namespace kakeya {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  std::size_t columns = 0;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path);
  if (!impl_->out) throw InvalidArgument("cannot open '" + path + "' for writing");
  impl_->columns = header.size();
  row(header);
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << format_double(values[i]);
  }
  impl_->out << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("'" + path + "' is empty");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw InvalidArgument("'" + path + "' line " + std::to_string(lineno) + ": not a number");
      r.push_back(v);
    }
    if (r.size() != names.size())
      throw InvalidArgument("'" + path + "' line " + std::to_string(lineno) + ": wrong number of columns");
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd m(rows.size(), names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) m(i, j) = rows[i][j];
  if (header) *header = std::move(names);
  return m;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace kakeya
