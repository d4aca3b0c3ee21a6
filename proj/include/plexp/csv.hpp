#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plexp {

// Bad user input (file, column, cell). The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InputError when the column is absent.
  std::size_t column(const std::string& name) const;
  Eigen::VectorXd numeric(const std::string& name) const;
  Eigen::MatrixXd numeric(const std::vector<std::string>& names) const;
};

// Header line required; quoted fields may contain commas, quotes ("") and newlines.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace plexp
