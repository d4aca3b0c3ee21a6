#include "plexp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace plexp {

namespace {

// Splits one record; returns false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cur.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) throw InputError("csv: unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(cur));
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::vector<std::string> fields;
  if (!next_record(in, fields)) throw InputError("csv: missing header");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  for (auto& f : fields) t.header.push_back(trim(f));
  std::size_t line = 1;
  while (next_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != t.header.size()) {
      throw InputError("csv: record " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(fields);
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw InputError("column not found: " + name);
}

Eigen::VectorXd CsvTable::numeric(const std::string& name) const {
  const std::size_t c = column(name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string cell = trim(rows[i][c]);
    if (cell.empty()) throw InputError("missing value in column " + name + ", row " + std::to_string(i + 1));
    double x = 0.0;
    const char* first = cell.data() + (cell[0] == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), x);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(x)) {
      throw InputError("non-numeric value '" + cell + "' in column " + name + ", row " + std::to_string(i + 1));
    }
    v[static_cast<Eigen::Index>(i)] = x;
  }
  return v;
}

Eigen::MatrixXd CsvTable::numeric(const std::vector<std::string>& names) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = numeric(names[k]);
  return m;
}

}  // namespace plexp
