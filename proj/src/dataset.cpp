#include "ncreg/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ncreg {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& cell, const std::string& path, std::size_t lineno) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number: \"" +
                             cell + "\"");
  }
}

}  // namespace

Role role_from_name(const std::string& name) {
  if (name == "train") return Role::train;
  if (name == "validation") return Role::validation;
  if (name == "test") return Role::test;
  throw std::runtime_error("unknown role \"" + name + "\" (expected train/validation/test)");
}

std::string role_name(Role r) {
  switch (r) {
    case Role::train: return "train";
    case Role::validation: return "validation";
    case Role::test: return "test";
  }
  throw std::logic_error("role_name: unhandled enum value");
}

std::vector<Eigen::Index> Dataset::indices(Role r) const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n(); ++i)
    if (roles.empty() ? r == Role::train : roles[static_cast<std::size_t>(i)] == r)
      idx.push_back(i);
  return idx;
}

Dataset Dataset::subset(Role r) const {
  auto idx = indices(r);
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), p());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.X.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
    out.y(static_cast<Eigen::Index>(k)) = y(idx[k]);
  }
  out.roles.assign(idx.size(), Role::train);
  out.feature_names = feature_names;
  out.standardized = standardized;
  return out;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_line(line);
  if (header.size() < 2)
    throw std::runtime_error(path + ":1: need at least one feature column and a response");

  std::ptrdiff_t role_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "role") role_col = static_cast<std::ptrdiff_t>(i);
  const std::size_t resp_col = header.size() - 1;
  if (role_col == static_cast<std::ptrdiff_t>(resp_col))
    throw std::runtime_error(path + ":1: \"role\" cannot be the response column");

  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < header.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != role_col) names.push_back(header[i]);

  std::vector<std::vector<double>> rows;
  std::vector<double> resp;
  std::vector<Role> roles;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> row;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == role_col) continue;
      row.push_back(parse_number(cells[i], path, lineno));
    }
    rows.push_back(std::move(row));
    resp.push_back(parse_number(cells[resp_col], path, lineno));
    roles.push_back(role_col >= 0 ? role_from_name(cells[static_cast<std::size_t>(role_col)])
                                  : Role::train);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j)
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    d.y(static_cast<Eigen::Index>(i)) = resp[i];
  }
  d.roles = std::move(roles);
  d.feature_names = std::move(names);
  return d;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    std::string name = static_cast<std::size_t>(j) < data.feature_names.size()
                           ? data.feature_names[static_cast<std::size_t>(j)]
                           : "x" + std::to_string(j);
    out << name << ",";
  }
  out << "role,y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.X(i, j));
      out << buf << ",";
    }
    Role r = data.roles.empty() ? Role::train : data.roles[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof buf, "%.17g", data.y(i));
    out << role_name(r) << "," << buf << "\n";
  }
}

}  // namespace ncreg
