#include "snc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace snc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, long row, const char* what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvError{std::string("cannot parse ") + what + " value '" + s + "'", row};
  }
}

}  // namespace

Eigen::Index LongitudinalDataset::total_obs() const {
  Eigen::Index n = 0;
  for (const auto& u : units) n += u.n();
  return n;
}

bool LongitudinalDataset::balanced() const {
  if (units.empty()) return true;
  const Eigen::VectorXd& t0 = units.front().times;
  for (const auto& u : units)
    if (u.times.size() != t0.size() || (u.times - t0).cwiseAbs().maxCoeff() > 0.0)
      return false;
  return true;
}

void LongitudinalDataset::validate() const {
  for (const auto& u : units) {
    if (u.times.size() != u.n() || u.X.rows() != u.n())
      throw std::domain_error("dataset: per-unit dimensions disagree");
    for (Eigen::Index j = 0; j < u.n(); ++j) {
      if (!(u.y[j] > 0.0))
        throw std::domain_error("dataset: responses must be positive (unit " + u.id + ")");
      if (j > 0 && u.times[j] < u.times[j - 1])
        throw std::domain_error("dataset: times must be sorted (unit " + u.id + ")");
    }
  }
}

LongitudinalDataset read_dataset_csv(const std::string& path,
                                     const std::vector<std::string>& covariates,
                                     bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw CsvError{"cannot open '" + path + "'", 0};
  std::string line;
  if (!std::getline(in, line)) throw CsvError{"empty file", 0};
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "unit_id" || header[1] != "time" ||
      header[2] != "y")
    throw CsvError{"header must start with unit_id,time,y", 1};

  std::map<std::string, int> col_of;
  for (size_t c = 0; c < header.size(); ++c) col_of[header[c]] = static_cast<int>(c);
  std::vector<int> cov_cols;
  for (const auto& name : covariates) {
    auto it = col_of.find(name);
    if (it == col_of.end())
      throw CsvError{"covariate '" + name + "' not in header", 1};
    cov_cols.push_back(it->second);
  }

  struct Row {
    std::string id;
    double time, y;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  long rowno = 1;
  while (std::getline(in, line)) {
    ++rowno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw CsvError{"wrong field count", rowno};
    Row r;
    r.id = f[0];
    r.time = parse_double(f[1], rowno, "time");
    r.y = parse_double(f[2], rowno, "y");
    if (!(r.y > 0.0)) throw CsvError{"response y must be positive", rowno};
    for (int c : cov_cols) r.x.push_back(parse_double(f[c], rowno, "covariate"));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw CsvError{"no data rows", rowno};

  LongitudinalDataset data;
  if (add_intercept) data.covariate_names.push_back("(Intercept)");
  data.covariate_names.insert(data.covariate_names.end(), covariates.begin(),
                              covariates.end());

  const int p = static_cast<int>(covariates.size()) + (add_intercept ? 1 : 0);
  size_t i = 0;
  long base_row = 1;
  while (i < rows.size()) {
    size_t j = i;
    while (j < rows.size() && rows[j].id == rows[i].id) ++j;
    Unit u;
    u.id = rows[i].id;
    const Eigen::Index n = static_cast<Eigen::Index>(j - i);
    u.times.resize(n);
    u.y.resize(n);
    u.X.resize(n, p);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Row& r = rows[i + k];
      u.times[k] = r.time;
      u.y[k] = r.y;
      int c = 0;
      if (add_intercept) u.X(k, c++) = 1.0;
      for (double v : r.x) u.X(k, c++) = v;
      if (k > 0 && u.times[k] < u.times[k - 1])
        throw CsvError{"rows of unit '" + u.id + "' not sorted by time",
                       base_row + static_cast<long>(i + k) + 1};
    }
    data.units.push_back(std::move(u));
    i = j;
  }
  return data;
}

void write_dataset_csv(const std::string& path, const LongitudinalDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "unit_id,time,y";
  std::vector<Eigen::Index> cols;
  for (size_t c = 0; c < data.covariate_names.size(); ++c) {
    if (data.covariate_names[c] == "(Intercept)") continue;
    out << ',' << data.covariate_names[c];
    cols.push_back(static_cast<Eigen::Index>(c));
  }
  out << '\n';
  out.precision(17);
  for (const auto& u : data.units) {
    for (Eigen::Index j = 0; j < u.n(); ++j) {
      out << u.id << ',' << u.times[j] << ',' << u.y[j];
      for (Eigen::Index c : cols) out << ',' << u.X(j, c);
      out << '\n';
    }
  }
}

}  // namespace snc
