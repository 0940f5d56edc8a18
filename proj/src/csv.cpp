#include "itr/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace itr {

namespace {

void append_real(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& s, const std::string& what) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    throw ParseError("bad " + what + " value '" + s + "'");
  }
  if (consumed != s.size())
    throw ParseError("bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace

void write_dataset_csv(std::ostream& os, const Dataset& data,
                       bool include_truth) {
  const bool truth =
      include_truth && data.has_true_cte() && data.has_true_propensity();
  std::string line = "id,y,a";
  for (Eigen::Index j = 0; j < data.dim(); ++j)
    line += ",x" + std::to_string(j + 1);
  if (truth) line += ",delta_star,prop_true";
  os << line << '\n';

  for (Eigen::Index i = 0; i < data.size(); ++i) {
    line = std::to_string(i + 1) + ',';
    append_real(line, data.outcomes[i]);
    line += ',' + std::to_string(data.treatments[i]);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      line += ',';
      append_real(line, data.covariates(i, j));
    }
    if (truth) {
      line += ',';
      append_real(line, data.true_cte[i]);
      line += ',';
      append_real(line, data.true_propensity[i]);
    }
    os << line << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "y" ||
      header[2] != "a")
    throw ParseError("dataset CSV must start with columns id,y,a,x1,...");

  Eigen::Index p = 0;
  while (3 + p < static_cast<Eigen::Index>(header.size()) &&
         header[static_cast<std::size_t>(3 + p)] ==
             "x" + std::to_string(p + 1))
    ++p;
  if (p == 0) throw ParseError("dataset CSV has no covariate columns");

  bool truth = false;
  const std::size_t after_x = static_cast<std::size_t>(3 + p);
  if (after_x == header.size()) {
    truth = false;
  } else if (after_x + 2 == header.size() && header[after_x] == "delta_star" &&
             header[after_x + 1] == "prop_true") {
    truth = true;
  } else {
    throw ParseError("unexpected dataset CSV column '" + header[after_x] + "'");
  }

  std::vector<double> y, cte, prop;
  std::vector<int> a;
  std::vector<double> x;
  const std::size_t expected = header.size();
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != expected)
      throw ParseError("row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(expected));
    y.push_back(parse_real(fields[1], "y"));
    const double av = parse_real(fields[2], "a");
    if (av != 0.0 && av != 1.0)
      throw ParseError("row " + std::to_string(row) + ": a must be 0 or 1");
    a.push_back(static_cast<int>(av));
    for (Eigen::Index j = 0; j < p; ++j)
      x.push_back(parse_real(fields[static_cast<std::size_t>(3 + j)], "x"));
    if (truth) {
      cte.push_back(parse_real(fields[after_x], "delta_star"));
      prop.push_back(parse_real(fields[after_x + 1], "prop_true"));
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  if (n == 0) throw ParseError("dataset CSV has no data rows");
  Dataset data;
  data.covariates.resize(n, p);
  data.treatments.resize(n);
  data.outcomes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.outcomes[i] = y[static_cast<std::size_t>(i)];
    data.treatments[i] = a[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j)
      data.covariates(i, j) =
          x[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) +
            static_cast<std::size_t>(j)];
  }
  if (truth) {
    data.true_cte =
        Eigen::Map<const Vector>(cte.data(), static_cast<Eigen::Index>(n));
    data.true_propensity =
        Eigen::Map<const Vector>(prop.data(), static_cast<Eigen::Index>(n));
  }
  return data;
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_dataset_csv(is);
}

void write_dataset_csv_file(const std::string& path, const Dataset& data,
                            bool include_truth) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_dataset_csv(os, data, include_truth);
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace itr
