#include "rchow/sample_set.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "rchow/error.hpp"

namespace rchow {

LabeledSampleSet::LabeledSampleSet(PointMatrix pts, Vector lbls, std::optional<std::vector<bool>> mask)
    : points(std::move(pts)), labels(std::move(lbls)), corrupted(std::move(mask)) {
  validate();
}

std::size_t LabeledSampleSet::corrupted_count() const {
  if (!corrupted) return 0;
  std::size_t count = 0;
  for (bool b : *corrupted) count += b ? 1 : 0;
  return count;
}

void LabeledSampleSet::validate() const {
  require(points.rows() == labels.size(), ErrorKind::DimensionMismatch, "points and labels differ in length");
  if (corrupted) {
    require(corrupted->size() == size(), ErrorKind::DimensionMismatch, "mask length differs from sample count");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    require(std::isfinite(labels(i)) && std::abs(labels(i)) <= 1.0, ErrorKind::InvalidArgument,
            "labels must lie in [-1, 1]");
  }
}

LabeledSampleSet LabeledSampleSet::subset(const std::vector<std::size_t>& rows) const {
  LabeledSampleSet out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  if (corrupted) out.corrupted.emplace(rows.size(), false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    require(rows[r] < size(), ErrorKind::DimensionMismatch, "subset row out of range");
    out.points.row(static_cast<Eigen::Index>(r)) = points.row(src);
    out.labels(static_cast<Eigen::Index>(r)) = labels(src);
    if (corrupted) (*out.corrupted)[r] = (*corrupted)[rows[r]];
  }
  return out;
}

LabeledSampleSet LabeledSampleSet::slice(std::size_t begin, std::size_t end) const {
  require(begin <= end && end <= size(), ErrorKind::DimensionMismatch, "slice out of range");
  LabeledSampleSet out;
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  out.points = points.middleRows(b, len);
  out.labels = labels.segment(b, len);
  if (corrupted) {
    out.corrupted.emplace(corrupted->begin() + static_cast<std::ptrdiff_t>(begin),
                          corrupted->begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

void write_samples_csv(const LabeledSampleSet& s, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::IoError, "cannot write '" + path + "'");
  for (int j = 0; j < s.n(); ++j) out << 'x' << (j + 1) << ',';
  out << 'y';
  if (s.corrupted) out << ",corrupted";
  out << '\n';
  char buffer[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.n(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g,", s.points(static_cast<Eigen::Index>(i), j));
      out << buffer;
    }
    std::snprintf(buffer, sizeof(buffer), "%.17g", s.label(i));
    out << buffer;
    if (s.corrupted) out << ',' << ((*s.corrupted)[i] ? 1 : 0);
    out << '\n';
  }
  require(out.good(), ErrorKind::IoError, "failed writing '" + path + "'");
}

LabeledSampleSet read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::IoError, "cannot open '" + path + "'");
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), ErrorKind::IoError, "missing header in '" + path + "'");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  int n = 0;
  while (n < static_cast<int>(columns.size()) && columns[static_cast<std::size_t>(n)] == "x" + std::to_string(n + 1)) ++n;
  require(n >= 1 && static_cast<int>(columns.size()) > n && columns[static_cast<std::size_t>(n)] == "y",
          ErrorKind::IoError, "header must read x1..xn,y[,corrupted] in '" + path + "'");
  const bool has_mask = static_cast<int>(columns.size()) == n + 2 && columns.back() == "corrupted";
  require(static_cast<int>(columns.size()) == n + 1 || has_mask, ErrorKind::IoError,
          "unexpected columns in '" + path + "'");

  std::vector<double> values;
  std::vector<double> labels;
  std::vector<bool> mask;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      require(end != cell.c_str() && *end == '\0', ErrorKind::IoError,
              "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    require(row.size() == columns.size(), ErrorKind::IoError,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(columns.size()) + " cells");
    values.insert(values.end(), row.begin(), row.begin() + n);
    labels.push_back(row[static_cast<std::size_t>(n)]);
    if (has_mask) mask.push_back(row.back() != 0.0);
  }
  const auto m = static_cast<Eigen::Index>(labels.size());
  PointMatrix points = Eigen::Map<PointMatrix>(values.data(), m, n);
  Vector y = Eigen::Map<Vector>(labels.data(), m);
  std::optional<std::vector<bool>> opt_mask;
  if (has_mask) opt_mask = std::move(mask);
  return {std::move(points), std::move(y), std::move(opt_mask)};
}

SampleSource pool_source(LabeledSampleSet pool) {
  auto shared = std::make_shared<LabeledSampleSet>(std::move(pool));
  auto cursor = std::make_shared<std::size_t>(0);
  return [shared, cursor](std::size_t count) {
    require(*cursor + count <= shared->size(), ErrorKind::InvalidArgument,
            "sample pool exhausted: need " + std::to_string(count) + " more, " +
                std::to_string(shared->size() - *cursor) + " left");
    LabeledSampleSet out = shared->slice(*cursor, *cursor + count);
    *cursor += count;
    return out;
  };
}

}  // namespace rchow
