#pragma once

// Two-arm replay of a binary-labelled tabular dataset: one positive and one
// negative row are offered each round, and the labels swap roles after a
// configurable inversion round.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "glbandit/environments.hpp"
#include "glbandit/errors.hpp"
#include "glbandit/linalg.hpp"

namespace glb {

inline constexpr int kReplayFeatures = 8;
/// Standardized features plus a constant intercept component.
inline constexpr int kReplayDim = kReplayFeatures + 1;

struct ReplayDataset {
  std::vector<std::string> columns;
  Matrix raw;            // n x 8
  Matrix standardized;   // n x 8, columns with mean 0 and (population) std 1
  std::vector<int> labels;
  Vector mean;
  Vector stddev;
  std::vector<Eigen::Index> positives;
  std::vector<Eigen::Index> negatives;

  Eigen::Index rows() const noexcept { return raw.rows(); }

  /// Standardized features of row i followed by the intercept 1.
  Vector arm(Eigen::Index i) const {
    Vector v(kReplayDim);
    v.head(kReplayFeatures) = standardized.row(i).transpose();
    v[kReplayFeatures] = 1.0;
    return v;
  }

  double max_arm_norm() const {
    double n = 0.0;
    for (Eigen::Index i = 0; i < rows(); ++i) n = std::max(n, arm(i).norm());
    return n;
  }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Build a dataset from raw features and binary labels; standardizes every column.
inline ReplayDataset make_replay_dataset(Matrix raw, std::vector<int> labels, std::vector<std::string> columns = {}) {
  if (raw.cols() != kReplayFeatures) throw MissingColumns("replay: expected 8 feature columns");
  if (static_cast<std::size_t>(raw.rows()) != labels.size()) throw InvalidArgument("replay: label count mismatch");
  ReplayDataset ds;
  ds.columns = std::move(columns);
  ds.mean = raw.colwise().mean().transpose();
  ds.stddev.resize(kReplayFeatures);
  ds.standardized = raw.rowwise() - ds.mean.transpose();
  for (int j = 0; j < kReplayFeatures; ++j) {
    const double var = ds.standardized.col(j).squaredNorm() / static_cast<double>(raw.rows());
    if (!(var > 0.0)) throw ZeroVarianceColumn("replay: column " + std::to_string(j) + " has zero variance");
    ds.stddev[j] = std::sqrt(var);
    ds.standardized.col(j) /= ds.stddev[j];
  }
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw MalformedCsv("replay: label is not binary at data row " + std::to_string(i + 1));
    (labels[i] == 1 ? ds.positives : ds.negatives).push_back(i);
  }
  if (ds.positives.empty() || ds.negatives.empty()) throw InvalidArgument("replay: both classes must be present");
  ds.raw = std::move(raw);
  ds.labels = std::move(labels);
  return ds;
}

/// Parse CSV text: a header row, 8 numeric feature columns, then a 0/1 outcome.
inline ReplayDataset parse_replay_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedCsv("replay: empty input");
  std::vector<std::string> columns;
  for (auto f : detail::split_csv_line(line)) columns.emplace_back(detail::trim(f));
  if (columns.size() < kReplayFeatures + 1)
    throw MissingColumns("replay: header has " + std::to_string(columns.size()) + " columns, need 9");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != columns.size())
      throw MalformedCsv("replay: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(columns.size()));
    for (std::size_t j = 0; j <= kReplayFeatures; ++j) {
      const auto f = detail::trim(fields[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw MalformedCsv("replay: row " + std::to_string(row) + " column " + std::to_string(j + 1) +
                           " is missing or not numeric");
      if (j < kReplayFeatures) {
        values.push_back(v);
      } else {
        if (v != 0.0 && v != 1.0) throw MalformedCsv("replay: row " + std::to_string(row) + " outcome is not 0/1");
        labels.push_back(static_cast<int>(v));
      }
    }
  }
  if (labels.empty()) throw MalformedCsv("replay: no data rows");
  Matrix raw(static_cast<Eigen::Index>(labels.size()), kReplayFeatures);
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (int j = 0; j < kReplayFeatures; ++j) raw(i, j) = values[static_cast<std::size_t>(i) * kReplayFeatures + j];
  columns.resize(kReplayFeatures + 1);
  return make_replay_dataset(std::move(raw), std::move(labels), std::move(columns));
}

inline ReplayDataset load_replay_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("replay: cannot open " + path);
  return parse_replay_csv(in);
}

struct ReplayRound {
  std::array<Vector, 2> actions;
  std::array<Eigen::Index, 2> rows;
  /// Arm currently paying 1.
  std::size_t diabetic_index = 0;
};

/// Which of the two offered rows pays 1 at round t: the positive row up to
/// invert_at, the negative row afterwards.
inline std::size_t rewarded_arm(const ReplayDataset& ds, const std::array<Eigen::Index, 2>& rows, std::int64_t t,
                                std::int64_t invert_at) {
  const int wanted = t > invert_at ? 0 : 1;
  return ds.labels[rows[0]] == wanted ? 0 : 1;
}

/// One positive and one negative row, sampled with replacement, in random order.
inline ReplayRound replay_round(const ReplayDataset& ds, std::int64_t t, std::int64_t invert_at, Rng& rng) {
  auto pick = [&](const std::vector<Eigen::Index>& pool) {
    return pool[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size()))];
  };
  const Eigen::Index pos = pick(ds.positives);
  const Eigen::Index neg = pick(ds.negatives);
  ReplayRound r;
  r.rows = uniform01(rng) < 0.5 ? std::array{pos, neg} : std::array{neg, pos};
  r.actions = {ds.arm(r.rows[0]), ds.arm(r.rows[1])};
  r.diabetic_index = rewarded_arm(ds, r.rows, t, invert_at);
  return r;
}

/// Stand-in for the diabetes table: two Gaussian classes whose means differ
/// by `separation` standard deviations along every feature.
inline std::string synthetic_replay_csv(int positives, int negatives, double separation, std::uint64_t seed) {
  Rng rng = make_rng(seed, 7);
  std::normal_distribution<double> normal;
  std::vector<std::pair<std::array<double, kReplayFeatures>, int>> rows;
  auto emit = [&](int count, int label) {
    for (int i = 0; i < count; ++i) {
      std::array<double, kReplayFeatures> x{};
      for (int j = 0; j < kReplayFeatures; ++j) x[j] = 10.0 * (j + 1) + normal(rng) + (label ? separation : 0.0);
      rows.emplace_back(x, label);
    }
  };
  emit(negatives, 0);
  emit(positives, 1);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::ostringstream out;
  out.precision(17);
  out << "Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,DiabetesPedigreeFunction,Age,Outcome\n";
  for (const auto& [x, label] : rows) {
    for (double v : x) out << v << ',';
    out << label << '\n';
  }
  return out.str();
}

}  // namespace glb
