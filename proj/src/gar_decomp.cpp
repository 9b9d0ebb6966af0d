#include "gar/gar_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace gar {

void GroupPartition::validate(Eigen::Index p) const {
  std::vector<char> seen(p, 0);
  for (const auto& group : groups) {
    for (int j : group.indices) {
      if (j < 0 || j >= p)
        throw IndexOutOfRange("group '" + group.name + "' index " +
                              std::to_string(j));
      if (seen[j])
        throw PartitionOverlap("column " + std::to_string(j) +
                               " appears in two groups");
      seen[j] = 1;
    }
  }
  for (Eigen::Index j = 0; j < p; ++j)
    if (!seen[j])
      throw PartitionIncomplete("column " + std::to_string(j) + " unassigned");
}

GroupPartition GroupPartition::from_labels(const std::vector<std::string>& labels) {
  GroupPartition partition;
  std::map<std::string, IndexSet> buckets;
  for (size_t j = 0; j < labels.size(); ++j) {
    std::string key = labels[j].empty() ? "other" : labels[j];
    buckets[key].push_back(static_cast<int>(j));
  }
  for (auto& [name, idx] : buckets)
    partition.groups.push_back({name, std::move(idx), false});
  partition.groups.push_back({"constant", {}, true});
  return partition;
}

double contribution(const QuantileModel& model,
                    const Eigen::Ref<const Vector>& x,
                    const GroupPartition::Group& group) {
  double acc = group.is_constant ? model.intercept : 0.0;
  for (int j : group.indices) {
    if (j < 0 || j >= x.size() || j >= model.beta.size())
      throw IndexOutOfRange("contribution: column " + std::to_string(j));
    acc += model.beta[j] * x[j];
  }
  return acc;
}

ContributionSeries decompose_series(const std::vector<WindowModelRecord>& records,
                                    const GroupPartition& partition) {
  if (records.empty()) throw EmptyRecords("decompose_series");
  const Eigen::Index p = records.front().x_next.size();
  partition.validate(p);

  ContributionSeries out;
  for (const auto& group : partition.groups) out.group_names.push_back(group.name);
  out.values.resize(records.size(), partition.groups.size());
  out.predicted.resize(records.size());
  out.dates.reserve(records.size());

  for (size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    out.dates.push_back(rec.date);
    double total = 0.0;
    for (size_t g = 0; g < partition.groups.size(); ++g) {
      const double c = contribution(rec.model, rec.x_next, partition.groups[g]);
      out.values(r, g) = c;
      total += c;
    }
    out.predicted[r] = rec.model.predict(rec.x_next);
    const double scale = std::max(1.0, std::abs(out.predicted[r]));
    if (std::abs(total - out.predicted[r]) > 1e-10 * scale)
      throw Error(ErrorKind::numeric,
                  "decompose_series: contributions do not add up at row " +
                      std::to_string(r));
  }
  return out;
}

SectorIndex build_index(const std::vector<Date>& dates, const Vector& values,
                        int smooth_window, bool standardize) {
  const Eigen::Index n = values.size();
  if (smooth_window < 1)
    throw Error(ErrorKind::usage, "smooth_window must be >= 1");
  if (n < smooth_window)
    throw TooShort("series length " + std::to_string(n) + " < window " +
                   std::to_string(smooth_window));
  if (static_cast<Eigen::Index>(dates.size()) != n)
    throw Error(ErrorKind::usage, "dates and values disagree");

  SectorIndex index;
  index.smooth_window = smooth_window;
  const Eigen::Index m = n - smooth_window + 1;
  index.raw = values.tail(m);
  index.smoothed.resize(m);
  for (Eigen::Index i = 0; i < m; ++i)
    index.smoothed[i] = values.segment(i, smooth_window).mean();
  index.dates.assign(dates.begin() + (smooth_window - 1), dates.end());

  if (standardize) {
    const double mean = index.smoothed.mean();
    const double ss = (index.smoothed.array() - mean).square().sum();
    const double sd = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
    if (!(sd > 0.0)) throw ZeroVariance("build_index: constant series");
    index.smoothed = (index.smoothed.array() - mean) / sd;
    index.standardized = true;
    index.mean_used = mean;
    index.std_used = sd;
  }
  return index;
}

CorrelationResult correlation_matrix(const std::vector<DatedSeries>& series) {
  const int k = static_cast<int>(series.size());
  if (k < 1) throw Error(ErrorKind::usage, "no series");

  CorrelationResult out;
  for (const auto& s : series) out.labels.push_back(s.label);
  out.r = Matrix::Identity(k, k);
  out.z = Matrix::Zero(k, k);
  out.stars = Eigen::MatrixXi::Zero(k, k);
  out.overlap = Eigen::MatrixXi::Zero(k, k);

  std::vector<std::map<int, double>> by_date(k);
  for (int i = 0; i < k; ++i) {
    if (static_cast<Eigen::Index>(series[i].dates.size()) != series[i].values.size())
      throw Error(ErrorKind::usage, "series '" + series[i].label + "' misaligned");
    for (size_t t = 0; t < series[i].dates.size(); ++t)
      by_date[i][series[i].dates[t].serial()] = series[i].values[t];
    out.overlap(i, i) = static_cast<int>(series[i].dates.size());
  }

  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      std::vector<double> a, b;
      for (const auto& [serial, value] : by_date[i]) {
        auto it = by_date[j].find(serial);
        if (it == by_date[j].end()) continue;
        a.push_back(value);
        b.push_back(it->second);
      }
      const int n = static_cast<int>(a.size());
      if (n < 2)
        throw InsufficientOverlap("'" + series[i].label + "' vs '" +
                                  series[j].label + "': " + std::to_string(n));
      double ma = 0.0, mb = 0.0;
      for (int t = 0; t < n; ++t) {
        ma += a[t];
        mb += b[t];
      }
      ma /= n;
      mb /= n;
      double saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int t = 0; t < n; ++t) {
        saa += (a[t] - ma) * (a[t] - ma);
        sbb += (b[t] - mb) * (b[t] - mb);
        sab += (a[t] - ma) * (b[t] - mb);
      }
      double r = 0.0;
      if (saa > 0.0 && sbb > 0.0) r = sab / std::sqrt(saa * sbb);
      r = std::clamp(r, -1.0, 1.0);

      double z;
      const double denom = 1.0 - r * r;
      if (n <= 2) {
        z = 0.0;
      } else if (denom <= 1e-15) {
        z = r > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
      } else {
        z = r * std::sqrt((n - 2) / denom);
      }
      // two-sided standard normal critical values at 10/5/1 percent
      int stars = 0;
      const double az = std::abs(z);
      if (az > 2.5758293035489004) stars = 3;
      else if (az > 1.959963984540054) stars = 2;
      else if (az > 1.6448536269514722) stars = 1;

      out.r(i, j) = out.r(j, i) = r;
      out.z(i, j) = out.z(j, i) = z;
      out.stars(i, j) = out.stars(j, i) = stars;
      out.overlap(i, j) = out.overlap(j, i) = n;
    }
  }
  return out;
}

}  // namespace gar
