#include "gar/gar_decomp.hpp"

#include <random>

#include "doctest.h"
#include "gar/rng.hpp"

using namespace gar;

namespace {

QuantileModel toy_model(const Vector& beta, double intercept) {
  QuantileModel model;
  model.tau = 0.05;
  model.beta = beta;
  model.intercept = intercept;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) model.active_set.push_back(static_cast<int>(j));
  return model;
}

std::vector<Date> monthly_dates(int n, Date start = Date{2010, 1, 1}) {
  std::vector<Date> dates(n);
  for (int i = 0; i < n; ++i) dates[i] = start.plus_months(i);
  return dates;
}

}  // namespace

TEST_CASE("contribution sums beta times x over the group") {
  Vector beta(3);
  beta << 1.0, -2.0, 0.0;
  QuantileModel model = toy_model(beta, 0.7);
  Vector x(3);
  x << 0.5, 0.25, 7.0;

  GroupPartition::Group empty{"none", {}, false};
  CHECK(contribution(model, x, empty) == 0.0);

  GroupPartition::Group pair{"pair", {0, 1}, false};
  CHECK(contribution(model, x, pair) == doctest::Approx(0.0));  // 0.5 - 0.5

  GroupPartition::Group constant{"constant", {}, true};
  CHECK(contribution(model, x, constant) == doctest::Approx(0.7));

  GroupPartition::Group all{"all", {0, 1, 2}, false};
  CHECK(contribution(model, x, all) + model.intercept ==
        doctest::Approx(model.predict(x)));

  GroupPartition::Group bad{"bad", {5}, false};
  CHECK_THROWS_AS(contribution(model, x, bad), IndexOutOfRange);
}

TEST_CASE("decompose_series additivity over random partitions") {
  std::mt19937_64 rng = make_engine(61, 0);
  std::normal_distribution<double> g;
  const int p = 12, windows = 18;
  std::vector<WindowModelRecord> records;
  for (int w = 0; w < windows; ++w) {
    Vector beta(p);
    for (int j = 0; j < p; ++j) beta[j] = (j % 3 == 0) ? g(rng) : 0.0;
    WindowModelRecord rec;
    rec.window_index = w;
    rec.date = Date{2015, 1, 1}.plus_months(w);
    rec.model = toy_model(beta, g(rng));
    rec.x_next.resize(p);
    for (int j = 0; j < p; ++j) rec.x_next[j] = g(rng);
    records.push_back(rec);
  }

  for (int trial = 0; trial < 3; ++trial) {
    // random partition into 4 groups + constant
    std::mt19937_64 prng = make_engine(62, trial);
    std::uniform_int_distribution<int> pick(0, 3);
    GroupPartition partition;
    partition.groups.resize(5);
    for (int gidx = 0; gidx < 4; ++gidx)
      partition.groups[gidx] = {"g" + std::to_string(gidx), {}, false};
    partition.groups[4] = {"constant", {}, true};
    for (int j = 0; j < p; ++j)
      partition.groups[pick(prng)].indices.push_back(j);

    ContributionSeries series = decompose_series(records, partition);
    REQUIRE(series.values.rows() == windows);
    for (int w = 0; w < windows; ++w) {
      const double total = series.values.row(w).sum();
      CHECK(total == doctest::Approx(series.predicted[w]).epsilon(1e-10));
      CHECK(series.predicted[w] ==
            doctest::Approx(records[w].model.predict(records[w].x_next)));
    }
  }

  // single-group partition reproduces the prediction series
  GroupPartition whole;
  whole.groups.push_back({"everything", {}, false});
  for (int j = 0; j < p; ++j) whole.groups[0].indices.push_back(j);
  whole.groups.push_back({"constant", {}, true});
  ContributionSeries single = decompose_series(records, whole);
  for (int w = 0; w < windows; ++w)
    CHECK(single.values.row(w).sum() == doctest::Approx(single.predicted[w]));

  // overlap and incompleteness are rejected
  GroupPartition overlap = whole;
  overlap.groups[0].indices.push_back(0);
  CHECK_THROWS_AS(decompose_series(records, overlap), PartitionOverlap);
  GroupPartition incomplete = whole;
  incomplete.groups[0].indices.pop_back();
  CHECK_THROWS_AS(decompose_series(records, incomplete), PartitionIncomplete);
}

TEST_CASE("group partition from labels covers every column once") {
  GroupPartition partition =
      GroupPartition::from_labels({"fin", "labor", "fin", "", "lag"});
  partition.validate(5);
  int with_columns = 0;
  for (const auto& group : partition.groups)
    if (!group.indices.empty()) ++with_columns;
  CHECK(with_columns == 4);  // fin, labor, other, lag
}

TEST_CASE("build_index smoothing and standardization") {
  auto dates = monthly_dates(4);
  Vector v(4);
  v << 1, 2, 3, 4;
  SectorIndex idx = build_index(dates, v, 3, false);
  REQUIRE(idx.smoothed.size() == 2);
  CHECK(idx.smoothed[0] == doctest::Approx(2.0));
  CHECK(idx.smoothed[1] == doctest::Approx(3.0));
  CHECK(idx.dates.front() == dates[2]);

  // window 1 without standardization is the identity
  SectorIndex same = build_index(dates, v, 1, false);
  CHECK((same.smoothed - v).cwiseAbs().maxCoeff() == 0.0);

  // standardization: mean 0, sample variance 1, and idempotence
  std::mt19937_64 rng = make_engine(63, 0);
  std::normal_distribution<double> g;
  Vector noise(40);
  for (int i = 0; i < 40; ++i) noise[i] = 3.0 + 2.0 * g(rng);
  SectorIndex std1 = build_index(monthly_dates(40), noise, 3, true);
  const Eigen::Index m = std1.smoothed.size();
  CHECK(std::abs(std1.smoothed.mean()) <= 1e-8);
  const double var =
      (std1.smoothed.array() - std1.smoothed.mean()).square().sum() / (m - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  SectorIndex std2 = build_index(std1.dates, std1.smoothed, 1, true);
  CHECK((std2.smoothed - std1.smoothed).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK_THROWS_AS(build_index(dates, v, 9, false), TooShort);
  Vector constant = Vector::Constant(10, 2.5);
  CHECK_THROWS_AS(build_index(monthly_dates(10), constant, 1, true), ZeroVariance);
}

TEST_CASE("correlation_matrix diagonal, symmetry, and the z formula") {
  std::mt19937_64 rng = make_engine(64, 0);
  std::normal_distribution<double> g;
  const int n = 120;
  auto dates = monthly_dates(n);
  DatedSeries a{"a", dates, Vector(n)}, b{"b", dates, Vector(n)};
  for (int i = 0; i < n; ++i) {
    a.values[i] = g(rng);
    b.values[i] = 0.6 * a.values[i] + 0.8 * g(rng);
  }
  CorrelationResult result = correlation_matrix({a, b});
  CHECK(result.r(0, 0) == 1.0);
  CHECK(result.r(1, 1) == 1.0);
  CHECK(result.r(0, 1) == doctest::Approx(result.r(1, 0)));
  CHECK(result.r(0, 1) >= -1.0);
  CHECK(result.r(0, 1) <= 1.0);
  CHECK(result.overlap(0, 1) == n);

  // z = r sqrt((n-2)/(1-r^2))
  const double r = result.r(0, 1);
  CHECK(result.z(0, 1) ==
        doctest::Approx(r * std::sqrt((n - 2) / (1.0 - r * r))).epsilon(1e-12));

  // the worked example: r = 0.5, T = 102 gives z close to 5.774
  const double z_ref = 0.5 * std::sqrt(100.0 / 0.75);
  CHECK(z_ref == doctest::Approx(5.7735).epsilon(1e-4));

  // insufficient overlap
  DatedSeries c{"c", monthly_dates(1, Date{1970, 1, 1}), Vector::Ones(1)};
  CHECK_THROWS_AS(correlation_matrix({a, c}), InsufficientOverlap);
}

TEST_CASE("correlation null rejections sit near the nominal size") {
  std::mt19937_64 rng = make_engine(65, 0);
  std::normal_distribution<double> g;
  const int n = 200, reps = 10000;
  int rejections = 0;
  for (int r = 0; r < reps; ++r) {
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = g(rng);
      ys[i] = g(rng);
      sa += xs[i];
      sb += ys[i];
    }
    sa /= n;
    sb /= n;
    for (int i = 0; i < n; ++i) {
      saa += (xs[i] - sa) * (xs[i] - sa);
      sbb += (ys[i] - sb) * (ys[i] - sb);
      sab += (xs[i] - sa) * (ys[i] - sb);
    }
    const double rho = sab / std::sqrt(saa * sbb);
    const double z = rho * std::sqrt((n - 2) / (1.0 - rho * rho));
    if (std::abs(z) > 1.959963984540054) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  CHECK(rate >= 0.04);
  CHECK(rate <= 0.06);
}

TEST_CASE("correlations on partially overlapping dates use the common span") {
  auto d1 = monthly_dates(30, Date{2000, 1, 1});
  auto d2 = monthly_dates(30, Date{2000, 7, 1});
  std::mt19937_64 rng = make_engine(66, 0);
  std::normal_distribution<double> g;
  DatedSeries a{"a", d1, Vector(30)}, b{"b", d2, Vector(30)};
  for (int i = 0; i < 30; ++i) {
    a.values[i] = g(rng);
    b.values[i] = g(rng);
  }
  CorrelationResult result = correlation_matrix({a, b});
  CHECK(result.overlap(0, 1) == 24);
}
