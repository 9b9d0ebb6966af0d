#include "gar/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gar/qr_core.hpp"
#include "gar/rng.hpp"

using namespace gar;

namespace {

std::string write_temp(const std::string& contents) {
  static int counter = 0;
  std::string path = "/tmp/gar_test_panel_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("load_fredmd_csv parses a small panel") {
  auto path = write_temp(
      "date,a,b,c\n"
      "Transform:,5,2,1\n"
      "1990-01-01,100,1,7\n"
      "1990-02-01,105,2,8\n"
      "1990-03-01,110.25,,9\n"
      "1990-04-01,115,4,10\n");
  RawPanel raw = load_fredmd_csv(path);
  CHECK(raw.cols() == 3);
  CHECK(raw.rows() == 4);
  CHECK(raw.transform_codes == std::vector<int>{5, 2, 1});
  CHECK(std::isnan(raw.values(2, 1)));
  CHECK(raw.values(3, 2) == doctest::Approx(10.0));
  CHECK(raw.spacing_months == 1);
  std::remove(path.c_str());
}

TEST_CASE("load_fredmd_csv error cases") {
  auto bad_code = write_temp(
      "date,a\nTransform:,x\n1990-01-01,1\n1990-02-01,2\n");
  CHECK_THROWS_AS(load_fredmd_csv(bad_code), MalformedCsv);
  std::remove(bad_code.c_str());

  auto dup = write_temp(
      "date,a,a\nTransform:,1,1\n1990-01-01,1,2\n1990-02-01,2,3\n");
  CHECK_THROWS_AS(load_fredmd_csv(dup), DuplicateColumn);
  std::remove(dup.c_str());

  auto nonmono = write_temp(
      "date,a\nTransform:,1\n1990-02-01,1\n1990-01-01,2\n");
  CHECK_THROWS_AS(load_fredmd_csv(nonmono), NonMonotoneDates);
  std::remove(nonmono.c_str());

  auto slash_dates = write_temp(
      "sasdate,a\nTransform:,1\n1/1/1990,1\n4/1/1990,2\n7/1/1990,3\n");
  RawPanel q = load_fredmd_csv(slash_dates);
  CHECK(q.spacing_months == 3);  // quarterly
  std::remove(slash_dates.c_str());
}

TEST_CASE("load_fredmd_csv wide panel column count matches a field counter") {
  const int p = 126, rows = 700;
  std::ostringstream body;
  body << "date";
  for (int j = 0; j < p; ++j) body << ",v" << j;
  body << "\nTransform:";
  for (int j = 0; j < p; ++j) body << "," << (j % 7 + 1);
  body << "\n";
  Date d{1960, 1, 1};
  std::mt19937_64 rng = make_engine(3, 0);
  std::uniform_real_distribution<double> unif(1.0, 9.0);
  for (int i = 0; i < rows; ++i) {
    body << d.plus_months(i).to_string();
    for (int j = 0; j < p; ++j) body << ',' << unif(rng);
    body << "\n";
  }
  auto path = write_temp(body.str());

  // independent count: split raw lines on commas
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  size_t fields = 1;
  for (char c : line)
    if (c == ',') ++fields;
  size_t data_lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++data_lines;

  RawPanel raw = load_fredmd_csv(path);
  CHECK(raw.cols() == static_cast<Eigen::Index>(fields - 1));
  CHECK(raw.rows() == static_cast<Eigen::Index>(data_lines - 1));
  CHECK(raw.cols() == p);
  CHECK(raw.rows() == rows);
  std::remove(path.c_str());
}

TEST_CASE("apply_transforms matches hand-computed codes") {
  RawPanel raw;
  raw.column_names = {"g", "lvl", "dd"};
  raw.transform_codes = {5, 1, 6};
  raw.values.resize(3, 3);
  raw.values.col(0) << 100.0, 105.0, 110.25;
  raw.values.col(1) << 7.0, 8.0, 9.0;
  const double e = std::exp(1.0);
  raw.values.col(2) << e, e * e, e * e * e * e;
  raw.dates = {Date{2000, 1, 1}, Date{2000, 2, 1}, Date{2000, 3, 1}};
  raw.group_labels = {"", "", ""};

  RawPanel out = apply_transforms(raw);
  CHECK(std::isnan(out.values(0, 0)));
  CHECK(out.values(1, 0) == doctest::Approx(std::log(1.05)));
  CHECK(out.values(2, 0) == doctest::Approx(std::log(1.05)));
  CHECK((out.values.col(1) - raw.values.col(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::isnan(out.values(0, 2)));
  CHECK(std::isnan(out.values(1, 2)));
  CHECK(out.values(2, 2) == doctest::Approx(1.0));

  // all-ones codes leave the panel untouched
  RawPanel identity = raw;
  identity.transform_codes = {1, 1, 1};
  RawPanel same = apply_transforms(identity);
  CHECK((same.values - raw.values).cwiseAbs().maxCoeff() == 0.0);

  RawPanel neg = raw;
  neg.values(1, 0) = -3.0;
  CHECK_THROWS_AS(apply_transforms(neg), NonPositiveForLog);
}

TEST_CASE("build_panel aligns the one-step-ahead response") {
  RawPanel raw;
  raw.column_names = {"y", "x"};
  raw.transform_codes = {1, 1};
  raw.values.resize(4, 2);
  raw.values.col(0) << 1, 2, 3, 4;
  raw.values.col(1) << 10, 20, 30, 40;
  raw.dates = {Date{2000, 1, 1}, Date{2000, 2, 1}, Date{2000, 3, 1},
               Date{2000, 4, 1}};
  raw.group_labels = {"", "macro"};

  PanelData panel = build_panel(raw, "y", false);
  CHECK(panel.T() == 3);
  CHECK(panel.y[0] == 2.0);
  CHECK(panel.y[2] == 4.0);
  CHECK(panel.x(0, 0) == 1.0);
  CHECK(panel.x(0, 1) == 10.0);
  CHECK(panel.x(2, 0) == 3.0);
  CHECK(panel.x(2, 1) == 30.0);
  CHECK(panel.column_names[0] == "y.1");
  CHECK(panel.group_labels[0] == "lag");
  CHECK(panel.lag_column == 0);
  CHECK(panel.x_latest.size() == 2);
  CHECK(panel.x_latest[0] == 4.0);

  CHECK_THROWS_AS(build_panel(raw, "nope", false), TargetMissing);
}

TEST_CASE("build_panel standardization and listwise deletion") {
  std::mt19937_64 rng = make_engine(17, 1);
  std::normal_distribution<double> g;
  RawPanel raw;
  const int t = 40, p = 4;
  raw.column_names = {"t0", "t1", "t2", "t3"};
  raw.transform_codes = {1, 1, 1, 1};
  raw.values.resize(t, p);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < p; ++j) raw.values(i, j) = g(rng);
  raw.dates.resize(t);
  for (int i = 0; i < t; ++i) raw.dates[i] = Date{2000, 1, 1}.plus_months(i);
  raw.group_labels.assign(p, "");

  // plant two incomplete predictor rows
  raw.values(5, 2) = std::nan("");
  raw.values(11, 0) = std::nan("");

  // independent count of surviving pairs
  int expected = 0;
  for (int i = 0; i + 1 < t; ++i) {
    bool ok = !std::isnan(raw.values(i + 1, 0));
    for (int j = 0; j < p; ++j)
      if (std::isnan(raw.values(i, j))) ok = false;
    if (ok) ++expected;
  }

  PanelData panel = build_panel(raw, "t0", true);
  CHECK(panel.T() == expected);
  // the target-column gap kills two pairs (as response and as predictor row)
  CHECK(panel.T() == t - 1 - 3);
  for (int j = 0; j < p; ++j) {
    CHECK(std::abs(panel.x.col(j).mean()) <= 1e-10);
    const double sd = std::sqrt(
        (panel.x.col(j).array() - panel.x.col(j).mean()).square().sum() /
        (panel.T() - 1));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(panel.standardization.applied);
}

TEST_CASE("windows slide and standardize per window") {
  Vector y(10);
  Matrix x(10, 2);
  std::mt19937_64 rng = make_engine(23, 5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    y[i] = i;
    x(i, 0) = i + 1;
    x(i, 1) = g(rng);
  }
  PanelData panel = make_panel(y, x);
  RollingWindowPlan plan{5, 5, 3};
  auto views = windows(panel, plan, WindowStandardize::none);
  REQUIRE(views.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(views[i].train.T() == 5);
    CHECK(views[i].train.x(0, 0) == doctest::Approx(i + 1.0));  // row i first
    CHECK(views[i].train.x(4, 0) == doctest::Approx(i + 5.0));
    CHECK(views[i].x_next[0] == doctest::Approx(i + 6.0));
    CHECK(views[i].y_next == doctest::Approx(5.0 + i));
  }

  auto std_views = windows(panel, plan, WindowStandardize::per_window);
  for (const auto& w : std_views) {
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(w.train.x.col(j).mean()) <= 1e-12);
  }

  CHECK_THROWS_AS(windows(panel, RollingWindowPlan{5, 5, 6}), PlanOutOfRange);
  CHECK_THROWS_AS(windows(panel, RollingWindowPlan{11, 11, 1}), PlanOutOfRange);
}

TEST_CASE("windows cover T=645 with 420-long windows and 225 forecasts") {
  const int t = 645;
  Vector y = Vector::LinSpaced(t, 0.0, 1.0);
  Matrix x = Matrix::Random(t, 1);
  PanelData panel = make_panel(y, x);
  RollingWindowPlan plan{420, 420, 225};
  validate_plan(panel, plan);
  auto last = make_window(panel, plan, 224, WindowStandardize::none);
  CHECK(last.y_next == doctest::Approx(y[t - 1]));  // final observation
  CHECK_THROWS_AS(make_window(panel, RollingWindowPlan{420, 420, 226}, 225),
                  PlanOutOfRange);
}

TEST_CASE("no look-ahead: future rows cannot change a window fit") {
  std::mt19937_64 rng = make_engine(31, 2);
  std::normal_distribution<double> g;
  const int t = 60, p = 3;
  Vector y(t);
  Matrix x(t, p);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = g(rng);
    y[i] = x(i, 0) + 0.5 * g(rng);
  }
  PanelData panel = make_panel(y, x);
  RollingWindowPlan plan{40, 40, 5};
  auto w = make_window(panel, plan, 0, WindowStandardize::per_window);
  auto fit = fit_qr(w.train.y, w.train.x, QuantileLevel{0.25}, true);

  // perturb everything strictly after the first window's range
  PanelData mutated = panel;
  for (int i = 41; i < t; ++i) {
    mutated.y[i] += 37.0;
    mutated.x.row(i).array() *= -3.0;
  }
  auto w2 = make_window(mutated, plan, 0, WindowStandardize::per_window);
  auto fit2 = fit_qr(w2.train.y, w2.train.x, QuantileLevel{0.25}, true);
  CHECK((w.train.x - w2.train.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((w.x_next - w2.x_next).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.intercept == fit2.intercept);
  CHECK((fit.coefficients - fit2.coefficients).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("round trip through write_fredmd_csv") {
  RawPanel raw;
  raw.column_names = {"a", "b"};
  raw.transform_codes = {2, 1};
  raw.values.resize(3, 2);
  raw.values << 1.5, 2.0, std::nan(""), 4.0, 5.25, 6.0;
  raw.dates = {Date{1991, 5, 1}, Date{1991, 6, 1}, Date{1991, 7, 1}};
  raw.group_labels = {"", ""};
  auto path = "/tmp/gar_test_roundtrip.csv";
  write_fredmd_csv(raw, path);
  RawPanel back = load_fredmd_csv(path);
  CHECK(back.cols() == 2);
  CHECK(back.transform_codes == raw.transform_codes);
  CHECK(std::isnan(back.values(1, 0)));
  CHECK(back.values(2, 1) == doctest::Approx(6.0));
  CHECK(back.dates[1] == raw.dates[1]);
  std::remove(path);
}
