#include "gar/simlab.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "gar/qpcr.hpp"
#include "gar/dataset.hpp"
#include "gar/rng.hpp"

using namespace gar;

TEST_CASE("assemble is exact when the noise is pinned to zero") {
  DgpSpec spec{DgpSetup::fixed_sparse, 12, 1, 1, 0};
  std::mt19937_64 rng = make_engine(1, 0);
  std::normal_distribution<double> g;
  Matrix x(12, 1);
  for (int t = 0; t < 12; ++t) x(t, 0) = std::abs(g(rng));
  DgpDraw draw = assemble(spec, x, Vector::Zero(12));
  // alpha = -1 and the scale term vanishes: y = -x exactly
  CHECK((draw.y + x.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(draw.true_support == IndexSet{0});
}

TEST_CASE("dense setup pins off-support coefficients at 1/p") {
  DgpSpec spec{DgpSetup::dense, 10, 100, 5, 0};
  Vector alpha, beta;
  dgp_coefficients(spec, 3, alpha, beta);
  for (int j = 0; j < 5; ++j) {
    CHECK(alpha[j] == -1.0);
    CHECK(beta[j] == 1.0);
  }
  for (int j = 5; j < 100; ++j) {
    CHECK(alpha[j] == doctest::Approx(0.01));
    CHECK(beta[j] == doctest::Approx(0.01));
  }
}

TEST_CASE("time-varying setup halves beta after T/2") {
  DgpSpec spec{DgpSetup::time_varying_sparse, 10, 4, 2, 0};
  Vector alpha, beta;
  dgp_coefficients(spec, 5, alpha, beta);  // t = floor(T/2): still 1
  CHECK(beta[0] == 1.0);
  dgp_coefficients(spec, 6, alpha, beta);
  CHECK(beta[0] == 0.5);
  CHECK(alpha[0] == -1.0);  // location profile unchanged
}

TEST_CASE("conditional quantile matches a large noise-resample oracle") {
  DgpSpec spec{DgpSetup::fixed_sparse, 2, 6, 3, 0};
  std::mt19937_64 rng = make_engine(2, 0);
  std::normal_distribution<double> g;
  Matrix x(2, 6);
  for (int j = 0; j < 6; ++j) x(0, j) = std::abs(g(rng));
  x.row(1) = x.row(0);  // fixed conditioning row

  const int n = 1000000;
  std::vector<double> ys(n);
  Vector eps = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    eps[0] = g(rng);
    ys[i] = assemble(spec, x, eps).y[0];
  }
  std::nth_element(ys.begin(), ys.begin() + n / 20 - 1, ys.end());
  const double mc_quantile = ys[n / 20 - 1];

  Vector alpha, beta;
  dgp_coefficients(spec, 1, alpha, beta);
  const double phi_inv_05 = -1.6448536269514722;
  const double closed_form = x.row(0).dot(alpha + beta * phi_inv_05);
  CHECK(std::abs(mc_quantile - closed_form) <= 0.01);
}

TEST_CASE("predictor draws have the half-normal mean") {
  DgpSpec spec{DgpSetup::fixed_sparse, 1000, 120, 5, 0};
  std::mt19937_64 rng = make_engine(3, 0);
  DgpDraw draw = generate(spec, rng);
  CHECK(draw.x.minCoeff() >= 0.0);
  const double mean = draw.x.mean();
  CHECK(std::abs(mean - std::sqrt(2.0 / M_PI)) <= 0.01);
}

TEST_CASE("run_study plumbing with oracle and never-selecting estimators") {
  DgpSpec spec{DgpSetup::fixed_sparse, 50, 8, 3, 11};
  SelectorFn oracle = [](const Vector&, const Matrix&, QuantileLevel) {
    return IndexSet{0, 1, 2};
  };
  SimulationReport report = run_study(spec, "oracle", oracle, QuantileLevel{0.05}, 25);
  CHECK(report.n_reps == 25);
  CHECK(report.n_failures == 0);
  for (double f : report.per_relevant_frequency) CHECK(f == 1.0);
  CHECK(report.avg_false == 0.0);

  SelectorFn nothing = [](const Vector&, const Matrix&, QuantileLevel) {
    return IndexSet{};
  };
  SimulationReport empty = run_study(spec, "null", nothing, QuantileLevel{0.05}, 10);
  for (double f : empty.per_relevant_frequency) CHECK(f == 0.0);
  CHECK(empty.avg_false == 0.0);

  SelectorFn fails = [](const Vector&, const Matrix&, QuantileLevel) -> IndexSet {
    throw std::runtime_error("boom");
  };
  SimulationReport failed = run_study(spec, "fail", fails, QuantileLevel{0.05}, 10);
  CHECK(failed.n_failures == 10);
  CHECK(failed.n_reps == 0);
}

TEST_CASE("replication streams are stable under n_reps extension") {
  DgpSpec spec{DgpSetup::fixed_sparse, 30, 4, 2, 321};
  std::vector<Vector> first;
  SelectorFn capture = [&](const Vector& y, const Matrix&, QuantileLevel) {
    first.push_back(y);
    return IndexSet{};
  };
  run_study(spec, "cap", capture, QuantileLevel{0.1}, 3);
  std::vector<Vector> second;
  SelectorFn capture2 = [&](const Vector& y, const Matrix&, QuantileLevel) {
    second.push_back(y);
    return IndexSet{};
  };
  run_study(spec, "cap", capture2, QuantileLevel{0.1}, 6);
  // captured in parallel order; compare as multisets of first elements
  auto key = [](const Vector& v) { return v[0]; };
  std::vector<double> k1, k2;
  for (auto& v : first) k1.push_back(key(v));
  for (auto& v : second) k2.push_back(key(v));
  std::sort(k1.begin(), k1.end());
  std::sort(k2.begin(), k2.end());
  for (double k : k1) CHECK(std::binary_search(k2.begin(), k2.end(), k));
}

TEST_CASE("relabeling the relevant block permutes the frequencies") {
  // estimator that always returns {0, 2}: frequencies (1, 0, 1) for s = 3
  DgpSpec spec{DgpSetup::fixed_sparse, 40, 6, 3, 5};
  SelectorFn pick = [](const Vector&, const Matrix&, QuantileLevel) {
    return IndexSet{0, 2};
  };
  SimulationReport report = run_study(spec, "pick", pick, QuantileLevel{0.05}, 7);
  CHECK(report.per_relevant_frequency[0] == 1.0);
  CHECK(report.per_relevant_frequency[1] == 0.0);
  CHECK(report.per_relevant_frequency[2] == 1.0);

  SelectorFn permuted = [](const Vector&, const Matrix&, QuantileLevel) {
    return IndexSet{1, 2};
  };
  SimulationReport rep2 = run_study(spec, "perm", permuted, QuantileLevel{0.05}, 7);
  CHECK(rep2.per_relevant_frequency[0] == 0.0);
  CHECK(rep2.per_relevant_frequency[1] == 1.0);
  CHECK(rep2.per_relevant_frequency[2] == 1.0);
}

TEST_CASE("qpcr run_study sanity at a small scale") {
  DgpSpec spec{DgpSetup::fixed_sparse, 200, 20, 3, 2024};
  SelectorFn qpcr_fit = [](const Vector& y, const Matrix& x, QuantileLevel tau) {
    auto [model, path] = fit_qpcr(make_panel(y, x), QpcrConfig::defaults(y.size(), tau));
    return model.active_set;
  };
  SimulationReport report =
      run_study(spec, "qpcr", qpcr_fit, QuantileLevel{0.1}, 12);
  CHECK(report.n_failures == 0);
  double avg_freq = 0.0;
  for (double f : report.per_relevant_frequency) avg_freq += f / 3.0;
  CHECK(avg_freq >= 0.6);
  CHECK(report.avg_false <= 6.0);
}
