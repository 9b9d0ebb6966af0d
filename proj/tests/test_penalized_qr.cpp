#include "gar/penalized_qr.hpp"

#include <random>

#include "doctest.h"
#include "gar/rng.hpp"

using namespace gar;

namespace {

PanelData noise_panel(std::uint64_t seed, int t, int p) {
  std::mt19937_64 rng = make_engine(seed, 0);
  std::normal_distribution<double> g;
  Matrix x(t, p);
  Vector y(t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = g(rng);
    y[i] = g(rng);
  }
  return make_panel(y, x);
}

PanelData signal_panel(std::uint64_t seed, int t, int p, double strength) {
  std::mt19937_64 rng = make_engine(seed, 1);
  std::normal_distribution<double> g;
  Matrix x(t, p);
  Vector y(t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = g(rng);
    y[i] = strength * (x(i, 0) - x(i, 1)) + 0.5 * g(rng);
  }
  return make_panel(y, x);
}

// numeric integral of the derivative, the reconstruction the penalties are
// defined by
double integrate_derivative(const PenaltySpec& spec, double b) {
  const int n = 20000;
  const double h = std::abs(b) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mid = (i + 0.5) * h;
    acc += penalty_derivative(spec, mid) * h;
  }
  return acc;
}

}  // namespace

TEST_CASE("penalty values match the displayed formulas") {
  PenaltySpec l1{PenaltyKind::l1, 0.3, 0.0};
  CHECK(penalty_value(l1, -2.0) == doctest::Approx(0.6));
  CHECK(penalty_value(l1, 0.0) == doctest::Approx(0.0));

  PenaltySpec mcp{PenaltyKind::mcp, 1.0, 2.0};
  CHECK(penalty_value(mcp, 3.0) == doctest::Approx(1.0));  // a lambda^2 / 2
  CHECK(penalty_value(mcp, 3.0) ==
        doctest::Approx(integrate_derivative(mcp, 2.0)).epsilon(1e-4));

  PenaltySpec scad{PenaltyKind::scad, 0.7, 3.7};
  CHECK(penalty_value(scad, 0.0) == doctest::Approx(0.0));
  CHECK(penalty_value(scad, 100.0) ==
        doctest::Approx(0.7 * 0.7 * 4.7 / 2.0));  // saturation
  for (double b : {0.2, 0.7, 1.4, 2.0, 2.59, 5.0})
    CHECK(penalty_value(scad, b) ==
          doctest::Approx(integrate_derivative(scad, b)).epsilon(1e-4));

  // even, nondecreasing in |b|
  for (double b : {0.1, 0.5, 1.3}) {
    CHECK(penalty_value(scad, b) == doctest::Approx(penalty_value(scad, -b)));
    CHECK(penalty_value(scad, b + 0.2) >= penalty_value(scad, b) - 1e-12);
  }
}

TEST_CASE("penalty derivatives follow the displayed branches") {
  PenaltySpec scad{PenaltyKind::scad, 1.0, 3.7};
  CHECK(penalty_derivative(scad, 0.5) == doctest::Approx(1.0));
  CHECK(penalty_derivative(scad, 3.7) == doctest::Approx(0.0));
  CHECK(penalty_derivative(scad, 2.0) ==
        doctest::Approx((3.7 - 2.0) / (3.7 - 1.0)));

  PenaltySpec mcp{PenaltyKind::mcp, 2.0, 3.0};
  CHECK(penalty_derivative(mcp, 3.0) == doctest::Approx(1.0));
  CHECK(penalty_derivative(mcp, 7.0) == doctest::Approx(0.0));

  // all three agree at zero
  PenaltySpec l1{PenaltyKind::l1, 0.42, 0.0};
  PenaltySpec scad2{PenaltyKind::scad, 0.42, 3.7};
  PenaltySpec mcp2{PenaltyKind::mcp, 0.42, 3.0};
  CHECK(penalty_derivative(l1, 0.0) == doctest::Approx(0.42));
  CHECK(penalty_derivative(scad2, 0.0) == doctest::Approx(0.42));
  CHECK(penalty_derivative(mcp2, 0.0) == doctest::Approx(0.42));

  CHECK_THROWS(PenaltySpec{PenaltyKind::scad, 1.0, 1.5}.validate());
  CHECK_THROWS(PenaltySpec{PenaltyKind::mcp, 1.0, 0.9}.validate());
}

TEST_CASE("fit_penalized with lambda 0 matches the unpenalized fit") {
  PanelData panel = signal_panel(71, 80, 3, 1.0);
  QuantileLevel tau{0.3};
  QuantileModel model =
      fit_penalized(panel, tau, {PenaltyKind::l1, 0.0, 0.0});
  FitResult plain = fit_qr(panel.y, panel.x, tau, true);
  CHECK(model.intercept == doctest::Approx(plain.intercept).epsilon(1e-5));
  for (int j = 0; j < 3; ++j)
    CHECK(model.beta[j] == doctest::Approx(plain.coefficients[j]).epsilon(1e-5));
}

TEST_CASE("lambda at the KKT bound zeroes every coefficient") {
  PanelData panel = signal_panel(73, 100, 6, 0.8);
  QuantileLevel tau{0.2};
  const double bound = lambda_max(panel, tau);
  QuantileModel model =
      fit_penalized(panel, tau, {PenaltyKind::l1, bound * 1.01, 0.0});
  CHECK(model.active_set.empty());
  CHECK(model.beta.cwiseAbs().maxCoeff() == 0.0);
  // intercept sits in the optimal interval of the intercept-only problem
  // and attains the same objective
  FitResult only = fit_qr(panel.y, Matrix(0, 0), tau, true);
  Vector resid = panel.y;
  resid.array() -= model.intercept;
  CHECK(mean_quantile_loss(tau, resid) ==
        doctest::Approx(only.objective).epsilon(1e-7));

  // and slightly below the bound something survives
  QuantileModel loose =
      fit_penalized(panel, tau, {PenaltyKind::l1, bound * 0.2, 0.0});
  CHECK(!loose.active_set.empty());
}

TEST_CASE("l1 path shrinks monotonically on a single-column design") {
  std::mt19937_64 rng = make_engine(79, 2);
  std::normal_distribution<double> g;
  const int t = 120;
  Matrix x(t, 1);
  Vector y(t);
  for (int i = 0; i < t; ++i) {
    x(i, 0) = g(rng);
    y[i] = 1.7 * x(i, 0) + g(rng);
  }
  x.col(0).array() -= x.col(0).mean();
  x.col(0) /= std::sqrt(x.col(0).squaredNorm() / t);
  PanelData panel = make_panel(y, x);
  QuantileLevel tau{0.5};
  double prev = std::numeric_limits<double>::infinity();
  for (double lam : {0.0, 0.1, 0.3, 0.6, 1.0, 1.6}) {
    QuantileModel model = fit_penalized(panel, tau, {PenaltyKind::l1, lam, 0.0});
    CHECK(std::abs(model.beta[0]) <= prev + 1e-6);
    prev = std::abs(model.beta[0]);
  }
}

TEST_CASE("SCAD and MCP refit the strong-signal support without shrinkage") {
  PanelData panel = signal_panel(83, 150, 4, 3.0);
  QuantileLevel tau{0.4};
  const double lam = 0.3;  // a*lambda still below the signal magnitudes
  for (PenaltyKind kind : {PenaltyKind::scad, PenaltyKind::mcp}) {
    const double a = kind == PenaltyKind::scad ? 3.7 : 3.0;
    QuantileModel model = fit_penalized(panel, tau, {kind, lam, a});
    REQUIRE(model.active_set == IndexSet{0, 1});
    for (int j : model.active_set)
      CHECK(std::abs(model.beta[j]) >= a * lam);
    // penalty derivative is zero past a*lambda, so the stationary point is
    // the plain refit on the surviving support
    Matrix sub(panel.T(), 2);
    sub.col(0) = panel.x.col(0);
    sub.col(1) = panel.x.col(1);
    FitResult refit = fit_qr(panel.y, sub, tau, true);
    CHECK(model.beta[0] == doctest::Approx(refit.coefficients[0]).epsilon(1e-4));
    CHECK(model.beta[1] == doctest::Approx(refit.coefficients[1]).epsilon(1e-4));
    CHECK(model.intercept == doctest::Approx(refit.intercept).epsilon(1e-4));
  }
}

TEST_CASE("LLA outer iterations never increase the penalized objective") {
  PanelData panel = signal_panel(89, 100, 8, 1.2);
  QuantileLevel tau{0.25};
  for (PenaltyKind kind : {PenaltyKind::scad, PenaltyKind::mcp}) {
    const double a = kind == PenaltyKind::scad ? 3.7 : 3.0;
    PqrDiagnostics diag;
    fit_penalized(panel, tau, {kind, 0.15, a}, {}, &diag);
    REQUIRE(diag.objective_trace.size() >= 2);
    for (size_t i = 1; i < diag.objective_trace.size(); ++i)
      CHECK(diag.objective_trace[i] <= diag.objective_trace[i - 1] + 1e-7);
  }
}

TEST_CASE("cross_validate basics") {
  QuantileLevel tau{0.2};

  // single-point grid comes straight back
  PanelData panel = signal_panel(97, 60, 4, 1.0);
  CvGrid single;
  single.lambdas = {0.37};
  single.a_values = {3.7};
  PenaltySpec got = cross_validate(panel, tau, PenaltyKind::scad, single);
  CHECK(got.lambda == doctest::Approx(0.37));
  CHECK(got.a == doctest::Approx(3.7));

  // strong signal: the small-lambda end beats the null model
  CvGrid wide;
  wide.lambdas = {1e6, 1e-9};
  wide.a_values = {0.0};
  PanelData strong = signal_panel(101, 90, 3, 2.0);
  PenaltySpec pick = cross_validate(strong, tau, PenaltyKind::l1, wide);
  CHECK(pick.lambda == doctest::Approx(1e-9));

  CvGrid bad;
  bad.lambdas = {0.1, 0.5};  // increasing
  bad.a_values = {0.0};
  CHECK_THROWS(cross_validate(strong, tau, PenaltyKind::l1, bad));
}

TEST_CASE("cross_validate prefers the null end on pure noise") {
  // majority vote over noise panels: the chosen lambda should sit in the
  // top (sparsest) part of the grid
  QuantileLevel tau{0.3};
  int top = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    PanelData panel = noise_panel(2000 + r, 60, 10);
    CvGrid grid = default_grid(panel, tau, PenaltyKind::l1, 8);
    PenaltySpec pick = cross_validate(panel, tau, PenaltyKind::l1, grid);
    // position of the winner in the descending grid
    int pos = 0;
    for (size_t i = 0; i < grid.lambdas.size(); ++i)
      if (grid.lambdas[i] == pick.lambda) pos = static_cast<int>(i);
    if (pos <= 2) ++top;
  }
  CHECK(top >= reps / 2);
}
