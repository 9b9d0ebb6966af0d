#include "gar/qr_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gar {

namespace {

// Fraction-to-boundary ratio, as in standard Frisch-Newton implementations.
constexpr double kStepScale = 0.99995;

double step_length(const Vector& v, const Vector& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return std::min(1.0, kStepScale * alpha);
}

}  // namespace

FitResult solve_weighted_qr(const Matrix& z, const Vector& y,
                            const Vector& row_tau, const Vector& row_weight,
                            const QrOptions& opts) {
  const Eigen::Index n_all = z.rows();
  const Eigen::Index k = z.cols();
  if (y.size() != n_all || row_tau.size() != n_all || row_weight.size() != n_all)
    throw Error(ErrorKind::usage, "solve_weighted_qr: inconsistent row counts");

  // Rows with zero weight contribute nothing; drop them up front.
  std::vector<Eigen::Index> keep;
  keep.reserve(n_all);
  for (Eigen::Index i = 0; i < n_all; ++i) {
    if (row_weight[i] < 0.0)
      throw Error(ErrorKind::usage, "solve_weighted_qr: negative row weight");
    if (row_weight[i] > 0.0) keep.push_back(i);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(keep.size());

  FitResult out;
  out.dual = Vector::Zero(n_all);
  if (k == 0) {
    out.coefficients = Vector();
    out.converged = true;
    return out;
  }
  if (n < k) throw RankDeficient("fewer (weighted) rows than columns");

  Matrix zz(n, k);
  Vector yy(n), tt(n), uu(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    zz.row(r) = z.row(keep[r]);
    yy[r] = y[keep[r]];
    tt[r] = row_tau[keep[r]];
    uu[r] = row_weight[keep[r]];
    if (!(tt[r] > 0.0 && tt[r] < 1.0))
      throw Error(ErrorKind::usage, "solve_weighted_qr: row tau outside (0,1)");
  }

  {
    Eigen::ColPivHouseholderQR<Matrix> qr(zz);
    if (qr.rank() < k) throw RankDeficient("design columns are collinear");
  }

  // Bounded-variable LP: min c'x st A x = b, 0 <= x <= u,
  // with A = Z', c = -y, u = row weights, b = Z'(u .* (1 - tau)).
  const Vector c = -yy;
  Vector x = uu.cwiseProduct(Vector::Ones(n) - tt);
  Vector s = uu - x;
  const Vector b = zz.transpose() * x;  // exactly feasible start

  Matrix m(k, k);
  Eigen::LLT<Matrix, Eigen::Lower> llt;
  auto factor = [&](const Vector& d) {
    Matrix scaled = d.cwiseSqrt().asDiagonal() * zz;  // n x k
    m.setZero();
    m.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    llt.compute(m);
    if (llt.info() != Eigen::Success) {
      double jitter = 1e-12 * (m.trace() / k + 1.0);
      m.diagonal().array() += jitter;
      llt.compute(m);
      if (llt.info() != Eigen::Success)
        throw RankDeficient("normal matrix not positive definite");
    }
  };

  // Dual start from a least-squares multiplier.
  Vector lambda(k);
  factor(Vector::Ones(n));
  lambda = llt.solve(zz.transpose() * c);
  Vector r_reduced = c - zz * lambda;
  const double delta = std::max(1e-4 * r_reduced.cwiseAbs().maxCoeff(),
                                1e-6 * (1.0 + c.cwiseAbs().maxCoeff()));
  Vector zv = r_reduced.cwiseMax(0.0);
  zv.array() += delta;
  Vector wv = (-r_reduced).cwiseMax(0.0);
  wv.array() += delta;

  double gap = x.dot(zv) + s.dot(wv);
  int it = 0;
  bool converged = false;

  Vector d(n), h(n), dx(n), ds(n), dz(n), dw(n), dlam(k), rhs(k);
  Vector rc_x(n), rc_s(n);

  for (; it < opts.max_iter; ++it) {
    gap = x.dot(zv) + s.dot(wv);
    if (gap / (1.0 + std::abs(c.dot(x))) <= opts.tol) {
      converged = true;
      break;
    }

    const Vector r_p = b - zz.transpose() * x;
    const Vector r_u = uu - x - s;
    const Vector r_d = c - zz * lambda - zv + wv;

    d = (zv.cwiseQuotient(x) + wv.cwiseQuotient(s)).cwiseInverse();
    factor(d);

    // Affine (predictor) direction.
    h = -zv + wv + wv.cwiseProduct(r_u).cwiseQuotient(s) - r_d;
    rhs = r_p - zz.transpose() * d.cwiseProduct(h);
    dlam = llt.solve(rhs);
    dx = d.cwiseProduct(zz * dlam + h);
    ds = r_u - dx;
    dz = -zv - zv.cwiseProduct(dx).cwiseQuotient(x);
    dw = -wv - wv.cwiseProduct(ds).cwiseQuotient(s);

    double ap = std::min(step_length(x, dx), step_length(s, ds));
    double ad = std::min(step_length(zv, dz), step_length(wv, dw));

    const double mu = gap / (2.0 * n);
    const double mu_aff = ((x + ap * dx).dot(zv + ad * dz) +
                           (s + ap * ds).dot(wv + ad * dw)) /
                          (2.0 * n);
    double sigma = mu_aff / mu;
    sigma = std::clamp(sigma * sigma * sigma, 1e-8, 1.0);

    // Corrector with centering, same factorization.
    rc_x = -x.cwiseProduct(zv) - dx.cwiseProduct(dz);
    rc_x.array() += sigma * mu;
    rc_s = -s.cwiseProduct(wv) - ds.cwiseProduct(dw);
    rc_s.array() += sigma * mu;
    h = rc_x.cwiseQuotient(x) - rc_s.cwiseQuotient(s) +
        wv.cwiseProduct(r_u).cwiseQuotient(s) - r_d;
    rhs = r_p - zz.transpose() * d.cwiseProduct(h);
    dlam = llt.solve(rhs);
    dx = d.cwiseProduct(zz * dlam + h);
    ds = r_u - dx;
    dz = (rc_x - zv.cwiseProduct(dx)).cwiseQuotient(x);
    dw = (rc_s - wv.cwiseProduct(ds)).cwiseQuotient(s);

    ap = std::min(step_length(x, dx), step_length(s, ds));
    ad = std::min(step_length(zv, dz), step_length(wv, dw));
    if (ap < 1e-14 && ad < 1e-14) break;  // stalled

    x += ap * dx;
    s += ap * ds;
    lambda += ad * dlam;
    zv += ad * dz;
    wv += ad * dw;
  }

  gap = x.dot(zv) + s.dot(wv);
  const double gap_rel = gap / (1.0 + std::abs(c.dot(x)));
  converged = converged || gap_rel <= opts.tol;
  if (!converged && gap_rel > std::max(1e-4, opts.tol))
    throw NoConvergence("interior point gap " + std::to_string(gap_rel) +
                        " after " + std::to_string(it) + " iterations");

  out.coefficients = -lambda;
  out.iterations = it;
  out.converged = converged;
  for (Eigen::Index r = 0; r < n; ++r) out.dual[keep[r]] = x[r];
  return out;
}

FitResult fit_qr(const Vector& y, const Matrix& x_s, QuantileLevel tau,
                 bool include_intercept, const QrOptions& opts) {
  const Eigen::Index t_rows = y.size();
  const Eigen::Index p = x_s.cols();
  if (p > 0 && x_s.rows() != t_rows)
    throw Error(ErrorKind::usage, "fit_qr: X rows do not match Y");
  const Eigen::Index k = p + (include_intercept ? 1 : 0);
  if (t_rows < std::max<Eigen::Index>(k, p + 1))
    throw RankDeficient("fit_qr: need at least |S|+1 rows");

  Matrix z(t_rows, k);
  if (include_intercept) z.col(0).setOnes();
  if (p > 0) z.rightCols(p) = x_s;

  FitResult res = solve_weighted_qr(z, y, Vector::Constant(t_rows, tau.tau()),
                                    Vector::Ones(t_rows), opts);

  FitResult out;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.dual = res.dual;
  Vector fitted = Vector::Zero(t_rows);
  if (k > 0) {
    if (include_intercept) {
      out.intercept = res.coefficients[0];
      out.coefficients = res.coefficients.tail(p);
    } else {
      out.intercept = 0.0;
      out.coefficients = res.coefficients;
    }
    fitted = z * res.coefficients;
  } else {
    out.coefficients = Vector();
  }
  out.objective = mean_quantile_loss(tau, y - fitted);
  return out;
}

OlsProjection ols_project(const Vector& x_j, const Matrix& x_s) {
  const Eigen::Index t_rows = x_j.size();
  OlsProjection out;
  if (x_s.cols() == 0) {
    out.theta = Vector();
    out.residual = x_j;
    out.residual_var = x_j.squaredNorm() / static_cast<double>(t_rows);
    return out;
  }
  if (x_s.rows() != t_rows)
    throw Error(ErrorKind::usage, "ols_project: row mismatch");

  Matrix z(t_rows, x_s.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x_s.cols()) = x_s;
  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  if (qr.rank() < z.cols())
    throw RankDeficient("ols_project: conditioning set is collinear");
  out.theta = qr.solve(x_j);
  out.residual = x_j - z * out.theta;
  out.residual_var = out.residual.squaredNorm() / static_cast<double>(t_rows);
  return out;
}

double weighted_quantile(const Vector& values, const Vector& weights,
                         QuantileLevel tau) {
  if (values.size() != weights.size() || values.size() == 0)
    throw Error(ErrorKind::usage, "weighted_quantile: bad inputs");
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0)
      throw Error(ErrorKind::usage, "weighted_quantile: negative weight");
    total += weights[i];
  }
  if (total <= 0.0) throw AllZeroWeights("weighted_quantile");

  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });

  const double target = tau.tau() * total;
  const double eps = 1e-9 * total;
  double cum = 0.0;
  for (int idx : order) {
    cum += weights[idx];
    if (cum + eps >= target && weights[idx] > 0.0) return values[idx];
  }
  return values[order.back()];
}

double empirical_quantile(const Vector& values, QuantileLevel tau) {
  return weighted_quantile(values, Vector::Ones(values.size()), tau);
}

}  // namespace gar
