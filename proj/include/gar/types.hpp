#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gar/errors.hpp"

namespace gar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<int>;  // sorted, unique column indices

class QuantileLevel {
 public:
  explicit QuantileLevel(double tau) : tau_(tau) {
    if (!(tau > 0.0 && tau < 1.0))
      throw Error(ErrorKind::usage, "quantile level must lie in (0,1)");
  }
  double tau() const { return tau_; }

 private:
  double tau_;
};

// Smallest count c with c/n >= tau, with a relative epsilon so that values
// like 0.05*100 resolve to 5 despite binary rounding.
inline int quantile_count(double tau, int n) {
  double target = tau * n;
  int c = static_cast<int>(std::ceil(target - 1e-9 * (std::abs(target) + 1.0)));
  if (c < 1) c = 1;
  if (c > n) c = n;
  return c;
}

}  // namespace gar
