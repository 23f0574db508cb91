#include "core/operator.hpp"

#include <stdexcept>

namespace qpmsa {

namespace {
Eigen::MatrixXd hopping_part(const LatticeRegion& region, double epsilon) {
  const int n = region.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const int d = region.dim();
  for (int i = 0; i < n; ++i) {
    const Site& x = region.site(i);
    for (int k = 0; k < d; ++k) {
      Site y = x;
      y[k] += 1;  // the -1 neighbor is handled from the other endpoint
      if (auto j = region.index_of(y)) {
        h(i, *j) = epsilon;
        h(*j, i) = epsilon;
      }
    }
  }
  return h;
}
}  // namespace

OperatorSlice assemble(const LatticeRegion& region, TorusPhase theta, double epsilon,
                       const PotentialProfile& v, const FrequencyVector& omega) {
  if (epsilon < 0.0) throw std::invalid_argument("assemble: epsilon must be >= 0");
  if (region.dim() != omega.dim())
    throw std::invalid_argument("assemble: region/frequency dimension mismatch");
  OperatorSlice op{hopping_part(region, epsilon), region, theta, epsilon, v, omega};
  for (int i = 0; i < region.size(); ++i)
    op.matrix(i, i) = v.eval(wrap_unit(theta.value() + omega.dot(region.site(i))));
  return op;
}

OperatorFactory::OperatorFactory(LatticeRegion region, double epsilon, PotentialProfile v,
                                 FrequencyVector omega)
    : region_(std::move(region)),
      epsilon_(epsilon),
      v_(std::move(v)),
      omega_(std::move(omega)),
      hopping_(hopping_part(region_, epsilon_)) {
  if (epsilon < 0.0) throw std::invalid_argument("OperatorFactory: epsilon must be >= 0");
  if (region_.dim() != omega_.dim())
    throw std::invalid_argument("OperatorFactory: region/frequency dimension mismatch");
}

OperatorSlice OperatorFactory::slice(TorusPhase theta) const {
  OperatorSlice op{matrix(theta.value()), region_, theta, epsilon_, v_, omega_};
  return op;
}

Eigen::MatrixXd OperatorFactory::matrix(double theta) const {
  Eigen::MatrixXd m = hopping_;
  for (int i = 0; i < region_.size(); ++i)
    m(i, i) = v_.eval(wrap_unit(theta + omega_.dot(region_.site(i))));
  return m;
}

Eigen::VectorXd OperatorFactory::diag_d1(double theta) const {
  Eigen::VectorXd d(region_.size());
  for (int i = 0; i < region_.size(); ++i)
    d(i) = v_.eval_d1(wrap_unit(theta + omega_.dot(region_.site(i))));
  return d;
}

Eigen::VectorXd OperatorFactory::diag_d2(double theta) const {
  Eigen::VectorXd d(region_.size());
  for (int i = 0; i < region_.size(); ++i)
    d(i) = v_.eval_d2(wrap_unit(theta + omega_.dot(region_.site(i))));
  return d;
}

}  // namespace qpmsa
