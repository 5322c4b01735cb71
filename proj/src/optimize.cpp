#include "trialage/optimize.hpp"

#include <cmath>

namespace trialage {

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

OptimResult minimize_batch_gd(const ObjectiveFn& fn, std::vector<double> x0,
                              const OptimOptions& opts) {
  const std::size_t dim = x0.size();
  OptimResult res;
  res.x = std::move(x0);

  std::vector<double> grad(dim, 0.0);
  std::vector<double> trial(dim, 0.0);
  double value = fn(res.x, &grad);
  double gnorm = l2_norm(grad);
  double step = 1.0;
  constexpr double kArmijoC = 1e-4;

  int epoch = 0;
  for (; epoch < opts.max_epochs && gnorm > opts.tol; ++epoch) {
    const double gsq = gnorm * gnorm;
    double t = step * 2.0;  // warm start from the last accepted step
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      for (std::size_t i = 0; i < dim; ++i) trial[i] = res.x[i] - t * grad[i];
      double trial_value = fn(trial, nullptr);
      if (std::isfinite(trial_value) && trial_value <= value - kArmijoC * t * gsq) {
        res.x.swap(trial);
        value = trial_value;
        step = t;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no descent step representable; gradient noise floor
    value = fn(res.x, &grad);
    gnorm = l2_norm(grad);
    if (opts.on_step) opts.on_step(epoch + 1, value, gnorm);
  }

  res.value = value;
  res.grad_norm = gnorm;
  res.epochs = epoch;
  res.converged = gnorm <= opts.tol;
  return res;
}

}  // namespace trialage
