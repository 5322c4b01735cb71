#ifndef TRIALAGE_OPTIMIZE_HPP
#define TRIALAGE_OPTIMIZE_HPP

#include <functional>
#include <vector>

namespace trialage {

struct OptimOptions {
  int max_epochs = 500;
  double tol = 1e-4;  // stop when the gradient L2 norm drops below this
  // Called after every accepted step with (epoch, objective value, grad norm).
  std::function<void(int, double, double)> on_step;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int epochs = 0;
  bool converged = false;
};

// Objective callback: returns f(x); when grad != nullptr also fills df/dx.
using ObjectiveFn =
    std::function<double(const std::vector<double>&, std::vector<double>*)>;

// Batch gradient descent with Armijo backtracking line search. Accepted steps
// never increase the objective. Deterministic.
OptimResult minimize_batch_gd(const ObjectiveFn& fn, std::vector<double> x0,
                              const OptimOptions& opts);

}  // namespace trialage

#endif  // TRIALAGE_OPTIMIZE_HPP
