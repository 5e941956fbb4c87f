#pragma once

#include <map>
#include <span>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

struct SolverOptions {
  double gamma = 0.9;
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  /// OpenMP sweep; results are bit-identical to the serial sweep.
  bool parallel = false;
};

/// Values and greedy policy indexed like the MDP's states.
struct Solution {
  std::vector<double> values;
  /// Action index per state; npos on terminal states.
  std::vector<std::size_t> policy;
  double gamma = 0.0;
  std::size_t iterations = 0;
  /// Sup-norm change of the last sweep.
  double residual = 0.0;
  bool converged = false;
  /// Sup-norm change of every sweep.
  std::vector<double> residuals;

  std::map<StateId, double> value_map(const FiniteMdp& m) const;
  std::map<StateId, ActionId> policy_map(const FiniteMdp& m) const;
};

/// Sweep-change threshold tol (1 - gamma) / (2 gamma) that bounds the value
/// error by tol; 0 when gamma = 0 (one sweep is exact).
double stopping_threshold(double gamma, double tol);

/// Jacobi value iteration from v = 0. Terminal states stay at 0; ties in the
/// greedy policy go to the smallest action within tol. Hitting max_iter
/// returns the last iterate with converged = false. Throws
/// Error(PreconditionFailed) if m has no rewards or gamma is outside [0, 1).
Solution value_iteration(const FiniteMdp& m, const SolverOptions& opts = {});

/// Fixed-point of the Bellman operator of a deterministic policy (action
/// index per state; terminal states ignored). Throws Error(PreconditionFailed)
/// if the policy is missing or misplaced on a non-terminal state.
Solution policy_evaluation(const FiniteMdp& m, const std::vector<std::size_t>& policy,
                           const SolverOptions& opts = {});

struct Backup {
  double value = 0.0;
  /// Actions within tol of the maximum, in label order.
  std::vector<std::size_t> argmax;
};

/// One-step backup q(a) = R(a) + gamma * sum_s' T(a)(s') v(s') over A_s.
Backup bellman_backup(const FiniteMdp& m, std::span<const double> values, std::size_t s,
                      double gamma, double tol = 1e-9);

/// q(a) for one action.
double action_value(const FiniteMdp& m, std::span<const double> values, std::size_t a, double gamma);

}  // namespace cmdp
