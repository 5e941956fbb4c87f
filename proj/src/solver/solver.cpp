#include "cmdp/solver.hpp"

#include <cmath>

#include "cmdp/error.hpp"
#include "solver/compiled.hpp"

namespace cmdp {

namespace {

void check_options(const FiniteMdp& m, const SolverOptions& opts) {
  if (!m.has_reward()) throw Error(ErrorKind::PreconditionFailed, "solver needs a rewarded MDP");
  if (!(opts.gamma >= 0.0 && opts.gamma < 1.0)) {
    throw Error(ErrorKind::PreconditionFailed, "gamma must lie in [0, 1)");
  }
}

template <class Sweep>
void iterate(Solution& sol, std::size_t n, const SolverOptions& opts, Sweep sweep) {
  const double threshold = stopping_threshold(opts.gamma, opts.tol);
  std::vector<double> next(n, 0.0);
  sol.values.assign(n, 0.0);
  sol.gamma = opts.gamma;
  while (sol.iterations < opts.max_iter) {
    sol.residual = sweep(sol.values.data(), next.data());
    sol.residuals.push_back(sol.residual);
    sol.values.swap(next);
    ++sol.iterations;
    if (opts.gamma == 0.0 || sol.residual <= threshold) {
      sol.converged = true;
      break;
    }
  }
}

}  // namespace

double stopping_threshold(double gamma, double tol) {
  if (gamma == 0.0) return 0.0;
  return tol * (1.0 - gamma) / (2.0 * gamma);
}

std::map<StateId, double> Solution::value_map(const FiniteMdp& m) const {
  std::map<StateId, double> out;
  for (std::size_t s = 0; s < values.size(); ++s) out.emplace(m.state(s), values[s]);
  return out;
}

std::map<StateId, ActionId> Solution::policy_map(const FiniteMdp& m) const {
  std::map<StateId, ActionId> out;
  for (std::size_t s = 0; s < policy.size(); ++s) {
    if (policy[s] != npos) out.emplace(m.state(s), m.action(policy[s]).id);
  }
  return out;
}

Solution value_iteration(const FiniteMdp& m, const SolverOptions& opts) {
  check_options(m, opts);
  const auto c = solver::compile(m);
  Solution sol;
  iterate(sol, m.num_states(), opts, [&](const double* v, double* out) {
    return opts.parallel ? solver::sweep_parallel(c, opts.gamma, v, out)
                         : solver::sweep_serial(c, opts.gamma, v, out);
  });
  sol.policy.assign(m.num_states(), npos);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    auto b = bellman_backup(m, sol.values, s, opts.gamma, opts.tol);
    if (!b.argmax.empty()) sol.policy[s] = b.argmax.front();
  }
  return sol;
}

Solution policy_evaluation(const FiniteMdp& m, const std::vector<std::size_t>& policy,
                           const SolverOptions& opts) {
  check_options(m, opts);
  const auto c = solver::compile(m);
  const auto chosen = solver::compile_policy(m, c, policy);
  Solution sol;
  iterate(sol, m.num_states(), opts, [&](const double* v, double* out) {
    return opts.parallel ? solver::policy_sweep_parallel(c, chosen.data(), opts.gamma, v, out)
                         : solver::policy_sweep_serial(c, chosen.data(), opts.gamma, v, out);
  });
  sol.policy.assign(m.num_states(), npos);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (!m.is_terminal(s)) sol.policy[s] = policy[s];
  }
  return sol;
}

double action_value(const FiniteMdp& m, std::span<const double> values, std::size_t a, double gamma) {
  double acc = 0.0;
  auto sup = m.support(a);
  auto entries = m.action(a).to.entries();
  for (std::size_t k = 0; k < sup.size(); ++k) acc += entries[k].second * values[sup[k]];
  return m.reward(a) + gamma * acc;
}

Backup bellman_backup(const FiniteMdp& m, std::span<const double> values, std::size_t s,
                      double gamma, double tol) {
  Backup b;
  auto acts = m.actions_at(s);
  if (acts.empty()) return b;
  std::vector<double> q;
  q.reserve(acts.size());
  for (auto a : acts) q.push_back(action_value(m, values, a, gamma));
  b.value = q.front();
  for (double x : q) b.value = std::max(b.value, x);
  for (std::size_t k = 0; k < acts.size(); ++k) {
    if (q[k] >= b.value - tol) b.argmax.push_back(acts[k]);
  }
  return b;
}

}  // namespace cmdp
