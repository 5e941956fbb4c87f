#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp::solver {

/// Flat CSR view of an MDP for the sweep kernels. Actions of state s are
/// action_ptr[s] .. action_ptr[s + 1] in label order; transitions of compiled
/// action k are trans_ptr[k] .. trans_ptr[k + 1].
struct CompiledMdp {
  std::size_t num_states = 0;
  std::vector<std::size_t> action_ptr;
  std::vector<std::size_t> action_index;
  std::vector<double> reward;
  std::vector<std::size_t> trans_ptr;
  std::vector<std::uint32_t> trans_to;
  std::vector<double> trans_p;
};

CompiledMdp compile(const FiniteMdp& m);

/// Compiled action per state for a policy (npos on terminal states).
std::vector<std::size_t> compile_policy(const FiniteMdp& m, const CompiledMdp& c,
                                        const std::vector<std::size_t>& policy);

/// One Jacobi optimality sweep v -> out; returns max |out - v|.
double sweep_serial(const CompiledMdp& c, double gamma, const double* v, double* out);
double sweep_parallel(const CompiledMdp& c, double gamma, const double* v, double* out);

/// One Jacobi sweep of a fixed policy's Bellman operator.
double policy_sweep_serial(const CompiledMdp& c, const std::size_t* chosen, double gamma,
                           const double* v, double* out);
double policy_sweep_parallel(const CompiledMdp& c, const std::size_t* chosen, double gamma,
                             const double* v, double* out);

inline double q_value(const CompiledMdp& c, std::size_t k, double gamma, const double* v) {
  double acc = 0.0;
  for (std::size_t t = c.trans_ptr[k]; t < c.trans_ptr[k + 1]; ++t) acc += c.trans_p[t] * v[c.trans_to[t]];
  return c.reward[k] + gamma * acc;
}

inline double state_backup(const CompiledMdp& c, std::size_t s, double gamma, const double* v) {
  const std::size_t lo = c.action_ptr[s], hi = c.action_ptr[s + 1];
  if (lo == hi) return 0.0;
  double best = q_value(c, lo, gamma, v);
  for (std::size_t k = lo + 1; k < hi; ++k) {
    double q = q_value(c, k, gamma, v);
    if (q > best) best = q;
  }
  return best;
}

}  // namespace cmdp::solver
