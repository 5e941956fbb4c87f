#include <cmath>

#include "solver/compiled.hpp"

namespace cmdp::solver {

double sweep_serial(const CompiledMdp& c, double gamma, const double* v, double* out) {
  double residual = 0.0;
  for (std::size_t s = 0; s < c.num_states; ++s) {
    out[s] = state_backup(c, s, gamma, v);
    residual = std::max(residual, std::abs(out[s] - v[s]));
  }
  return residual;
}

double policy_sweep_serial(const CompiledMdp& c, const std::size_t* chosen, double gamma,
                           const double* v, double* out) {
  double residual = 0.0;
  for (std::size_t s = 0; s < c.num_states; ++s) {
    out[s] = chosen[s] == npos ? 0.0 : q_value(c, chosen[s], gamma, v);
    residual = std::max(residual, std::abs(out[s] - v[s]));
  }
  return residual;
}

}  // namespace cmdp::solver
