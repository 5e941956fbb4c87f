#include <cmath>

#include "solver/compiled.hpp"

namespace cmdp::solver {

// Same per-state arithmetic as the serial kernels; max is order-independent,
// so results match bit for bit.

double sweep_parallel(const CompiledMdp& c, double gamma, const double* v, double* out) {
  double residual = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(c.num_states);
#pragma omp parallel for schedule(static) reduction(max : residual)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    out[s] = state_backup(c, static_cast<std::size_t>(s), gamma, v);
    residual = std::max(residual, std::abs(out[s] - v[s]));
  }
  return residual;
}

double policy_sweep_parallel(const CompiledMdp& c, const std::size_t* chosen, double gamma,
                             const double* v, double* out) {
  double residual = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(c.num_states);
#pragma omp parallel for schedule(static) reduction(max : residual)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    out[s] = chosen[s] == npos ? 0.0 : q_value(c, chosen[s], gamma, v);
    residual = std::max(residual, std::abs(out[s] - v[s]));
  }
  return residual;
}

}  // namespace cmdp::solver
