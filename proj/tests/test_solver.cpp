#include <cmath>
#include <cstring>

#include "doctest.h"

#include "cmdp/error.hpp"
#include "cmdp/puncture.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/worlds.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "solver/compiled.hpp"

using namespace cmdp;
using namespace cmdp::testing;

namespace {

StateId st(const char* s) { return StateId::atom(s); }
ActionId ac(const char* a) { return ActionId::atom(a); }

FiniteMdp self_loop(double r) {
  auto s = st("s");
  return FiniteMdp({s}, {ActionSpec{ac("a"), s, Dist::dirac(s), r}}, true);
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("stopping threshold") {
  CHECK(stopping_threshold(0.9, 1e-9) == doctest::Approx(1e-9 * 0.1 / 1.8));
  CHECK(stopping_threshold(0.0, 1e-9) == 0.0);
}

TEST_CASE("self-loop with reward 1 at gamma 0.5 is worth 2") {
  SolverOptions opts;
  opts.gamma = 0.5;
  auto sol = value_iteration(self_loop(1.0), opts);
  CHECK(sol.converged);
  CHECK(std::abs(sol.values[0] - 2.0) <= 1e-9);
  CHECK(sol.policy[0] == 0);
}

TEST_CASE("two-state chain into a terminal state") {
  auto s = st("s"), t = st("t");
  FiniteMdp m({s, t}, {ActionSpec{ac("step"), s, Dist::dirac(t), 1.0}}, true);
  auto sol = value_iteration(m);
  CHECK(sol.values[0] == 1.0);
  CHECK(sol.values[1] == 0.0);
  CHECK(sol.policy[1] == npos);
  CHECK(sol.policy_map(m).size() == 1);
  CHECK(sol.value_map(m).at(t) == 0.0);
}

TEST_CASE("gamma 0 is exact after one sweep") {
  Rng rng(701);
  auto m = random_mdp(rng, MdpShape{});
  SolverOptions opts;
  opts.gamma = 0.0;
  auto sol = value_iteration(m, opts);
  CHECK(sol.iterations == 1);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    CHECK(sol.values[s] == bellman_backup(m, std::vector<double>(m.num_states(), 0.0), s, 0.0).value);
  }
}

TEST_CASE("obstacle grid: v = gamma^(d - 1) by shortest path") {
  auto layout = fig1_layout();
  auto grid = share(fig1_grid());
  auto safe = puncture(grid, cell_states(layout.red())).mdp;
  auto goal = cell_state(layout.goal);
  auto m = make_absorbing(*safe, {goal});
  auto sol = value_iteration(m);
  auto dist = bfs_distance(m, m.state_index(goal));
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const double want = dist[s] == 0 ? 0.0 : std::pow(0.9, static_cast<double>(dist[s]) - 1.0);
    REQUIRE(dist[s] != npos);
    CHECK(std::abs(sol.values[s] - want) <= 1e-9);
  }
}

TEST_CASE("errors and iteration cap") {
  auto s = st("s");
  FiniteMdp bare({s}, {ActionSpec{ac("a"), s, Dist::dirac(s), {}}});
  CHECK_THROWS_AS(value_iteration(bare), Error);
  SolverOptions opts;
  opts.gamma = 1.0;
  CHECK_THROWS_AS(value_iteration(self_loop(1.0), opts), Error);
  opts.gamma = -0.1;
  CHECK_THROWS_AS(value_iteration(self_loop(1.0), opts), Error);
  opts.gamma = 0.99;
  opts.max_iter = 5;
  auto sol = value_iteration(self_loop(1.0), opts);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 5);
  CHECK(sol.values[0] > 0.0);
}

TEST_CASE("policy evaluation") {
  auto m = self_loop(0.0);
  auto zero = policy_evaluation(m, {0});
  CHECK(zero.values[0] == 0.0);
  CHECK_THROWS_AS(policy_evaluation(m, {npos}), Error);

  Rng rng(702);
  for (int i = 0; i < 100; ++i) {
    auto r = random_mdp(rng, MdpShape{3, 3, 3, 7, 3, true, "s"});
    std::vector<std::size_t> pol(r.num_states(), npos);
    for (std::size_t s = 0; s < r.num_states(); ++s) {
      auto acts = r.actions_at(s);
      if (!acts.empty()) pol[s] = acts[uniform(rng, 0, acts.size() - 1)];
    }
    auto exact = policy_value_exact(r, pol, 0.9);
    auto ev = policy_evaluation(r, pol);
    CHECK(sup_diff(ev.values, exact) <= 1e-9);

    auto opt = value_iteration(r);
    auto greedy = policy_evaluation(r, opt.policy);
    CHECK(sup_diff(greedy.values, opt.values) <= 2e-9);
  }
}

TEST_CASE("bellman backup") {
  auto s = st("s"), t = st("t");
  FiniteMdp choice({s, t}, {ActionSpec{ac("one"), s, Dist::dirac(t), 1.0}, ActionSpec{ac("two"), s, Dist::dirac(t), 2.0}},
                   true);
  std::vector<double> v{0.0, 0.0};
  auto b = bellman_backup(choice, v, 0, 0.9);
  CHECK(b.value == 2.0);
  REQUIRE(b.argmax.size() == 1);
  CHECK(choice.action(b.argmax[0]).id == ac("two"));
  auto term = bellman_backup(choice, v, 1, 0.9);
  CHECK(term.value == 0.0);
  CHECK(term.argmax.empty());

  // Next to the goal, the entering move is the only maximizer.
  auto layout = fig1_layout();
  auto m = make_absorbing(*puncture(share(fig1_grid()), cell_states(layout.red())).mdp, {cell_state(layout.goal)});
  auto sol = value_iteration(m);
  auto left = m.state_index(cell_state({2, 3}));
  auto g = bellman_backup(m, sol.values, left, 0.9, 1e-9);
  REQUIRE(g.argmax.size() == 1);
  CHECK(m.action(g.argmax[0]).id == cell_action({2, 3}, Direction::Right));
}

TEST_CASE("ties go to the smallest action") {
  auto s = st("s");
  FiniteMdp m({s}, {ActionSpec{ac("b"), s, Dist::dirac(s), 1.0}, ActionSpec{ac("a"), s, Dist::dirac(s), 1.0}}, true);
  auto sol = value_iteration(m);
  CHECK(m.action(sol.policy[0]).id == ac("a"));
}

TEST_CASE("solver laws on random MDPs") {
  Rng rng(703);
  for (int i = 0; i < 200; ++i) {
    auto m = share(random_mdp(rng, MdpShape{1, 8, 1, 16, 3, true, "s"}));
    SolverOptions opts;
    opts.gamma = 0.5 + 0.45 * static_cast<double>(uniform(rng, 0, 10)) / 10.0;
    auto sol = value_iteration(*m, opts);
    REQUIRE(sol.converged);
    // Contraction: residuals never grow after the first sweep.
    for (std::size_t k = 2; k < sol.residuals.size(); ++k) CHECK(sol.residuals[k] <= sol.residuals[k - 1]);
    CHECK(sol.residual <= stopping_threshold(opts.gamma, opts.tol));

    // Greedy policy value is close to v*.
    auto exact = policy_value_exact(*m, sol.policy, opts.gamma);
    CHECK(sup_diff(exact, sol.values) <= 2 * opts.tol * (1 + opts.gamma) / (1 - opts.gamma) + 1e-12);
    for (std::size_t s = 0; s < m->num_states(); ++s) {
      if (m->is_terminal(s)) {
        CHECK(sol.values[s] == 0.0);
        CHECK(sol.policy[s] == npos);
      } else {
        CHECK(m->action(sol.policy[s]).state == m->state(s));
      }
    }

    // A renamed copy gets the same values under the renaming.
    auto r = random_relabel(rng, m, "r");
    auto other = value_iteration(r.target(), opts);
    for (std::size_t s = 0; s < m->num_states(); ++s) {
      CHECK(std::abs(other.values[r.f(s)] - sol.values[s]) <= 1e-12);
    }

    // The parallel sweep is bit-identical.
    opts.parallel = true;
    auto par = value_iteration(*m, opts);
    CHECK(bit_equal(par.values, sol.values));
    CHECK(par.policy == sol.policy);
    CHECK(par.iterations == sol.iterations);
  }
}

TEST_CASE("sweep kernels agree bit for bit on a large grid") {
  auto m = grid_world(GridSpec{40, 40, {0, 0}, 0.2}, {}, {{39, 39}});
  auto c = solver::compile(m);
  std::vector<double> v(m.num_states(), 0.0), a(m.num_states()), b(m.num_states());
  for (int k = 0; k < 50; ++k) {
    const double ra = solver::sweep_serial(c, 0.95, v.data(), a.data());
    const double rb = solver::sweep_parallel(c, 0.95, v.data(), b.data());
    REQUIRE(bit_equal(a, b));
    CHECK(ra == rb);
    v = a;
  }
  std::vector<std::size_t> pol(m.num_states());
  for (std::size_t s = 0; s < m.num_states(); ++s) pol[s] = m.actions_at(s)[s % m.actions_at(s).size()];
  auto chosen = solver::compile_policy(m, c, pol);
  CHECK(solver::policy_sweep_serial(c, chosen.data(), 0.95, v.data(), a.data()) ==
        solver::policy_sweep_parallel(c, chosen.data(), 0.95, v.data(), b.data()));
  CHECK(bit_equal(a, b));
}
