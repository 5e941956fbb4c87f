#include "cmdp/zigzag.hpp"

#include <algorithm>
#include <cmath>

#include "cmdp/error.hpp"

namespace cmdp {

namespace {

Solution solve(const FiniteMdp& m, const SolverOptions& opts, const char* what) {
  auto sol = value_iteration(m, opts);
  if (!sol.converged) {
    throw Error(ErrorKind::SolverDiverged, std::string("value iteration did not converge on ") + what);
  }
  return sol;
}

// Argmax over A_s of the component, with values read through `into`.
std::vector<std::size_t> argmax_through(const FiniteMdp& m, std::size_t s, const MdpMorphism& into,
                                        const std::vector<double>& values, double gamma,
                                        double tie_tol) {
  auto acts = m.actions_at(s);
  std::vector<double> q;
  for (auto a : acts) {
    double acc = 0.0;
    auto sup = m.support(a);
    auto entries = m.action(a).to.entries();
    for (std::size_t k = 0; k < sup.size(); ++k) acc += entries[k].second * values[into.f(sup[k])];
    q.push_back(m.reward(a) + gamma * acc);
  }
  std::vector<std::size_t> out;
  if (q.empty()) return out;
  const double best = *std::max_element(q.begin(), q.end());
  for (std::size_t k = 0; k < acts.size(); ++k) {
    if (q[k] >= best - tie_tol) out.push_back(acts[k]);
  }
  return out;
}

// Component whose policy decides each state of C_n.
std::vector<std::size_t> owners(const ZigZagDiagram& z, const Composite& c) {
  std::vector<std::size_t> owner(c.mdp->num_states(), npos);
  for (std::size_t i = z.environments.size(); i-- > 0;) {
    const FiniteMdp& m = *z.environments[i];
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      const std::size_t t = c.inclusions[i].f(s);
      if (owner[t] == npos && !m.is_terminal(s)) owner[t] = i;
    }
  }
  return owner;
}

std::string describe(const FiniteMdp& m, const std::vector<std::size_t>& acts) {
  std::string out = "{";
  for (std::size_t k = 0; k < acts.size(); ++k) {
    if (k) out += ",";
    out += m.action(acts[k]).id.str();
  }
  return out + "}";
}

}  // namespace

ValidationReport check_diagram(const ZigZagDiagram& z, double eps) {
  ValidationReport report;
  if (z.environments.empty()) {
    report.issues.push_back("diagram has no environments");
    return report;
  }
  if (z.bridges.size() + 1 != z.environments.size()) {
    report.issues.push_back("need exactly one bridge between consecutive environments");
    return report;
  }
  for (std::size_t i = 0; i < z.environments.size(); ++i) {
    if (!z.environments[i]->has_reward()) {
      report.issues.push_back("environment " + std::to_string(i) + " carries no reward");
    }
  }
  for (std::size_t i = 0; i < z.bridges.size(); ++i) {
    const auto& b = z.bridges[i];
    const std::string name = "bridge " + std::to_string(i);
    if (!same_mdp(b.left.source_ptr(), b.right.source_ptr())) report.issues.push_back(name + ": legs start at different MDPs");
    if (!same_mdp(b.left.target_ptr(), z.environments[i])) report.issues.push_back(name + ": left leg misses its environment");
    if (!same_mdp(b.right.target_ptr(), z.environments[i + 1])) report.issues.push_back(name + ": right leg misses its environment");
    for (const auto& issue : check_morphism(b.left, eps).issues) report.issues.push_back(name + " left: " + issue);
    for (const auto& issue : check_morphism(b.right, eps).issues) report.issues.push_back(name + " right: " + issue);
    if (!is_subprocess(b.left)) report.issues.push_back(name + ": left leg is not a subprocess");
    if (!is_subprocess(b.right)) report.issues.push_back(name + ": right leg is not a subprocess");
  }
  return report;
}

Composite build_composite(const ZigZagDiagram& z, double eps) {
  if (z.environments.empty() || z.bridges.size() + 1 != z.environments.size()) {
    throw Error(ErrorKind::Malformed, "zig-zag diagram has inconsistent lengths");
  }
  Composite c{z.environments[0], {identity(z.environments[0])}};
  for (std::size_t i = 0; i < z.bridges.size(); ++i) {
    const auto& b = z.bridges[i];
    Span span{compose(c.inclusions[i], b.left), b.right};
    auto glue = pushout(span, RewardMode::Require, eps);
    for (auto& incl : c.inclusions) incl = compose(glue.incl1, incl);
    c.inclusions.push_back(glue.incl2);
    c.mdp = glue.glued;
  }
  return c;
}

ZigZagDiagram truncate(const ZigZagDiagram& z, std::size_t i) {
  if (i >= z.environments.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "truncation index " + std::to_string(i) + " past the last environment");
  }
  ZigZagDiagram out;
  out.environments.assign(z.environments.begin() + static_cast<std::ptrdiff_t>(i), z.environments.end());
  out.bridges.assign(z.bridges.begin() + static_cast<std::ptrdiff_t>(i), z.bridges.end());
  return out;
}

bool is_forward_moving(const ZigZagDiagram& z) {
  return std::all_of(z.bridges.begin(), z.bridges.end(),
                     [](const Bridge& b) { return is_full_subprocess(b.left); });
}

ZigZagDiagram make_forward_moving(const ZigZagDiagram& z) {
  const std::size_t n = z.environments.size();
  std::vector<std::vector<char>> keep_env(n), keep_bridge(z.bridges.size());
  for (std::size_t i = 0; i < n; ++i) keep_env[i].assign(z.environments[i]->num_actions(), 1);
  for (std::size_t i = 0; i < z.bridges.size(); ++i) keep_bridge[i].assign(z.bridges[i].mdp()->num_actions(), 1);

  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < z.bridges.size(); ++i) {
      const auto& b = z.bridges[i];
      const FiniteMdp& m = *z.environments[i];
      std::vector<char> image_state(m.num_states(), 0), image_action(m.num_actions(), 0);
      for (auto t : b.left.state_table()) image_state[t] = 1;
      for (std::size_t x = 0; x < b.mdp()->num_actions(); ++x) {
        if (keep_bridge[i][x]) image_action[b.left.g(x)] = 1;
      }
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (keep_env[i][a] && image_state[m.anchor(a)] && !image_action[a]) {
          keep_env[i][a] = 0;
          changed = any = true;
        }
      }
    }
    for (std::size_t i = 0; i < z.bridges.size(); ++i) {
      const auto& b = z.bridges[i];
      for (std::size_t x = 0; x < b.mdp()->num_actions(); ++x) {
        if (keep_bridge[i][x] && (!keep_env[i][b.left.g(x)] || !keep_env[i + 1][b.right.g(x)])) {
          keep_bridge[i][x] = 0;
          changed = any = true;
        }
      }
    }
  }
  if (!any) return z;

  auto restrict = [](const MdpPtr& m, const std::vector<char>& keep) {
    std::vector<ActionSpec> acts;
    for (std::size_t a = 0; a < m->num_actions(); ++a) {
      if (keep[a]) acts.push_back(m->action(a));
    }
    std::vector<StateId> states(m->states().begin(), m->states().end());
    return share(FiniteMdp(std::move(states), std::move(acts), m->has_reward()));
  };
  auto relink = [](const MdpMorphism& old, const MdpPtr& src, const MdpPtr& tgt) {
    std::vector<std::size_t> f(old.state_table().begin(), old.state_table().end());
    std::vector<std::size_t> g(src->num_actions());
    for (std::size_t a = 0; a < g.size(); ++a) {
      const auto& image = old.map_action(src->action(a).id);
      g[a] = tgt->action_index(image);
    }
    return MdpMorphism(src, tgt, std::move(f), std::move(g), old.reward_compatible());
  };

  ZigZagDiagram out;
  for (std::size_t i = 0; i < n; ++i) out.environments.push_back(restrict(z.environments[i], keep_env[i]));
  for (std::size_t i = 0; i < z.bridges.size(); ++i) {
    const auto& b = z.bridges[i];
    if (b.mdp()->num_actions() > 0 &&
        std::none_of(keep_bridge[i].begin(), keep_bridge[i].end(), [](char k) { return k != 0; })) {
      throw Error(ErrorKind::EmptiedBridge, "bridge " + std::to_string(i) + " lost all of its actions");
    }
    auto nb = restrict(b.mdp(), keep_bridge[i]);
    out.bridges.push_back(Bridge{relink(b.left, nb, out.environments[i]),
                                 relink(b.right, nb, out.environments[i + 1])});
  }
  return out;
}

StitchedPolicy stitch_policies(const ZigZagDiagram& z, const Composite& c, const SolverOptions& opts) {
  StitchedPolicy sp;
  for (std::size_t i = 0; i < z.environments.size(); ++i) {
    sp.components.push_back(solve(*z.environments[i], opts, "a component"));
  }
  sp.owner = owners(z, c);
  sp.global.assign(c.mdp->num_states(), npos);
  for (std::size_t i = 0; i < z.environments.size(); ++i) {
    const FiniteMdp& m = *z.environments[i];
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      const std::size_t t = c.inclusions[i].f(s);
      if (sp.owner[t] == i) sp.global[t] = c.inclusions[i].g(sp.components[i].policy[s]);
    }
  }
  return sp;
}

MonotonicityReport check_monotonic(const ZigZagDiagram& z, const SolverOptions& opts, double tie_tol) {
  MonotonicityReport report;
  const Composite full = build_composite(z);
  const Solution vfull = solve(*full.mdp, opts, "the composite");
  const auto owner = owners(z, full);
  for (std::size_t i = 0; i < z.environments.size() && report.monotonic; ++i) {
    const FiniteMdp& m = *z.environments[i];
    const Composite part = i == 0 ? full : build_composite(truncate(z, i));
    const Solution vpart = i == 0 ? vfull : solve(*part.mdp, opts, "a truncated composite");
    const Solution vlocal = solve(m, opts, "a component");
    const MdpMorphism local = identity(z.environments[i]);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (m.is_terminal(s)) continue;
      auto a_full = argmax_through(m, s, full.inclusions[i], vfull.values, opts.gamma, tie_tol);
      auto a_part = argmax_through(m, s, part.inclusions[0], vpart.values, opts.gamma, tie_tol);
      if (a_full != a_part) {
        report.monotonic = false;
        report.witness = "component " + std::to_string(i) + " state " + m.state(s).str() + ": " +
                         describe(m, a_full) + " under C_n vs " + describe(m, a_part) + " under C_[i,n]";
        break;
      }
      if (owner[full.inclusions[i].f(s)] != i) continue;
      auto a_local = argmax_through(m, s, local, vlocal.values, opts.gamma, tie_tol);
      if (a_full != a_local) {
        report.monotonic = false;
        report.witness = "component " + std::to_string(i) + " state " + m.state(s).str() + ": " +
                         describe(m, a_full) + " under C_n vs " + describe(m, a_local) + " under M_i";
        break;
      }
    }
  }
  return report;
}

bool is_monotonic(const ZigZagDiagram& z, const SolverOptions& opts, double tie_tol) {
  return check_monotonic(z, opts, tie_tol).monotonic;
}

Theorem3Report verify_theorem3(const ZigZagDiagram& z, const SolverOptions& opts, double tol) {
  Theorem3Report r;
  r.tol = tol;
  r.forward_moving = is_forward_moving(z);
  try {
    auto mono = check_monotonic(z, opts);
    r.monotonic = mono.monotonic;
    r.monotonic_witness = mono.witness;
    const Composite c = build_composite(z);
    r.composite_states = c.mdp->num_states();
    r.composite_actions = c.mdp->num_actions();
    if (r.forward_moving) {
      const Solution vstar = solve(*c.mdp, opts, "the composite");
      const StitchedPolicy sp = stitch_policies(z, c, opts);
      const Solution vpi = policy_evaluation(*c.mdp, sp.global, opts);
      if (!vpi.converged) throw Error(ErrorKind::SolverDiverged, "policy evaluation did not converge");
      double gap = 0.0;
      for (std::size_t s = 0; s < vstar.values.size(); ++s) {
        gap = std::max(gap, std::abs(vpi.values[s] - vstar.values[s]));
      }
      r.gap = gap;
    }
  } catch (const Error& e) {
    r.monotonic = false;
    r.monotonic_witness = e.what();
  }
  r.pass = r.forward_moving && r.monotonic && r.gap && *r.gap <= tol;
  return r;
}

}  // namespace cmdp
