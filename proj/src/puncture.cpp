#include "cmdp/puncture.hpp"

#include <cmath>

#include "cmdp/error.hpp"
#include "detail.hpp"

namespace cmdp {

Subprocess puncture(const MdpPtr& m, const std::set<StateId>& obstacles, double eps) {
  std::vector<char> blocked(m->num_states(), 0);
  for (const auto& o : obstacles) blocked[m->state_index(o)] = 1;
  std::vector<StateId> states;
  for (std::size_t s = 0; s < m->num_states(); ++s) {
    if (!blocked[s]) states.push_back(m->state(s));
  }
  std::vector<ActionSpec> actions;
  for (std::size_t a = 0; a < m->num_actions(); ++a) {
    const std::size_t anchor = m->anchor(a);
    if (anchor == npos || blocked[anchor]) continue;
    auto sup = m->support(a);
    auto entries = m->action(a).to.entries();
    double into = 0.0;
    bool touched = false;
    for (std::size_t k = 0; k < sup.size(); ++k) {
      if (sup[k] == npos) throw Error(ErrorKind::DanglingState, "dangling transition target");
      if (blocked[sup[k]]) {
        into += entries[k].second;
        touched = true;
      }
    }
    if (into > eps) continue;
    ActionSpec spec = m->action(a);
    if (touched) {
      std::vector<Dist::Entry> kept;
      for (std::size_t k = 0; k < sup.size(); ++k) {
        if (!blocked[sup[k]]) kept.push_back(entries[k]);
      }
      spec.to = Dist(std::move(kept));
    }
    actions.push_back(std::move(spec));
  }
  auto sub = share(FiniteMdp(std::move(states), std::move(actions), m->has_reward()));
  std::vector<std::size_t> f(sub->num_states()), g(sub->num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = m->state_index(sub->state(s));
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = m->action_index(sub->action(a).id);
  MdpMorphism incl(sub, m, std::move(f), std::move(g), m->has_reward());
  return Subprocess{std::move(sub), std::move(incl)};
}

Subprocess puncture_along(const MdpPtr& m2, const MdpMorphism& sub, double eps) {
  if (!same_mdp(sub.target_ptr(), m2)) throw Error(ErrorKind::Mismatch, "subprocess does not target m2");
  std::set<StateId> image;
  for (auto t : sub.state_table()) image.insert(m2->state(t));
  return puncture(m2, image, eps);
}

bool check_static_obstacles(const MdpPtr& m, const std::set<StateId>& o1,
                            const std::set<StateId>& o2, double eps) {
  for (const auto& o : o1) {
    if (o2.count(o)) throw Error(ErrorKind::PreconditionFailed, "obstacle sets overlap at " + o.str());
  }
  std::set<StateId> both = o1;
  both.insert(o2.begin(), o2.end());
  auto m1 = puncture(m, o1, eps);
  auto m2 = puncture(m, o2, eps);
  auto m12 = puncture(m, both, eps);

  auto fiber = fiber_product(Cospan{m1.inclusion, m2.inclusion});
  if (!isomorphic(fiber.product, m12.mdp, eps)) return false;

  // Inclusions of M_12 into M_1 and M_2, by label.
  auto inclusion = [&](const Subprocess& big) {
    std::vector<std::size_t> f(m12.mdp->num_states()), g(m12.mdp->num_actions());
    for (std::size_t s = 0; s < f.size(); ++s) f[s] = big.mdp->state_index(m12.mdp->state(s));
    for (std::size_t a = 0; a < g.size(); ++a) g[a] = big.mdp->action_index(m12.mdp->action(a).id);
    return MdpMorphism(m12.mdp, big.mdp, std::move(f), std::move(g), m->has_reward());
  };
  auto glued = pushout(Span{inclusion(m1), inclusion(m2)}, RewardMode::IfPresent, eps);
  return isomorphic(glued.glued, m, eps).has_value();
}

bool check_disjoint_recovery(const Span& s, double eps) {
  if (!is_subprocess(s.m1) || !is_subprocess(s.m2)) {
    throw Error(ErrorKind::PreconditionFailed, "span legs must be subprocesses");
  }
  const FiniteMdp& m2 = s.m2.target();
  std::vector<char> in_image(m2.num_states(), 0);
  for (auto t : s.m2.state_table()) in_image[t] = 1;
  std::vector<char> from_apex(m2.num_actions(), 0);
  for (auto b : s.m2.action_table()) from_apex[b] = 1;
  for (std::size_t a = 0; a < m2.num_actions(); ++a) {
    if (from_apex[a]) continue;
    double outside = 0.0;
    auto sup = m2.support(a);
    auto entries = m2.action(a).to.entries();
    for (std::size_t k = 0; k < sup.size(); ++k) {
      if (!in_image[sup[k]]) outside += entries[k].second;
    }
    if (!(outside > eps)) {
      throw Error(ErrorKind::PreconditionFailed,
                  "action " + m2.action(a).id.str() + " of M2 outside M3 is supported on M3");
    }
  }

  auto glue = pushout(s, RewardMode::IfPresent, eps);
  std::set<StateId> drop;
  for (std::size_t t = 0; t < m2.num_states(); ++t) {
    if (!in_image[t]) drop.insert(glue.glued->state(glue.incl2.f(t)));
  }
  auto rest = puncture(glue.glued, drop, eps);

  const FiniteMdp& m1 = s.m1.target();
  std::vector<std::size_t> f(m1.num_states());
  for (std::size_t t = 0; t < f.size(); ++t) {
    auto idx = rest.mdp->find_state(glue.glued->state(glue.incl1.f(t)));
    if (!idx) return false;
    f[t] = *idx;
  }
  if (extend_to_isomorphism(s.m1.target_ptr(), rest.mdp, f, eps)) return true;
  return isomorphic(s.m1.target_ptr(), rest.mdp, eps).has_value();
}

std::vector<Label> unnest_pair(const Label& label, std::size_t n) {
  std::vector<Label> out(n, label);
  Label cur = label;
  for (std::size_t k = n; k-- > 1;) {
    if (cur.kind() != Label::Kind::Pair) throw Error(ErrorKind::Malformed, "expected a nested pair label");
    out[k] = cur.child(1);
    cur = cur.child(0);
  }
  out[0] = cur;
  return out;
}

MdpPtr collision_free_product(const MdpPtr& m, std::size_t n_agents, std::size_t budget) {
  if (n_agents < 2) throw Error(ErrorKind::PreconditionFailed, "need at least two agents");
  double size = std::pow(static_cast<double>(m->num_states()), static_cast<double>(n_agents));
  if (size > static_cast<double>(budget)) {
    throw Error(ErrorKind::BudgetExceeded, "product would have " + format_double(size) + " states");
  }
  MdpPtr prod = m;
  for (std::size_t k = 1; k < n_agents; ++k) prod = cartesian_product(prod, m).product;
  std::set<StateId> diagonal;
  for (const auto& s : prod->states()) {
    auto parts = unnest_pair(s.label(), n_agents);
    bool hit = false;
    for (std::size_t i = 0; i < n_agents && !hit; ++i) {
      for (std::size_t j = i + 1; j < n_agents && !hit; ++j) hit = parts[i] == parts[j];
    }
    if (hit) diagonal.insert(s);
  }
  return puncture(prod, diagonal).mdp;
}

}  // namespace cmdp
