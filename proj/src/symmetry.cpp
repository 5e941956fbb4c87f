#include "cmdp/symmetry.hpp"

#include <cmath>
#include <deque>
#include <map>

#include "cmdp/error.hpp"
#include "detail.hpp"

namespace cmdp {

Permutation identity_permutation(const FiniteMdp& m) {
  Permutation p;
  p.states.resize(m.num_states());
  p.actions.resize(m.num_actions());
  for (std::size_t i = 0; i < p.states.size(); ++i) p.states[i] = i;
  for (std::size_t i = 0; i < p.actions.size(); ++i) p.actions[i] = i;
  return p;
}

Permutation compose(const Permutation& p, const Permutation& q) {
  Permutation r;
  r.states.resize(q.states.size());
  r.actions.resize(q.actions.size());
  for (std::size_t i = 0; i < r.states.size(); ++i) r.states[i] = p.states[q.states[i]];
  for (std::size_t i = 0; i < r.actions.size(); ++i) r.actions[i] = p.actions[q.actions[i]];
  return r;
}

Permutation permutation_from_maps(const FiniteMdp& m, const StateMap& states, const ActionMap& actions) {
  Permutation p = identity_permutation(m);
  for (const auto& [from, to] : states) {
    auto i = m.find_state(from), j = m.find_state(to);
    if (!i || !j) throw Error(ErrorKind::Mismatch, "permutation names unknown state");
    p.states[*i] = *j;
  }
  for (const auto& [from, to] : actions) {
    auto i = m.find_action(from), j = m.find_action(to);
    if (!i || !j) throw Error(ErrorKind::Mismatch, "permutation names unknown action");
    p.actions[*i] = *j;
  }
  return p;
}

GroupAction::GroupAction(MdpPtr m, std::vector<Permutation> generators,
                         std::vector<Permutation> elements)
    : mdp_(std::move(m)), generators_(std::move(generators)), elements_(std::move(elements)) {}

std::string GroupAction::element_name(std::size_t g) const {
  if (g >= elements_.size()) throw Error(ErrorKind::IndexOutOfRange, "no such group element");
  return "g" + std::to_string(g);
}

MdpMorphism GroupAction::rho(std::size_t g) const {
  const auto& p = element(g);
  return MdpMorphism(mdp_, mdp_, p.states, p.actions, mdp_->has_reward());
}

GroupAction close_group(const MdpPtr& m, std::vector<Permutation> generators, std::size_t budget,
                        double eps) {
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& p = generators[k];
    const std::string name = "generator " + std::to_string(k);
    if (p.states.size() != m->num_states() || p.actions.size() != m->num_actions() ||
        !detail::injective(p.states, m->num_states()) ||
        !detail::injective(p.actions, m->num_actions())) {
      throw Error(ErrorKind::NotAutomorphism, name + " is not a bijection");
    }
    Permutation inv = p;
    for (std::size_t i = 0; i < p.states.size(); ++i) inv.states[p.states[i]] = i;
    for (std::size_t i = 0; i < p.actions.size(); ++i) inv.actions[p.actions[i]] = i;
    for (const Permutation* dir : {&p, static_cast<const Permutation*>(&inv)}) {
      auto report = check_morphism(MdpMorphism(m, m, dir->states, dir->actions), eps);
      if (!report.ok()) {
        throw Error(ErrorKind::NotAutomorphism,
                    name + (dir == &p ? "" : " (inverse)") + ": " + report.issues.front());
      }
    }
  }
  std::vector<Permutation> elements{identity_permutation(*m)};
  std::map<Permutation, std::size_t> seen{{elements[0], 0}};
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t e = queue.front();
    queue.pop_front();
    for (const auto& gen : generators) {
      Permutation next = compose(gen, elements[e]);
      if (seen.count(next)) continue;
      if (elements.size() >= budget) {
        throw Error(ErrorKind::BudgetExceeded, "group exceeds " + std::to_string(budget) + " elements");
      }
      seen.emplace(next, elements.size());
      queue.push_back(elements.size());
      elements.push_back(std::move(next));
    }
  }
  return GroupAction(m, std::move(generators), std::move(elements));
}

MdpPtr product_with_group(const GroupAction& group) {
  const FiniteMdp& m = *group.mdp();
  std::vector<StateId> states;
  std::vector<ActionSpec> actions;
  for (std::size_t g = 0; g < group.size(); ++g) {
    const StateId gs = StateId::atom(group.element_name(g));
    const ActionId ga = ActionId::atom(group.element_name(g));
    for (const auto& s : m.states()) states.push_back(pair(s, gs));
    for (const auto& a : m.actions()) {
      std::vector<Dist::Entry> to;
      for (const auto& [t, p] : a.to) to.emplace_back(pair(t, gs), p);
      actions.push_back(ActionSpec{pair(a.id, ga), pair(a.state, gs), Dist(std::move(to)), a.reward});
    }
  }
  return share(FiniteMdp(std::move(states), std::move(actions), m.has_reward()));
}

namespace {

// Orbit index per element, orbits numbered by their smallest member.
std::vector<std::size_t> orbits(std::size_t n, const std::vector<Permutation>& elements,
                                std::vector<std::size_t> Permutation::*field,
                                std::size_t& count) {
  std::vector<std::size_t> orbit(n, npos);
  count = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (orbit[x] != npos) continue;
    for (const auto& e : elements) orbit[(e.*field)[x]] = count;
    ++count;
  }
  return orbit;
}

}  // namespace

Quotient quotient(const GroupAction& group, double eps) {
  const MdpPtr& mp = group.mdp();
  const FiniteMdp& m = *mp;
  std::size_t ns = 0, na = 0;
  auto sorb = orbits(m.num_states(), group.elements(), &Permutation::states, ns);
  auto aorb = orbits(m.num_actions(), group.elements(), &Permutation::actions, na);

  std::vector<std::vector<StateId>> smembers(ns);
  for (std::size_t s = 0; s < m.num_states(); ++s) smembers[sorb[s]].push_back(m.state(s));
  std::vector<StateId> slabels;
  for (const auto& mem : smembers) slabels.push_back(orbit(mem));

  std::vector<std::vector<std::size_t>> amembers(na);
  for (std::size_t a = 0; a < m.num_actions(); ++a) amembers[aorb[a]].push_back(a);

  std::vector<ActionSpec> actions;
  for (std::size_t o = 0; o < na; ++o) {
    const auto& mem = amembers[o];
    std::vector<ActionId> ids;
    for (auto a : mem) ids.push_back(m.action(a).id);
    const std::size_t rep = mem.front();
    auto pushed = detail::push(m, rep, sorb);
    for (auto a : mem) {
      if (sorb[m.anchor(a)] != sorb[m.anchor(rep)] ||
          !detail::approx_equal(detail::push(m, a, sorb), pushed, eps)) {
        throw Error(ErrorKind::InconsistentOrbit,
                    "orbit of " + m.action(rep).id.str() + " pushes forward inconsistently at " +
                        m.action(a).id.str());
      }
      if (m.has_reward() && std::abs(m.reward(a) - m.reward(rep)) > eps) {
        throw Error(ErrorKind::RewardClash, "reward varies on the orbit of " + m.action(rep).id.str());
      }
    }
    std::vector<Dist::Entry> to;
    for (auto [t, p] : pushed) to.emplace_back(slabels[t], p);
    std::optional<double> r;
    if (m.has_reward()) r = m.reward(rep);
    actions.push_back(ActionSpec{orbit(ids), slabels[sorb[m.anchor(rep)]], Dist(std::move(to)), r});
  }
  std::vector<ActionId> alabels;
  for (const auto& a : actions) alabels.push_back(a.id);

  auto qm = share(FiniteMdp(slabels, std::move(actions), m.has_reward()));
  std::vector<std::size_t> f(m.num_states()), g(m.num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = qm->state_index(slabels[sorb[s]]);
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = qm->action_index(alabels[aorb[a]]);
  MdpMorphism q(mp, qm, std::move(f), std::move(g), m.has_reward());
  return Quotient{std::move(qm), std::move(q)};
}

PushoutResult quotient_via_pushout(const GroupAction& group, double eps) {
  const MdpPtr& m = group.mdp();
  auto mg = product_with_group(group);
  std::vector<std::size_t> pf(mg->num_states()), pg(mg->num_actions());
  std::vector<std::size_t> rf(mg->num_states()), rg(mg->num_actions());
  // States of M x G are sorted by Pair(s, g); recover (s, g) from labels.
  std::map<std::string, std::size_t> element_index;
  for (std::size_t g = 0; g < group.size(); ++g) element_index.emplace(group.element_name(g), g);
  for (std::size_t x = 0; x < mg->num_states(); ++x) {
    const Label& l = mg->state(x).label();
    const std::size_t s = m->state_index(StateId(l.child(0)));
    const std::size_t g = element_index.at(l.child(1).name());
    pf[x] = s;
    rf[x] = group.element(g).states[s];
  }
  for (std::size_t x = 0; x < mg->num_actions(); ++x) {
    const Label& l = mg->action(x).id.label();
    const std::size_t a = m->action_index(ActionId(l.child(0)));
    const std::size_t g = element_index.at(l.child(1).name());
    pg[x] = a;
    rg[x] = group.element(g).actions[a];
  }
  Span span{MdpMorphism(mg, m, std::move(pf), std::move(pg), m->has_reward()),
            MdpMorphism(mg, m, std::move(rf), std::move(rg), m->has_reward())};
  return pushout(span, RewardMode::IfPresent, eps);
}

MdpMorphism check_quotient_universal(const GroupAction& group, const Quotient& quot,
                                     const MdpMorphism& h) {
  if (!same_mdp(h.source_ptr(), group.mdp())) throw Error(ErrorKind::Mismatch, "h must start at M");
  const FiniteMdp& m = *group.mdp();
  for (std::size_t e = 0; e < group.size(); ++e) {
    const auto& p = group.element(e);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (h.f(p.states[s]) != h.f(s)) {
        throw Error(ErrorKind::NotInvariant,
                    "h o rho_" + group.element_name(e) + " != h at state " + m.state(s).str());
      }
    }
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      if (h.g(p.actions[a]) != h.g(a)) {
        throw Error(ErrorKind::NotInvariant,
                    "h o rho_" + group.element_name(e) + " != h at action " + m.action(a).id.str());
      }
    }
  }
  std::vector<std::size_t> f(quot.mdp->num_states(), npos), g(quot.mdp->num_actions(), npos);
  for (std::size_t s = 0; s < m.num_states(); ++s) f[quot.q.f(s)] = h.f(s);
  for (std::size_t a = 0; a < m.num_actions(); ++a) g[quot.q.g(a)] = h.g(a);
  return MdpMorphism(quot.mdp, h.target_ptr(), std::move(f), std::move(g),
                     h.reward_compatible() && quot.mdp->has_reward());
}

std::vector<std::size_t> lift_policy(const Quotient& quot, const std::vector<std::size_t>& policy) {
  const FiniteMdp& m = quot.q.source();
  std::vector<std::size_t> out(m.num_states(), npos);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const std::size_t chosen = policy.at(quot.q.f(s));
    if (chosen == npos) continue;
    for (auto a : m.actions_at(s)) {
      if (quot.q.g(a) == chosen) {
        out[s] = a;
        break;
      }
    }
  }
  return out;
}

}  // namespace cmdp
