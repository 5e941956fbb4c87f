#include "cmdp/composition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cmdp/error.hpp"
#include "detail.hpp"

namespace cmdp {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Equivalence classes of X1 + X2 generated by t1(z) ~ t2(z). Index i < n1
// stands for X1[i], otherwise X2[i - n1].
struct Gluing {
  std::vector<std::size_t> cls;        // element -> class
  std::vector<std::size_t> smallest;   // class -> smallest apex element mapping in, or npos
  std::vector<std::size_t> first1;     // class -> smallest X1 member, or npos
  std::vector<std::size_t> first2;     // class -> smallest X2 member, or npos
  std::size_t count = 0;
};

Gluing glue_sets(std::size_t n1, std::size_t n2, std::span<const std::size_t> t1,
                 std::span<const std::size_t> t2) {
  UnionFind uf(n1 + n2);
  for (std::size_t z = 0; z < t1.size(); ++z) uf.unite(t1[z], n1 + t2[z]);
  Gluing g;
  g.cls.assign(n1 + n2, npos);
  std::map<std::size_t, std::size_t> root_to_class;
  for (std::size_t i = 0; i < n1 + n2; ++i) {
    auto [it, fresh] = root_to_class.emplace(uf.find(i), g.count);
    if (fresh) ++g.count;
    g.cls[i] = it->second;
  }
  g.smallest.assign(g.count, npos);
  g.first1.assign(g.count, npos);
  g.first2.assign(g.count, npos);
  for (std::size_t z = 0; z < t1.size(); ++z) {
    auto c = g.cls[t1[z]];
    if (g.smallest[c] == npos) g.smallest[c] = z;
  }
  for (std::size_t i = 0; i < n1 + n2; ++i) {
    auto c = g.cls[i];
    if (i < n1) {
      if (g.first1[c] == npos) g.first1[c] = i;
    } else if (g.first2[c] == npos) {
      g.first2[c] = i - n1;
    }
  }
  return g;
}

template <class Id, class Get>
Id class_label(const Gluing& g, std::size_t c, Get get) {
  if (g.smallest[c] != npos) return glued(get(0, g.smallest[c]));
  if (g.first1[c] != npos) return left(get(1, g.first1[c]));
  return right(get(2, g.first2[c]));
}

}  // namespace

ValidationReport check_cospan(const Cospan& c, double eps) {
  ValidationReport report;
  if (!same_mdp(c.m1.target_ptr(), c.m2.target_ptr())) report.issues.push_back("cospan legs have different targets");
  for (const auto& i : check_morphism(c.m1, eps).issues) report.issues.push_back("leg 1: " + i);
  for (const auto& i : check_morphism(c.m2, eps).issues) report.issues.push_back("leg 2: " + i);
  return report;
}

ValidationReport check_span(const Span& s, double eps) {
  ValidationReport report;
  if (!same_mdp(s.m1.source_ptr(), s.m2.source_ptr())) report.issues.push_back("span legs have different sources");
  for (const auto& i : check_morphism(s.m1, eps).issues) report.issues.push_back("leg 1: " + i);
  for (const auto& i : check_morphism(s.m2, eps).issues) report.issues.push_back("leg 2: " + i);
  return report;
}

FiberProductResult fiber_product(const Cospan& c) {
  if (!same_mdp(c.m1.target_ptr(), c.m2.target_ptr())) {
    throw Error(ErrorKind::Mismatch, "cospan legs have different targets");
  }
  const FiniteMdp& m1 = c.m1.source();
  const FiniteMdp& m2 = c.m2.source();
  const FiniteMdp& m3 = c.m1.target();
  const bool rewarded = m3.has_reward();

  std::vector<std::vector<std::size_t>> over_state(m3.num_states());
  for (std::size_t s2 = 0; s2 < m2.num_states(); ++s2) over_state[c.m2.f(s2)].push_back(s2);
  std::vector<std::vector<std::size_t>> over_action(m3.num_actions());
  for (std::size_t a2 = 0; a2 < m2.num_actions(); ++a2) over_action[c.m2.g(a2)].push_back(a2);

  std::vector<StateId> states;
  for (std::size_t s1 = 0; s1 < m1.num_states(); ++s1) {
    for (auto s2 : over_state[c.m1.f(s1)]) states.push_back(pair(m1.state(s1), m2.state(s2)));
  }

  std::vector<ActionSpec> actions;
  for (std::size_t a1 = 0; a1 < m1.num_actions(); ++a1) {
    const std::size_t a3 = c.m1.g(a1);
    const auto& mu1 = m1.action(a1).to;
    const auto& mu3 = m3.action(a3).to;
    auto sup1 = m1.support(a1);
    for (auto a2 : over_action[a3]) {
      const auto& mu2 = m2.action(a2).to;
      auto sup2 = m2.support(a2);
      std::vector<Dist::Entry> nu;
      for (std::size_t i = 0; i < mu1.size(); ++i) {
        const std::size_t t3 = c.m1.f(sup1[i]);
        const double p3 = mu3.mass(m3.state(t3));
        if (p3 == 0.0) continue;
        for (std::size_t j = 0; j < mu2.size(); ++j) {
          if (c.m2.f(sup2[j]) != t3) continue;
          nu.emplace_back(pair(mu1.entries()[i].first, mu2.entries()[j].first),
                          mu1.entries()[i].second * mu2.entries()[j].second / p3);
        }
      }
      ActionSpec spec{pair(m1.action(a1).id, m2.action(a2).id),
                      pair(m1.action(a1).state, m2.action(a2).state), Dist(std::move(nu)),
                      std::nullopt};
      if (rewarded) spec.reward = m3.reward(a3);
      actions.push_back(std::move(spec));
    }
  }

  auto product = share(FiniteMdp(std::move(states), std::move(actions), rewarded));
  std::vector<std::size_t> f1(product->num_states()), f2(product->num_states());
  for (std::size_t s = 0; s < product->num_states(); ++s) {
    const Label& l = product->state(s).label();
    f1[s] = m1.state_index(StateId(l.child(0)));
    f2[s] = m2.state_index(StateId(l.child(1)));
  }
  std::vector<std::size_t> g1(product->num_actions()), g2(product->num_actions());
  for (std::size_t a = 0; a < product->num_actions(); ++a) {
    const Label& l = product->action(a).id.label();
    g1[a] = m1.action_index(ActionId(l.child(0)));
    g2[a] = m2.action_index(ActionId(l.child(1)));
  }
  const bool rc1 = rewarded && m1.has_reward() && c.m1.reward_compatible();
  const bool rc2 = rewarded && m2.has_reward() && c.m2.reward_compatible();
  MdpMorphism pr1(product, c.m1.source_ptr(), std::move(f1), std::move(g1), rc1);
  MdpMorphism pr2(product, c.m2.source_ptr(), std::move(f2), std::move(g2), rc2);
  return FiberProductResult{product, std::move(pr1), std::move(pr2), c};
}

FiberProductResult cartesian_product(const MdpPtr& m1, const MdpPtr& m2) {
  return fiber_product(Cospan{to_point(m1), to_point(m2)});
}

bool check_pushforward_prop(const FiberProductResult& r, double eps) {
  const FiniteMdp& p = *r.product;
  for (std::size_t a = 0; a < p.num_actions(); ++a) {
    if (!detail::approx_equal(detail::push(p, a, r.proj1.state_table()),
                              detail::sparse(r.proj1.target(), r.proj1.g(a)), eps)) {
      return false;
    }
    if (!detail::approx_equal(detail::push(p, a, r.proj2.state_table()),
                              detail::sparse(r.proj2.target(), r.proj2.g(a)), eps)) {
      return false;
    }
  }
  return true;
}

bool is_conditionally_independent(const MdpPtr& n, const MdpMorphism& a1, const MdpMorphism& a2,
                                  const Cospan& c, double eps) {
  if (!same_mdp(a1.source_ptr(), n) || !same_mdp(a2.source_ptr(), n) ||
      !same_mdp(a1.target_ptr(), c.m1.source_ptr()) ||
      !same_mdp(a2.target_ptr(), c.m2.source_ptr())) {
    throw Error(ErrorKind::Mismatch, "cone legs do not match the cospan");
  }
  for (std::size_t s = 0; s < n->num_states(); ++s) {
    if (c.m1.f(a1.f(s)) != c.m2.f(a2.f(s))) {
      throw Error(ErrorKind::NonCommuting, "outer square fails at state " + n->state(s).str());
    }
  }
  for (std::size_t a = 0; a < n->num_actions(); ++a) {
    if (c.m1.g(a1.g(a)) != c.m2.g(a2.g(a))) {
      throw Error(ErrorKind::NonCommuting, "outer square fails at action " + n->action(a).id.str());
    }
  }
  const FiniteMdp& m1 = c.m1.source();
  const FiniteMdp& m2 = c.m2.source();
  const FiniteMdp& m3 = c.m1.target();
  const std::size_t n2 = m2.num_states();
  for (std::size_t a = 0; a < n->num_actions(); ++a) {
    // Joint mass on (s1, s2), keyed as s1 * n2 + s2.
    detail::SparseDist joint;
    for (auto [t, p] : detail::sparse(*n, a)) joint.emplace_back(a1.f(t) * n2 + a2.f(t), p);
    joint = detail::normalize(std::move(joint));

    const std::size_t b1 = a1.g(a), b2 = a2.g(a);
    auto mu1 = detail::sparse(m1, b1);
    auto mu2 = detail::sparse(m2, b2);
    auto mu3 = detail::sparse(m3, c.m1.g(b1));
    auto mass3 = [&](std::size_t t3) {
      for (auto [t, p] : mu3) {
        if (t == t3) return p;
      }
      return 0.0;
    };
    detail::SparseDist nu;
    for (auto [s1, p1] : mu1) {
      const double p3 = mass3(c.m1.f(s1));
      if (p3 == 0.0) continue;
      for (auto [s2, p2] : mu2) {
        if (c.m2.f(s2) == c.m1.f(s1)) nu.emplace_back(s1 * n2 + s2, p1 * p2 / p3);
      }
    }
    if (!detail::approx_equal(joint, detail::normalize(std::move(nu)), eps)) return false;
  }
  return true;
}

MdpMorphism universal_map_into_fiber(const MdpPtr& n, const MdpMorphism& a1,
                                     const MdpMorphism& a2, const FiberProductResult& r,
                                     double eps) {
  if (!is_conditionally_independent(n, a1, a2, r.cospan, eps)) {
    throw Error(ErrorKind::NotIndependent, "cone is not conditionally independent");
  }
  const FiniteMdp& p = *r.product;
  std::vector<std::size_t> f(n->num_states()), g(n->num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) {
    f[s] = p.state_index(pair(a1.target().state(a1.f(s)), a2.target().state(a2.f(s))));
  }
  for (std::size_t a = 0; a < g.size(); ++a) {
    g[a] = p.action_index(
        pair(a1.target().action(a1.g(a)).id, a2.target().action(a2.g(a)).id));
  }
  const bool rc = a1.reward_compatible() && a2.reward_compatible() && p.has_reward();
  return MdpMorphism(n, r.product, std::move(f), std::move(g), rc);
}

PushoutResult pushout(const Span& s, RewardMode mode, double eps) {
  if (!same_mdp(s.m1.source_ptr(), s.m2.source_ptr())) {
    throw Error(ErrorKind::Mismatch, "span legs have different sources");
  }
  const FiniteMdp& m1 = s.m1.target();
  const FiniteMdp& m2 = s.m2.target();
  const FiniteMdp& m3 = s.m1.source();
  const std::size_t n1 = m1.num_states();
  const std::size_t k1 = m1.num_actions();

  bool rewarded = false;
  if (mode == RewardMode::Require && !(m1.has_reward() && m2.has_reward())) {
    throw Error(ErrorKind::RewardClash, "gluing in the rewarded category needs rewards on both legs");
  }
  if (mode != RewardMode::Ignore) rewarded = m1.has_reward() && m2.has_reward();

  Gluing sg = glue_sets(n1, m2.num_states(), s.m1.state_table(), s.m2.state_table());
  Gluing ag = glue_sets(k1, m2.num_actions(), s.m1.action_table(), s.m2.action_table());

  std::vector<StateId> class_state;
  class_state.reserve(sg.count);
  for (std::size_t c = 0; c < sg.count; ++c) {
    class_state.push_back(class_label<StateId>(sg, c, [&](int side, std::size_t i) -> const StateId& {
      return side == 0 ? m3.state(i) : side == 1 ? m1.state(i) : m2.state(i);
    }));
  }
  auto push_into = [&](const FiniteMdp& m, std::size_t a, std::size_t offset) {
    std::vector<Dist::Entry> out;
    auto sup = m.support(a);
    auto entries = m.action(a).to.entries();
    for (std::size_t k = 0; k < sup.size(); ++k) {
      if (sup[k] == npos) throw Error(ErrorKind::DanglingState, "dangling target in glued leg");
      out.emplace_back(class_state[sg.cls[offset + sup[k]]], entries[k].second);
    }
    return Dist(std::move(out));
  };

  std::vector<ActionSpec> actions;
  actions.reserve(ag.count);
  std::vector<std::optional<double>> class_reward(ag.count);
  if (rewarded) {
    for (std::size_t i = 0; i < ag.cls.size(); ++i) {
      double r = i < k1 ? m1.reward(i) : m2.reward(i - k1);
      auto& slot = class_reward[ag.cls[i]];
      if (slot && std::abs(*slot - r) > eps) {
        throw Error(ErrorKind::RewardClash, "identified actions disagree on reward");
      }
      if (!slot) slot = r;
    }
  }
  std::vector<ActionId> class_action;
  class_action.reserve(ag.count);
  for (std::size_t c = 0; c < ag.count; ++c) {
    class_action.push_back(class_label<ActionId>(ag, c, [&](int side, std::size_t i) -> const ActionId& {
      return side == 0 ? m3.action(i).id : side == 1 ? m1.action(i).id : m2.action(i).id;
    }));
    std::size_t anchor_state;
    Dist to;
    if (ag.first1[c] != npos) {
      const std::size_t a = ag.first1[c];
      if (m1.anchor(a) == npos) throw Error(ErrorKind::DanglingState, "dangling anchor in glued leg");
      anchor_state = sg.cls[m1.anchor(a)];
      to = push_into(m1, a, 0);
    } else {
      const std::size_t a = ag.first2[c];
      if (m2.anchor(a) == npos) throw Error(ErrorKind::DanglingState, "dangling anchor in glued leg");
      anchor_state = sg.cls[n1 + m2.anchor(a)];
      to = push_into(m2, a, n1);
    }
    actions.push_back(ActionSpec{class_action.back(), class_state[anchor_state], std::move(to),
                                 class_reward[c]});
  }

  auto glued_mdp = share(FiniteMdp(class_state, std::move(actions), rewarded));
  std::vector<std::size_t> class_index(sg.count);
  for (std::size_t c = 0; c < sg.count; ++c) class_index[c] = glued_mdp->state_index(class_state[c]);
  std::vector<std::size_t> action_index(ag.count);
  for (std::size_t c = 0; c < ag.count; ++c) action_index[c] = glued_mdp->action_index(class_action[c]);

  std::vector<std::size_t> f1(n1), f2(m2.num_states()), g1(k1), g2(m2.num_actions());
  for (std::size_t i = 0; i < n1; ++i) f1[i] = class_index[sg.cls[i]];
  for (std::size_t i = 0; i < f2.size(); ++i) f2[i] = class_index[sg.cls[n1 + i]];
  for (std::size_t i = 0; i < k1; ++i) g1[i] = action_index[ag.cls[i]];
  for (std::size_t i = 0; i < g2.size(); ++i) g2[i] = action_index[ag.cls[k1 + i]];
  MdpMorphism i1(s.m1.target_ptr(), glued_mdp, std::move(f1), std::move(g1), rewarded);
  MdpMorphism i2(s.m2.target_ptr(), glued_mdp, std::move(f2), std::move(g2), rewarded);
  return PushoutResult{glued_mdp, std::move(i1), std::move(i2), s};
}

MdpMorphism check_pushout_universal(const PushoutResult& r, const MdpMorphism& h1,
                                    const MdpMorphism& h2) {
  if (!same_mdp(h1.source_ptr(), r.incl1.source_ptr()) ||
      !same_mdp(h2.source_ptr(), r.incl2.source_ptr()) ||
      !same_mdp(h1.target_ptr(), h2.target_ptr())) {
    throw Error(ErrorKind::Mismatch, "cocone legs do not match the span");
  }
  const FiniteMdp& m3 = r.span.m1.source();
  for (std::size_t z = 0; z < m3.num_states(); ++z) {
    if (h1.f(r.span.m1.f(z)) != h2.f(r.span.m2.f(z))) {
      throw Error(ErrorKind::NonCommuting, "cocone disagrees at state " + m3.state(z).str());
    }
  }
  for (std::size_t z = 0; z < m3.num_actions(); ++z) {
    if (h1.g(r.span.m1.g(z)) != h2.g(r.span.m2.g(z))) {
      throw Error(ErrorKind::NonCommuting, "cocone disagrees at action " + m3.action(z).id.str());
    }
  }
  const FiniteMdp& g = *r.glued;
  std::vector<std::size_t> f(g.num_states(), npos), a(g.num_actions(), npos);
  auto set = [](std::vector<std::size_t>& table, std::size_t at, std::size_t value) {
    if (table[at] != npos && table[at] != value) {
      throw Error(ErrorKind::NonCommuting, "cocone is inconsistent on a glued class");
    }
    table[at] = value;
  };
  for (std::size_t s = 0; s < h1.source().num_states(); ++s) set(f, r.incl1.f(s), h1.f(s));
  for (std::size_t s = 0; s < h2.source().num_states(); ++s) set(f, r.incl2.f(s), h2.f(s));
  for (std::size_t x = 0; x < h1.source().num_actions(); ++x) set(a, r.incl1.g(x), h1.g(x));
  for (std::size_t x = 0; x < h2.source().num_actions(); ++x) set(a, r.incl2.g(x), h2.g(x));
  const bool rc = h1.reward_compatible() && h2.reward_compatible() && g.has_reward();
  return MdpMorphism(r.glued, h1.target_ptr(), std::move(f), std::move(a), rc);
}

bool check_subprocess_gluing(const Span& s, const PushoutResult& r) {
  (void)s;
  return is_subprocess(r.incl1) && is_subprocess(r.incl2);
}

}  // namespace cmdp
