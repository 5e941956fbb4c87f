#include "cmdp/morphism.hpp"

#include <cmath>

#include "cmdp/error.hpp"
#include "detail.hpp"

namespace cmdp {

MdpMorphism::MdpMorphism(MdpPtr source, MdpPtr target, std::vector<std::size_t> state_map,
                         std::vector<std::size_t> action_map, bool reward_compatible)
    : source_(std::move(source)),
      target_(std::move(target)),
      f_(std::move(state_map)),
      g_(std::move(action_map)),
      reward_compatible_(reward_compatible) {
  if (!source_ || !target_) throw Error(ErrorKind::Mismatch, "morphism endpoints must be set");
  if (f_.size() != source_->num_states() || g_.size() != source_->num_actions()) {
    throw Error(ErrorKind::Mismatch, "morphism tables do not cover the source");
  }
  for (auto t : f_) {
    if (t >= target_->num_states()) throw Error(ErrorKind::Mismatch, "state image outside target");
  }
  for (auto t : g_) {
    if (t >= target_->num_actions()) {
      throw Error(ErrorKind::Mismatch, "action image outside target");
    }
  }
}

MdpMorphism MdpMorphism::from_tables(MdpPtr source, MdpPtr target, const StateMap& f,
                                     const ActionMap& g, bool reward_compatible) {
  std::vector<std::size_t> fs(source->num_states());
  std::vector<std::size_t> gs(source->num_actions());
  for (std::size_t s = 0; s < fs.size(); ++s) {
    auto it = f.find(source->state(s));
    if (it == f.end()) throw Error(ErrorKind::Mismatch, "state map misses " + source->state(s).str());
    auto t = target->find_state(it->second);
    if (!t) throw Error(ErrorKind::Mismatch, "state image " + it->second.str() + " not in target");
    fs[s] = *t;
  }
  for (std::size_t a = 0; a < gs.size(); ++a) {
    auto it = g.find(source->action(a).id);
    if (it == g.end()) {
      throw Error(ErrorKind::Mismatch, "action map misses " + source->action(a).id.str());
    }
    auto t = target->find_action(it->second);
    if (!t) throw Error(ErrorKind::Mismatch, "action image " + it->second.str() + " not in target");
    gs[a] = *t;
  }
  return MdpMorphism(std::move(source), std::move(target), std::move(fs), std::move(gs),
                     reward_compatible);
}

const StateId& MdpMorphism::map_state(const StateId& s) const {
  return target_->state(f_[source_->state_index(s)]);
}

const ActionId& MdpMorphism::map_action(const ActionId& a) const {
  return target_->action(g_[source_->action_index(a)]).id;
}

StateMap MdpMorphism::state_map() const {
  StateMap out;
  for (std::size_t s = 0; s < f_.size(); ++s) out.emplace(source_->state(s), target_->state(f_[s]));
  return out;
}

ActionMap MdpMorphism::action_map() const {
  ActionMap out;
  for (std::size_t a = 0; a < g_.size(); ++a) {
    out.emplace(source_->action(a).id, target_->action(g_[a]).id);
  }
  return out;
}

MdpMorphism MdpMorphism::with_reward_compatible(bool flag) const {
  MdpMorphism m = *this;
  m.reward_compatible_ = flag;
  return m;
}

MdpMorphism MdpMorphism::retarget(MdpPtr target) const {
  return MdpMorphism(source_, std::move(target), f_, g_, reward_compatible_);
}

bool MdpMorphism::operator==(const MdpMorphism& other) const {
  return f_ == other.f_ && g_ == other.g_ && same_mdp(source_, other.source_) &&
         same_mdp(target_, other.target_);
}

bool same_mdp(const FiniteMdp& a, const FiniteMdp& b) { return &a == &b || a == b; }

Dist pushforward(const StateMap& f, const Dist& mu) {
  std::vector<Dist::Entry> out;
  out.reserve(mu.size());
  for (const auto& [s, p] : mu) {
    auto it = f.find(s);
    if (it == f.end()) throw Error(ErrorKind::DanglingState, "state " + s.str() + " outside map domain");
    out.emplace_back(it->second, p);
  }
  return Dist(std::move(out));
}

Dist pushforward(const FiniteMdp& source, const FiniteMdp& target, std::span<const std::size_t> f,
                 std::size_t action) {
  for (auto s : source.support(action)) {
    if (s == npos) throw Error(ErrorKind::DanglingState, "dangling support in source action");
  }
  return detail::to_dist(target, detail::push(source, action, f));
}

ValidationReport check_morphism(const MdpMorphism& m, double eps) {
  ValidationReport report;
  const auto& src = m.source();
  const auto& tgt = m.target();
  bool rewards = m.reward_compatible();
  if (rewards && !(src.has_reward() && tgt.has_reward())) {
    report.issues.push_back("reward compatibility requested but an endpoint carries no rewards");
    rewards = false;
  }
  for (std::size_t a = 0; a < src.num_actions(); ++a) {
    const std::string name = src.action(a).id.str();
    std::size_t b = m.g(a);
    std::size_t anchor = src.anchor(a);
    if (anchor == npos || tgt.anchor(b) != m.f(anchor)) {
      report.issues.push_back("anchor square fails for action " + name);
    }
    bool dangling = false;
    for (auto s : src.support(a)) dangling = dangling || s == npos;
    if (dangling || !detail::approx_equal(detail::push(src, a, m.state_table()),
                                          detail::sparse(tgt, b), eps)) {
      report.issues.push_back("transition square fails for action " + name);
    }
    if (rewards && std::abs(src.reward(a) - tgt.reward(b)) > eps) {
      report.issues.push_back("reward mismatch for action " + name);
    }
  }
  return report;
}

MdpMorphism identity(const MdpPtr& m) {
  std::vector<std::size_t> f(m->num_states()), g(m->num_actions());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = i;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = i;
  return MdpMorphism(m, m, std::move(f), std::move(g), m->has_reward());
}

MdpMorphism to_point(const MdpPtr& m) {
  return MdpMorphism(m, point_ptr(), std::vector<std::size_t>(m->num_states(), 0),
                     std::vector<std::size_t>(m->num_actions(), 0));
}

MdpMorphism compose(const MdpMorphism& second, const MdpMorphism& first) {
  if (!same_mdp(first.target_ptr(), second.source_ptr())) {
    throw Error(ErrorKind::Mismatch, "composition endpoints disagree");
  }
  std::vector<std::size_t> f(first.source().num_states()), g(first.source().num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = second.f(first.f(s));
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = second.g(first.g(a));
  return MdpMorphism(first.source_ptr(), second.target_ptr(), std::move(f), std::move(g),
                     first.reward_compatible() && second.reward_compatible());
}

bool is_subprocess(const MdpMorphism& m) {
  return detail::injective(m.state_table(), m.target().num_states()) &&
         detail::injective(m.action_table(), m.target().num_actions());
}

bool is_full_subprocess(const MdpMorphism& m) {
  if (!is_subprocess(m)) return false;
  for (std::size_t s = 0; s < m.source().num_states(); ++s) {
    if (m.source().actions_at(s).size() != m.target().actions_at(m.f(s)).size()) return false;
  }
  return true;
}

Subprocess canonical_subprocess(const MdpPtr& m, const std::set<StateId>& keep) {
  std::vector<char> inside(m->num_states(), 0);
  for (const auto& s : keep) inside[m->state_index(s)] = 1;
  std::vector<StateId> states(keep.begin(), keep.end());
  std::vector<ActionSpec> actions;
  for (std::size_t a = 0; a < m->num_actions(); ++a) {
    std::size_t anchor = m->anchor(a);
    if (anchor == npos || !inside[anchor]) continue;
    bool contained = true;
    for (auto s : m->support(a)) contained = contained && s != npos && inside[s];
    if (contained) actions.push_back(m->action(a));
  }
  auto sub = share(FiniteMdp(std::move(states), std::move(actions), m->has_reward()));
  std::vector<std::size_t> f(sub->num_states()), g(sub->num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = m->state_index(sub->state(s));
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = m->action_index(sub->action(a).id);
  MdpMorphism incl(sub, m, std::move(f), std::move(g), m->has_reward());
  return Subprocess{std::move(sub), std::move(incl)};
}

MdpMorphism factor_through_canonical(const MdpMorphism& sub, double eps) {
  if (!is_subprocess(sub)) throw Error(ErrorKind::NotASubprocess, "maps are not injective");
  if (!is_valid(sub, eps)) throw Error(ErrorKind::NotASubprocess, "not a morphism");
  std::set<StateId> image;
  for (auto t : sub.state_table()) image.insert(sub.target().state(t));
  auto canon = canonical_subprocess(sub.target_ptr(), image);
  std::vector<std::size_t> f(sub.source().num_states()), g(sub.source().num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = canon.mdp->state_index(sub.target().state(sub.f(s)));
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto b = canon.mdp->find_action(sub.target().action(sub.g(a)).id);
    if (!b) throw Error(ErrorKind::NotASubprocess, "action image leaves the image states");
    g[a] = *b;
  }
  return MdpMorphism(sub.source_ptr(), canon.mdp, std::move(f), std::move(g),
                     sub.reward_compatible());
}

namespace {

class MorphismEnumerator {
 public:
  MorphismEnumerator(const MdpPtr& src, const MdpPtr& tgt, const MorphismConstraints& c,
                     std::size_t limit, double eps)
      : src_(src), tgt_(tgt), c_(c), limit_(limit), eps_(eps) {
    const std::size_t n = src->num_states();
    by_level_.resize(n + 1);
    for (std::size_t a = 0; a < src->num_actions(); ++a) {
      std::size_t level = src->anchor(a);
      if (level == npos) throw Error(ErrorKind::Malformed, "source has dangling anchors");
      for (auto s : src->support(a)) {
        if (s == npos) throw Error(ErrorKind::Malformed, "source has dangling transitions");
        level = std::max(level, s);
      }
      by_level_[level].push_back(a);
    }
    f_.assign(n, npos);
    choices_.assign(src->num_actions(), {});
    rewards_ = c.reward_compatible && src->has_reward() && tgt->has_reward();
  }

  std::vector<MdpMorphism> run() {
    if (src_->num_states() == 0 || tgt_->num_states() > 0) assign(0);
    return std::move(out_);
  }

 private:
  bool allowed_action(std::size_t a, std::size_t b) const {
    if (c_.action_candidates.empty()) return true;
    const auto& cand = c_.action_candidates[a];
    return std::find(cand.begin(), cand.end(), b) != cand.end();
  }

  bool fill_choices(std::size_t a) {
    auto mapped = detail::push(*src_, a, f_);
    auto& list = choices_[a];
    list.clear();
    for (auto b : tgt_->actions_at(f_[src_->anchor(a)])) {
      if (!allowed_action(a, b)) continue;
      if (rewards_ && std::abs(src_->reward(a) - tgt_->reward(b)) > eps_) continue;
      if (detail::approx_equal(mapped, detail::sparse(*tgt_, b), eps_)) list.push_back(b);
    }
    return !list.empty();
  }

  void assign(std::size_t k) {
    const std::size_t n = src_->num_states();
    if (k == n) {
      emit(0, std::vector<std::size_t>(src_->num_actions()));
      return;
    }
    std::vector<std::size_t> all;
    const std::vector<std::size_t>* cand = nullptr;
    if (c_.state_candidates.empty()) {
      all.resize(tgt_->num_states());
      for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
      cand = &all;
    } else {
      cand = &c_.state_candidates[k];
    }
    for (auto t : *cand) {
      f_[k] = t;
      bool ok = true;
      for (auto a : by_level_[k]) {
        if (!fill_choices(a)) {
          ok = false;
          break;
        }
      }
      if (ok) assign(k + 1);
    }
    f_[k] = npos;
  }

  void emit(std::size_t a, std::vector<std::size_t> g) {
    if (a == src_->num_actions()) {
      if (out_.size() >= limit_) {
        throw Error(ErrorKind::BudgetExceeded, "more than " + std::to_string(limit_) + " morphisms");
      }
      out_.emplace_back(src_, tgt_, f_, std::move(g), c_.reward_compatible);
      return;
    }
    for (auto b : choices_[a]) {
      g[a] = b;
      emit(a + 1, g);
    }
  }

  MdpPtr src_;
  MdpPtr tgt_;
  const MorphismConstraints& c_;
  std::size_t limit_;
  double eps_;
  bool rewards_ = false;
  std::vector<std::vector<std::size_t>> by_level_;
  std::vector<std::size_t> f_;
  std::vector<std::vector<std::size_t>> choices_;
  std::vector<MdpMorphism> out_;
};

}  // namespace

std::vector<MdpMorphism> enumerate_morphisms(const MdpPtr& source, const MdpPtr& target,
                                             const MorphismConstraints& constraints,
                                             std::size_t limit, double eps) {
  return MorphismEnumerator(source, target, constraints, limit, eps).run();
}

}  // namespace cmdp
