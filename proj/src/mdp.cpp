#include "cmdp/mdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cmdp/error.hpp"

namespace cmdp {

Dist::Dist(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(std::move(e));
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
}

double Dist::mass(const StateId& s) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const Entry& e, const StateId& key) { return e.first < key; });
  return (it != entries_.end() && it->first == s) ? it->second : 0.0;
}

double Dist::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

bool Dist::approx_equal(const Dist& other, double eps) const {
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      if (std::abs(a->second) > eps) return false;
      ++a;
    } else if (a == entries_.end() || b->first < a->first) {
      if (std::abs(b->second) > eps) return false;
      ++b;
    } else {
      if (std::abs(a->second - b->second) > eps) return false;
      ++a;
      ++b;
    }
  }
  return true;
}

FiniteMdp::FiniteMdp(std::vector<StateId> states, std::vector<ActionSpec> actions,
                     std::optional<bool> rewarded)
    : states_(std::move(states)), actions_(std::move(actions)) {
  std::sort(states_.begin(), states_.end());
  states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
  std::sort(actions_.begin(), actions_.end(),
            [](const ActionSpec& a, const ActionSpec& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < actions_.size(); ++i) {
    if (actions_[i - 1].id == actions_[i].id) {
      throw Error(ErrorKind::Malformed, "duplicate action id " + actions_[i].id.str());
    }
  }
  rewarded_ = rewarded.value_or(std::any_of(actions_.begin(), actions_.end(),
                                            [](const ActionSpec& a) { return a.reward.has_value(); }));
  if (!rewarded_) {
    for (auto& a : actions_) a.reward.reset();
  }

  anchor_.resize(actions_.size());
  support_.resize(actions_.size());
  by_state_.resize(states_.size());
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    anchor_[a] = find_state(actions_[a].state).value_or(npos);
    if (anchor_[a] != npos) by_state_[anchor_[a]].push_back(a);
    auto& sup = support_[a];
    sup.reserve(actions_[a].to.size());
    for (const auto& [s, p] : actions_[a].to) sup.push_back(find_state(s).value_or(npos));
  }
}

std::optional<std::size_t> FiniteMdp::find_state(const StateId& s) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), s);
  if (it == states_.end() || *it != s) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::optional<std::size_t> FiniteMdp::find_action(const ActionId& a) const {
  auto it = std::lower_bound(actions_.begin(), actions_.end(), a,
                             [](const ActionSpec& x, const ActionId& key) { return x.id < key; });
  if (it == actions_.end() || it->id != a) return std::nullopt;
  return static_cast<std::size_t>(it - actions_.begin());
}

std::size_t FiniteMdp::state_index(const StateId& s) const {
  if (auto i = find_state(s)) return *i;
  throw Error(ErrorKind::DanglingState, "unknown state " + s.str());
}

std::size_t FiniteMdp::action_index(const ActionId& a) const {
  if (auto i = find_action(a)) return *i;
  throw Error(ErrorKind::Mismatch, "unknown action " + a.str());
}

FiniteMdp FiniteMdp::without_rewards() const {
  std::vector<ActionSpec> acts(actions_.begin(), actions_.end());
  for (auto& a : acts) a.reward.reset();
  return FiniteMdp(states_, std::move(acts), false);
}

FiniteMdp FiniteMdp::with_rewards(const std::vector<double>& rewards) const {
  if (rewards.size() != actions_.size()) {
    throw Error(ErrorKind::Mismatch, "reward table size differs from action count");
  }
  std::vector<ActionSpec> acts(actions_.begin(), actions_.end());
  for (std::size_t a = 0; a < acts.size(); ++a) acts[a].reward = rewards[a];
  return FiniteMdp(states_, std::move(acts), true);
}

bool FiniteMdp::operator==(const FiniteMdp& other) const {
  return rewarded_ == other.rewarded_ && states_ == other.states_ && actions_ == other.actions_;
}

bool ValidationReport::mentions(std::string_view needle) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& i : issues) out << i << '\n';
  return out.str();
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

ValidationReport validate(const FiniteMdp& m, double eps) {
  ValidationReport report;
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    const auto& act = m.action(a);
    const std::string name = act.id.str();
    if (m.anchor(a) == npos) {
      report.issues.push_back("dangling anchor " + act.state.str() + " for action " + name);
    }
    auto sup = m.support(a);
    std::size_t k = 0;
    for (const auto& [s, p] : act.to) {
      if (sup[k++] == npos) {
        report.issues.push_back("dangling transition target " + s.str() + " for action " + name);
      }
      if (!(p > 0.0) || p > 1.0 + eps) {
        report.issues.push_back("invalid probability " + format_double(p) + " at " + s.str() +
                                " for action " + name);
      }
    }
    double total = act.to.total();
    if (std::abs(total - 1.0) > eps) {
      report.issues.push_back("mass " + format_double(total) + " ≠ 1 for action " + name);
    }
    if (m.has_reward()) {
      if (!act.reward) {
        report.issues.push_back("missing reward entry for action " + name);
      } else if (!std::isfinite(*act.reward)) {
        report.issues.push_back("non-finite reward for action " + name);
      }
    }
  }
  return report;
}

FiniteMdp point_mdp() {
  auto s = StateId::atom("pt");
  return FiniteMdp({s}, {ActionSpec{ActionId::atom("pt"), s, Dist::dirac(s), 0.0}}, true);
}

const MdpPtr& point_ptr() {
  static const MdpPtr pt = share(point_mdp());
  return pt;
}

FiniteMdp empty_mdp() { return FiniteMdp({}, {}); }

}  // namespace cmdp
