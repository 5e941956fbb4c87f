#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <tuple>

#include "cmdp/error.hpp"
#include "cmdp/morphism.hpp"
#include "detail.hpp"

namespace cmdp {

namespace {

class IsoSearch {
 public:
  IsoSearch(const MdpPtr& m1, const MdpPtr& m2, double eps)
      : m1_(m1), m2_(m2), eps_(eps), rewards_(m1->has_reward() && m2->has_reward()) {}

  /// Given a complete state bijection, pair up actions per state.
  std::optional<std::vector<std::size_t>> match_actions(const std::vector<std::size_t>& f) const {
    std::vector<std::size_t> g(m1_->num_actions(), npos);
    for (std::size_t s = 0; s < m1_->num_states(); ++s) {
      if (!match_state(s, f, g)) return std::nullopt;
    }
    return g;
  }

  std::optional<std::vector<std::size_t>> search_states(std::size_t max_states) {
    const std::size_t n = m1_->num_states();
    if (n > max_states) {
      throw Error(ErrorKind::SizeExceeded,
                  "isomorphism search limited to " + std::to_string(max_states) + " states");
    }
    sig1_ = signatures(*m1_);
    sig2_ = signatures(*m2_);
    {
      auto a = sig1_, b = sig2_;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return std::nullopt;
    }
    order_ = bfs_order(*m1_);
    std::vector<std::size_t> pos(n);
    for (std::size_t k = 0; k < n; ++k) pos[order_[k]] = k;
    ready_.assign(n, {});
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t r = pos[s];
      for (auto a : m1_->actions_at(s)) {
        for (auto t : m1_->support(a)) r = std::max(r, pos[t]);
      }
      ready_[r].push_back(s);
    }
    f_.assign(n, npos);
    used_.assign(m2_->num_states(), 0);
    if (assign(0)) return f_;
    return std::nullopt;
  }

 private:
  using Signature = std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>;

  static std::vector<Signature> signatures(const FiniteMdp& m) {
    std::vector<Signature> sig(m.num_states());
    std::vector<std::size_t> indeg(m.num_states(), 0);
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      for (auto t : m.support(a)) ++indeg[t];
    }
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      std::vector<std::size_t> widths;
      for (auto a : m.actions_at(s)) widths.push_back(m.support(a).size());
      std::sort(widths.begin(), widths.end());
      sig[s] = {m.actions_at(s).size(), indeg[s], std::move(widths)};
    }
    return sig;
  }

  static std::vector<std::size_t> bfs_order(const FiniteMdp& m) {
    std::vector<std::size_t> order;
    std::vector<char> seen(m.num_states(), 0);
    for (std::size_t root = 0; root < m.num_states(); ++root) {
      if (seen[root]) continue;
      std::deque<std::size_t> queue{root};
      seen[root] = 1;
      while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        order.push_back(s);
        for (auto a : m.actions_at(s)) {
          for (auto t : m.support(a)) {
            if (!seen[t]) {
              seen[t] = 1;
              queue.push_back(t);
            }
          }
        }
      }
    }
    return order;
  }

  bool compatible(std::size_t a, std::size_t b, const std::vector<std::size_t>& f) const {
    if (rewards_ && std::abs(m1_->reward(a) - m2_->reward(b)) > eps_) return false;
    return detail::approx_equal(detail::push(*m1_, a, f), detail::sparse(*m2_, b), eps_);
  }

  bool match_state(std::size_t s, const std::vector<std::size_t>& f,
                   std::vector<std::size_t>& g) const {
    auto left = m1_->actions_at(s);
    auto right = m2_->actions_at(f[s]);
    if (left.size() != right.size()) return false;
    const std::size_t k = left.size();
    std::vector<std::vector<std::size_t>> adj(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (compatible(left[i], right[j], f)) adj[i].push_back(j);
      }
      if (adj[i].empty()) return false;
    }
    std::vector<std::size_t> owner(k, npos);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<char> visited(k, 0);
      if (!augment(i, adj, owner, visited)) return false;
    }
    for (std::size_t j = 0; j < k; ++j) g[left[owner[j]]] = right[j];
    return true;
  }

  static bool augment(std::size_t i, const std::vector<std::vector<std::size_t>>& adj,
                      std::vector<std::size_t>& owner, std::vector<char>& visited) {
    for (auto j : adj[i]) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (owner[j] == npos || augment(owner[j], adj, owner, visited)) {
        owner[j] = i;
        return true;
      }
    }
    return false;
  }

  bool assign(std::size_t k) {
    if (k == order_.size()) return true;
    const std::size_t s = order_[k];
    std::vector<std::size_t> scratch(m1_->num_actions(), npos);
    for (std::size_t t = 0; t < m2_->num_states(); ++t) {
      if (used_[t] || sig1_[s] != sig2_[t]) continue;
      f_[s] = t;
      used_[t] = 1;
      bool ok = true;
      for (auto r : ready_[k]) {
        if (!match_state(r, f_, scratch)) {
          ok = false;
          break;
        }
      }
      if (ok && assign(k + 1)) return true;
      used_[t] = 0;
      f_[s] = npos;
    }
    return false;
  }

  MdpPtr m1_;
  MdpPtr m2_;
  double eps_;
  bool rewards_;
  std::vector<Signature> sig1_, sig2_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> ready_;
  std::vector<std::size_t> f_;
  std::vector<char> used_;
};

/// Candidate bijection from matching label skeletons, if they are unique on
/// both sides.
std::optional<std::vector<std::size_t>> skeleton_bijection(const FiniteMdp& m1,
                                                           const FiniteMdp& m2) {
  std::map<Label, std::size_t> index;
  for (std::size_t t = 0; t < m2.num_states(); ++t) {
    if (!index.emplace(skeleton(m2.state(t).label()), t).second) return std::nullopt;
  }
  std::vector<std::size_t> f(m1.num_states());
  std::vector<char> used(m2.num_states(), 0);
  for (std::size_t s = 0; s < m1.num_states(); ++s) {
    auto it = index.find(skeleton(m1.state(s).label()));
    if (it == index.end() || used[it->second]) return std::nullopt;
    used[it->second] = 1;
    f[s] = it->second;
  }
  return f;
}

}  // namespace

std::optional<MdpMorphism> isomorphic(const MdpPtr& m1, const MdpPtr& m2, double eps,
                                      std::size_t max_states) {
  const bool rewards = m1->has_reward() && m2->has_reward();
  if (same_mdp(m1, m2)) {
    auto id = identity(m1);
    return MdpMorphism(m1, m2, {id.state_table().begin(), id.state_table().end()},
                       {id.action_table().begin(), id.action_table().end()}, rewards);
  }
  if (m1->num_states() != m2->num_states() || m1->num_actions() != m2->num_actions()) {
    return std::nullopt;
  }
  IsoSearch search(m1, m2, eps);
  if (auto f = skeleton_bijection(*m1, *m2)) {
    if (auto g = search.match_actions(*f)) return MdpMorphism(m1, m2, *f, *g, rewards);
  }
  auto f = search.search_states(max_states);
  if (!f) return std::nullopt;
  auto g = search.match_actions(*f);
  if (!g) return std::nullopt;
  return MdpMorphism(m1, m2, std::move(*f), std::move(*g), rewards);
}

std::optional<MdpMorphism> extend_to_isomorphism(const MdpPtr& m1, const MdpPtr& m2,
                                                 const std::vector<std::size_t>& f, double eps) {
  if (m1->num_states() != m2->num_states() || m1->num_actions() != m2->num_actions() ||
      f.size() != m1->num_states() || !detail::injective(f, m2->num_states())) {
    return std::nullopt;
  }
  auto g = IsoSearch(m1, m2, eps).match_actions(f);
  if (!g) return std::nullopt;
  return MdpMorphism(m1, m2, f, std::move(*g), m1->has_reward() && m2->has_reward());
}

}  // namespace cmdp
