#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmdp/label.hpp"

namespace cmdp {

/// Default tolerance for every measure-equality check.
inline constexpr double kEps = 1e-9;
inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Finitely supported probability distribution over states.
///
/// Entries are kept sorted by state; duplicates are merged and exact zeros
/// dropped at construction. Normalization is not enforced here, it is a
/// validation concern.
class Dist {
 public:
  using Entry = std::pair<StateId, double>;

  Dist() = default;
  Dist(std::initializer_list<Entry> entries) : Dist(std::vector<Entry>(entries)) {}
  explicit Dist(std::vector<Entry> entries);

  static Dist dirac(StateId s) { return Dist({{std::move(s), 1.0}}); }

  double mass(const StateId& s) const;
  double total() const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool approx_equal(const Dist& other, double eps = kEps) const;
  bool operator==(const Dist& other) const = default;

 private:
  std::vector<Entry> entries_;
};

/// One element of the state-action space: its anchor state, transition
/// distribution and optional reward.
struct ActionSpec {
  ActionId id;
  StateId state;
  Dist to;
  std::optional<double> reward;

  bool operator==(const ActionSpec&) const = default;
};

/// Finite MDP (S, A, psi, T) with optional reward R : A -> R.
///
/// Values are immutable after construction. States and actions are stored in
/// label order, so indices are deterministic. The constructor accepts
/// malformed data (dangling anchors, unnormalized distributions) so that
/// validate() can report it; index lookups for dangling labels yield npos.
class FiniteMdp {
 public:
  FiniteMdp() = default;
  /// Duplicate states are merged; duplicate action ids throw Error(Malformed).
  /// `rewarded` defaults to whether any action carries a reward.
  FiniteMdp(std::vector<StateId> states, std::vector<ActionSpec> actions,
            std::optional<bool> rewarded = std::nullopt);

  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_actions() const noexcept { return actions_.size(); }
  std::span<const StateId> states() const noexcept { return states_; }
  std::span<const ActionSpec> actions() const noexcept { return actions_; }
  const StateId& state(std::size_t s) const { return states_.at(s); }
  const ActionSpec& action(std::size_t a) const { return actions_.at(a); }

  std::optional<std::size_t> find_state(const StateId& s) const;
  std::optional<std::size_t> find_action(const ActionId& a) const;
  /// Throw Error(DanglingState) / Error(Mismatch) for unknown labels.
  std::size_t state_index(const StateId& s) const;
  std::size_t action_index(const ActionId& a) const;

  /// psi as indices; npos when the anchor is not a state.
  std::size_t anchor(std::size_t a) const { return anchor_.at(a); }
  /// State indices parallel to action(a).to.entries(); npos when dangling.
  std::span<const std::size_t> support(std::size_t a) const { return support_.at(a); }
  /// A_s in action-label order.
  std::span<const std::size_t> actions_at(std::size_t s) const { return by_state_.at(s); }
  bool is_terminal(std::size_t s) const { return by_state_.at(s).empty(); }

  bool has_reward() const noexcept { return rewarded_; }
  /// Reward of action a, 0 when absent.
  double reward(std::size_t a) const { return actions_.at(a).reward.value_or(0.0); }

  /// Copy with rewards stripped or replaced.
  FiniteMdp without_rewards() const;
  FiniteMdp with_rewards(const std::vector<double>& rewards) const;

  /// Label-identical structural equality (probabilities compared exactly).
  bool operator==(const FiniteMdp& other) const;

 private:
  std::vector<StateId> states_;
  std::vector<ActionSpec> actions_;
  bool rewarded_ = false;
  std::vector<std::size_t> anchor_;
  std::vector<std::vector<std::size_t>> support_;
  std::vector<std::vector<std::size_t>> by_state_;
};

using MdpPtr = std::shared_ptr<const FiniteMdp>;

inline MdpPtr share(FiniteMdp m) { return std::make_shared<const FiniteMdp>(std::move(m)); }

/// Diagnostics are data: an empty report means the object is well-formed.
struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool mentions(std::string_view needle) const;
  std::string summary() const;
};

ValidationReport validate(const FiniteMdp& m, double eps = kEps);

/// The terminal object: one state, one self-looping action with reward 0.
FiniteMdp point_mdp();
/// Shared instance of point_mdp(), so that maps into pt agree on their target.
const MdpPtr& point_ptr();
FiniteMdp empty_mdp();

std::string format_double(double x);

}  // namespace cmdp
