#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>

#include "cmdp/morphism.hpp"

namespace cmdp::testing {

using Rng = std::mt19937_64;

struct MdpShape {
  std::size_t min_states = 1;
  std::size_t max_states = 6;
  std::size_t min_actions = 1;
  std::size_t max_actions = 12;
  std::size_t max_support = 3;
  bool rewarded = true;
  std::string prefix = "s";
};

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi);
bool coin(Rng& rng, double p = 0.5);

/// Random weights normalized over `n` outcomes.
std::vector<double> random_simplex(Rng& rng, std::size_t n);

/// States `<prefix><k>`, actions `<prefix><k>a<j>`; rewards are multiples of 1/4.
FiniteMdp random_mdp(Rng& rng, const MdpShape& shape = {});

/// L -> m where every state of m has 1..max_copies preimages and each action
/// is lifted to a random subset of the copies of its anchor, its mass split
/// randomly among the copies of each target. Reward-compatible when m has
/// rewards.
MdpMorphism random_lift(Rng& rng, const MdpPtr& m, std::size_t max_copies = 2, const std::string& prefix = "l");

/// Label inclusion m -> E, where E adds `extra_states` states and
/// `extra_actions` actions. With `escape`, every new action puts mass on a
/// new state (so new actions anchored in m leave m).
MdpMorphism random_extension(Rng& rng, const MdpPtr& m, std::size_t extra_states, std::size_t extra_actions,
                             bool escape = false, const std::string& prefix = "e");

/// Isomorphism m -> copy with atoms renamed by a random shuffle.
MdpMorphism random_relabel(Rng& rng, const MdpPtr& m, const std::string& prefix = "r");

/// Sub-MDP of m on a subset of its actions (all states kept), as a label
/// inclusion.
MdpMorphism random_sub_mdp(Rng& rng, const MdpPtr& m, double keep = 0.6);

std::set<StateId> random_subset(Rng& rng, const FiniteMdp& m, double p = 0.5);

/// Labels of every kind, nesting up to `depth`.
Label random_label(Rng& rng, int depth = 3);

}  // namespace cmdp::testing
