#include "solver/compiled.hpp"

#include "cmdp/error.hpp"

namespace cmdp::solver {

CompiledMdp compile(const FiniteMdp& m) {
  CompiledMdp c;
  c.num_states = m.num_states();
  c.action_ptr.reserve(m.num_states() + 1);
  c.action_ptr.push_back(0);
  c.trans_ptr.push_back(0);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (auto a : m.actions_at(s)) {
      c.action_index.push_back(a);
      c.reward.push_back(m.reward(a));
      auto sup = m.support(a);
      auto entries = m.action(a).to.entries();
      for (std::size_t k = 0; k < sup.size(); ++k) {
        if (sup[k] == npos) throw Error(ErrorKind::DanglingState, "cannot solve an MDP with dangling targets");
        c.trans_to.push_back(static_cast<std::uint32_t>(sup[k]));
        c.trans_p.push_back(entries[k].second);
      }
      c.trans_ptr.push_back(c.trans_to.size());
    }
    c.action_ptr.push_back(c.action_index.size());
  }
  return c;
}

std::vector<std::size_t> compile_policy(const FiniteMdp& m, const CompiledMdp& c,
                                        const std::vector<std::size_t>& policy) {
  if (policy.size() != m.num_states()) {
    throw Error(ErrorKind::PreconditionFailed, "policy size differs from state count");
  }
  std::vector<std::size_t> chosen(m.num_states(), npos);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (m.is_terminal(s)) continue;
    for (std::size_t k = c.action_ptr[s]; k < c.action_ptr[s + 1]; ++k) {
      if (c.action_index[k] == policy[s]) chosen[s] = k;
    }
    if (chosen[s] == npos) {
      throw Error(ErrorKind::PreconditionFailed, "policy has no valid action at " + m.state(s).str());
    }
  }
  return chosen;
}

}  // namespace cmdp::solver
