#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmdp/io.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/zigzag.hpp"

namespace cmdp::app {

inline constexpr int kPass = 0;
inline constexpr int kFail = 1;
inline constexpr int kUsage = 2;

struct Options {
  SolverOptions solver;
  double gap_tol = 1e-6;
  std::uint64_t seed = 0;
  /// 0 keeps each operation's own default.
  std::size_t budget = 0;
  bool json = false;
};

struct Report {
  std::string name;
  Json fields = Json::object();
  bool pass = false;

  Json to_json() const;
};

Report theorem3_report(const ZigZagDiagram& z, const Options& opts);
Report demo_gridworld(const Options& opts);
Report demo_regions(const Options& opts);
Report demo_fetch(const Options& opts);
Report check_pushforward(const Cospan& c, const Options& opts);
Report check_static_obstacles(const MdpPtr& m, const std::set<StateId>& o1, const std::set<StateId>& o2,
                              const Options& opts);
Report check_quotient(const MdpPtr& m, const GroupTables& g, const Options& opts);

/// Parses comma-separated state labels.
std::set<StateId> parse_state_list(std::string_view text);

/// Shortest path lengths to `goal` over the transition graph; npos when
/// unreachable.
std::vector<std::size_t> distances_to(const FiniteMdp& m, std::size_t goal);

void print(const Report& r, bool json, std::ostream& out);

/// args excludes the program name. Exit 0 PASS, 1 FAIL, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmdp::app
