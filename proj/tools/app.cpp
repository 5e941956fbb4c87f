#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "cmdp/error.hpp"
#include "cmdp/expr.hpp"
#include "cmdp/puncture.hpp"
#include "cmdp/symmetry.hpp"
#include "cmdp/worlds.hpp"

namespace cmdp::app {

namespace {

Json json_number_or_null(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

bool looks_like_json(std::string_view text) {
  auto pos = text.find_first_not_of(" \t\r\n");
  return pos != std::string_view::npos && text[pos] == '{';
}

// Zigzag from a diagram document, or from an expression whose top node is a
// zigzag (names resolved next to the file).
ZigZagDiagram load_zigzag(const std::string& path, const std::vector<std::string>& binds, double eps) {
  const std::string text = read_file(path);
  if (looks_like_json(text)) return zigzag_from_json(parse_json(text), eps);
  Bindings b(std::filesystem::path(path).parent_path().string());
  for (const auto& kv : binds) {
    auto eq = kv.find('=');
    b.bind_file(kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto r = evaluate(parse_expr(text), b, eps);
  if (!r.diagram) throw Error(ErrorKind::SemanticError, "expression is not a zigzag");
  return *r.diagram;
}

std::size_t count_orbits(const FiniteMdp& m, const GroupTables& g, bool actions) {
  const std::size_t n = actions ? m.num_actions() : m.num_states();
  std::vector<std::vector<std::size_t>> gens;
  for (const auto& gen : g.generators) {
    auto p = permutation_from_maps(m, gen.states, gen.actions);
    gens.push_back(actions ? p.actions : p.states);
  }
  std::vector<char> seen(n, 0);
  std::size_t orbits = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (seen[x]) continue;
    ++orbits;
    std::deque<std::size_t> todo{x};
    seen[x] = 1;
    while (!todo.empty()) {
      auto y = todo.front();
      todo.pop_front();
      for (const auto& p : gens) {
        if (!seen[p[y]]) {
          seen[p[y]] = 1;
          todo.push_back(p[y]);
        }
      }
    }
  }
  return orbits;
}

// Copy of m with every state and action renamed by a seeded shuffle.
MdpMorphism random_relabeling(const MdpPtr& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> sp(m->num_states()), ap(m->num_actions());
  for (std::size_t i = 0; i < sp.size(); ++i) sp[i] = i;
  for (std::size_t i = 0; i < ap.size(); ++i) ap[i] = i;
  std::shuffle(sp.begin(), sp.end(), rng);
  std::shuffle(ap.begin(), ap.end(), rng);
  auto sname = [&](std::size_t s) { return StateId::atom("n" + std::to_string(sp[s])); };
  std::vector<StateId> states;
  std::vector<ActionSpec> acts;
  StateMap smap;
  ActionMap amap;
  for (std::size_t s = 0; s < m->num_states(); ++s) {
    states.push_back(sname(s));
    smap.emplace(m->state(s), sname(s));
  }
  for (std::size_t a = 0; a < m->num_actions(); ++a) {
    const auto& act = m->action(a);
    std::vector<Dist::Entry> to;
    auto sup = m->support(a);
    for (std::size_t k = 0; k < sup.size(); ++k) to.emplace_back(sname(sup[k]), act.to.entries()[k].second);
    ActionId id = ActionId::atom("b" + std::to_string(ap[a]));
    acts.push_back(ActionSpec{id, sname(m->anchor(a)), Dist(std::move(to)), act.reward});
    amap.emplace(act.id, id);
  }
  auto n = share(FiniteMdp(std::move(states), std::move(acts), m->has_reward()));
  return MdpMorphism::from_tables(m, n, smap, amap);
}

}  // namespace

Json Report::to_json() const {
  Json out = Json::object();
  out["report"] = name;
  for (auto& [k, v] : fields.items()) out[k] = v;
  out["result"] = pass ? "PASS" : "FAIL";
  return out;
}

void print(const Report& r, bool json, std::ostream& out) {
  if (json) {
    out << dump(r.to_json());
    return;
  }
  out << r.name << '\n';
  for (auto& [k, v] : r.fields.items()) out << "  " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  out << (r.pass ? "PASS" : "FAIL") << '\n';
}

std::set<StateId> parse_state_list(std::string_view text) {
  std::set<StateId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ',')) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    int depth = 0;
    for (; end < text.size(); ++end) {
      const char c = text[end];
      if (c == '\\') {
        ++end;
        continue;
      }
      if (depth == 0 && (c == ',' || std::isspace(static_cast<unsigned char>(c)))) break;
      if (c == '(') ++depth;
      if (c == ')') --depth;
    }
    end = std::min(end, text.size());
    out.insert(StateId::parse(text.substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

std::vector<std::size_t> distances_to(const FiniteMdp& m, std::size_t goal) {
  std::vector<std::vector<std::size_t>> preds(m.num_states());
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    for (auto t : m.support(a)) {
      if (t != npos && t != m.anchor(a)) preds[t].push_back(m.anchor(a));
    }
  }
  std::vector<std::size_t> d(m.num_states(), npos);
  std::deque<std::size_t> todo{goal};
  d[goal] = 0;
  while (!todo.empty()) {
    auto t = todo.front();
    todo.pop_front();
    for (auto s : preds[t]) {
      if (d[s] == npos) {
        d[s] = d[t] + 1;
        todo.push_back(s);
      }
    }
  }
  return d;
}

Report theorem3_report(const ZigZagDiagram& z, const Options& opts) {
  auto t = verify_theorem3(z, opts.solver, opts.gap_tol);
  Report r{"theorem3"};
  r.fields["environments"] = z.environments.size();
  r.fields["composite_states"] = t.composite_states;
  r.fields["composite_actions"] = t.composite_actions;
  r.fields["forward_moving"] = t.forward_moving;
  r.fields["monotonic"] = t.monotonic;
  if (!t.monotonic_witness.empty()) r.fields["monotonic_witness"] = t.monotonic_witness;
  r.fields["gamma"] = opts.solver.gamma;
  r.fields["gap"] = json_number_or_null(t.gap);
  r.fields["gap_tol"] = t.tol;
  r.pass = t.pass;
  return r;
}

Report demo_gridworld(const Options& opts) {
  const auto f = fig1_layout();
  auto grid = share(fig1_grid(f.grid.slip));
  auto safe = puncture(grid, cell_states(f.red())).mdp;
  const StateId goal = cell_state(f.goal);
  auto absorbing = share(make_absorbing(*safe, {goal}));
  auto sol = value_iteration(*absorbing, opts.solver);
  const auto d = distances_to(*absorbing, absorbing->state_index(goal));
  double err = 0.0;
  for (std::size_t s = 0; s < absorbing->num_states(); ++s) {
    const double expect = (d[s] == npos || d[s] == 0) ? 0.0 : std::pow(opts.solver.gamma, double(d[s] - 1));
    err = std::max(err, std::abs(sol.values[s] - expect));
  }
  const std::size_t start = absorbing->state_index(cell_state(f.start));
  bool static_ok = false;
  std::string static_error;
  try {
    static_ok = cmdp::check_static_obstacles(grid, cell_states(f.red1), cell_states(f.red2));
  } catch (const Error& e) {
    static_error = e.what();
  }
  Report r{"gridworld"};
  r.fields["grid_states"] = grid->num_states();
  r.fields["grid_actions"] = grid->num_actions();
  r.fields["safe_states"] = safe->num_states();
  r.fields["safe_actions"] = safe->num_actions();
  r.fields["gamma"] = opts.solver.gamma;
  r.fields["iterations"] = sol.iterations;
  r.fields["start_value"] = sol.values[start];
  r.fields["start_distance"] = d[start];
  r.fields["max_error_vs_shortest_path"] = err;
  r.fields["static_obstacles"] = static_ok;
  if (!static_error.empty()) r.fields["static_obstacles_error"] = static_error;
  r.pass = sol.converged && err <= opts.gap_tol && static_ok;
  return r;
}

Report demo_regions(const Options& opts) {
  const auto f = fig1_layout();
  auto z = sequential_regions(f.grid, fig1_regions(), f.red());
  Report r = theorem3_report(z, opts);
  r.name = "regions";
  return r;
}

Report demo_fetch(const Options& opts) {
  auto fp = fetch_and_place();
  Report r = theorem3_report(fp.diagram, opts);
  r.name = "fetch";
  r.fields["box_states"] = fp.box->num_states();
  r.fields["fetch_states"] = fp.fetch.mdp->num_states();
  r.fields["move_states"] = fp.move.glued->num_states();
  return r;
}

Report check_pushforward(const Cospan& c, const Options&) {
  auto fp = fiber_product(c);
  Report r{"pushforward"};
  r.fields["product_states"] = fp.product->num_states();
  r.fields["product_actions"] = fp.product->num_actions();
  r.pass = check_pushforward_prop(fp);
  return r;
}

Report check_static_obstacles(const MdpPtr& m, const std::set<StateId>& o1, const std::set<StateId>& o2,
                              const Options&) {
  Report r{"static-obstacles"};
  r.fields["o1"] = o1.size();
  r.fields["o2"] = o2.size();
  try {
    r.pass = cmdp::check_static_obstacles(m, o1, o2);
  } catch (const Error& e) {
    r.fields["error"] = e.what();
    r.pass = false;
  }
  return r;
}

Report check_quotient(const MdpPtr& m, const GroupTables& g, const Options& opts) {
  Report r{"quotient"};
  auto group = g.bind(m, opts.budget ? opts.budget : 10000);
  auto quot = quotient(group);
  const std::size_t state_orbits = count_orbits(*m, g, false);
  const std::size_t action_orbits = count_orbits(*m, g, true);
  const bool q_valid = is_valid(quot.q);
  r.fields["group_size"] = group.size();
  r.fields["quotient_states"] = quot.mdp->num_states();
  r.fields["quotient_actions"] = quot.mdp->num_actions();
  r.fields["state_orbits"] = state_orbits;
  r.fields["action_orbits"] = action_orbits;
  r.fields["q_valid"] = q_valid;

  bool factors = true;
  auto iso = random_relabeling(quot.mdp, opts.seed);
  auto h = compose(iso, quot.q);
  auto u = check_quotient_universal(group, quot, h);
  factors = factors && u == iso;
  auto u_pt = check_quotient_universal(group, quot, to_point(m));
  factors = factors && u_pt == to_point(quot.mdp);
  r.fields["factorization"] = factors;

  bool lift_ok = true;
  if (m->has_reward()) {
    auto sol_q = value_iteration(*quot.mdp, opts.solver);
    auto sol_m = value_iteration(*m, opts.solver);
    auto lifted = lift_policy(quot, sol_q.policy);
    double worst = 0.0;
    for (std::size_t s = 0; s < m->num_states(); ++s) {
      if (m->is_terminal(s)) continue;
      auto best = bellman_backup(*m, sol_m.values, s, opts.solver.gamma);
      worst = std::max(worst, best.value - action_value(*m, sol_m.values, lifted[s], opts.solver.gamma));
    }
    lift_ok = worst <= 1e-6;
    r.fields["lifted_policy_backup_gap"] = worst;
  }
  r.pass = q_valid && state_orbits == quot.mdp->num_states() && action_orbits == quot.mdp->num_actions() &&
           factors && lift_ok;
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Compositional MDP constructions and checks", "cmdp"};
  cli.require_subcommand(1);
  Options opts;
  std::string format = "text";
  cli.add_option("--gamma", opts.solver.gamma, "Discount factor")->capture_default_str();
  cli.add_option("--tol", opts.solver.tol, "Value iteration tolerance")->capture_default_str();
  cli.add_option("--max-iter", opts.solver.max_iter, "Value iteration sweep limit")->capture_default_str();
  cli.add_option("--gap-tol", opts.gap_tol, "Tolerance on value gaps")->capture_default_str();
  cli.add_option("--seed", opts.seed, "Seed for randomized checks")->capture_default_str();
  cli.add_option("--budget", opts.budget, "Size guard (0 keeps defaults)")->capture_default_str();
  cli.add_flag("--parallel", opts.solver.parallel, "Use the OpenMP sweep");
  cli.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  std::string file;
  auto* validate_cmd = cli.add_subcommand("validate", "Check a document");
  validate_cmd->add_option("file", file, "Document")->required();
  validate_cmd->fallthrough();

  std::string output;
  std::vector<std::string> binds;
  auto* compose_cmd = cli.add_subcommand("compose", "Evaluate a composition expression");
  compose_cmd->add_option("exprfile", file, "Expression file")->required();
  compose_cmd->add_option("-o,--output", output, "Output document")->required();
  compose_cmd->add_option("--bind", binds, "NAME=path");
  compose_cmd->fallthrough();

  auto* solve_cmd = cli.add_subcommand("solve", "Value iteration on an MDP document");
  solve_cmd->add_option("file", file, "MDP document")->required();
  solve_cmd->add_option("-o,--output", output, "Output document");
  solve_cmd->fallthrough();

  std::string what;
  std::string o1, o2;
  auto* check_cmd = cli.add_subcommand("check", "Run a PASS/FAIL check");
  check_cmd->add_option("what", what, "theorem3|pushforward|static-obstacles|quotient")
      ->required()
      ->check(CLI::IsMember({"theorem3", "pushforward", "static-obstacles", "quotient"}));
  check_cmd->add_option("file", file, "Input document")->required();
  check_cmd->add_option("--o1", o1, "First obstacle group (static-obstacles)");
  check_cmd->add_option("--o2", o2, "Second obstacle group (static-obstacles)");
  check_cmd->add_option("--bind", binds, "NAME=path (theorem3 on an expression)");
  check_cmd->fallthrough();

  std::string demo;
  auto* demo_cmd = cli.add_subcommand("demo", "Build a worked example and verify it");
  demo_cmd->add_option("name", demo, "gridworld|regions|fetch")
      ->required()
      ->check(CLI::IsMember({"gridworld", "regions", "fetch"}));
  demo_cmd->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << cli.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }
  opts.json = format == "json";

  auto emit = [&](const Report& r) {
    print(r, opts.json, out);
    return r.pass ? kPass : kFail;
  };

  try {
    if (*validate_cmd) {
      const std::string text = read_file(file);
      const Json doc = parse_json(text);
      Report r{"validate"};
      r.fields["file"] = file;
      const auto kind = document_kind(doc);
      r.fields["kind"] = std::string(to_string(kind));
      std::vector<std::string> issues;
      try {
        switch (kind) {
          case DocumentKind::Mdp: {
            auto m = mdp_from_json(doc);
            r.fields["states"] = m.num_states();
            r.fields["actions"] = m.num_actions();
            issues = validate(m).issues;
            break;
          }
          case DocumentKind::Morphism: {
            auto rep = check_morphism(morphism_from_json(doc).bind());
            issues = rep.issues;
            break;
          }
          case DocumentKind::Span: issues = check_span(span_from_json(doc)).issues; break;
          case DocumentKind::Cospan: issues = check_cospan(cospan_from_json(doc)).issues; break;
          case DocumentKind::ZigZag: issues = check_diagram(zigzag_from_json(doc)).issues; break;
          case DocumentKind::Group: {
            auto g = group_from_json(doc);
            if (!g.mdp) throw Error(ErrorKind::SemanticError, "group document has no mdp");
            g.bind(share(*g.mdp), opts.budget ? opts.budget : 10000);
            break;
          }
          case DocumentKind::Bridge: bridge_from_json(doc); break;
          case DocumentKind::Solution: break;
        }
      } catch (const Error& e) {
        issues.push_back(e.what());
      }
      r.fields["issues"] = issues;
      r.pass = issues.empty();
      return emit(r);
    }
    if (*compose_cmd) {
      Bindings b(std::filesystem::path(file).parent_path().string());
      for (const auto& kv : binds) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
          err << "--bind expects NAME=path\n";
          return kUsage;
        }
        b.bind_file(kv.substr(0, eq), kv.substr(eq + 1));
      }
      auto result = evaluate(parse_expr(read_file(file)), b);
      std::ofstream f(output);
      if (!f) throw Error(ErrorKind::Malformed, "cannot write " + output);
      f << serialize(*result.mdp);
      Report r{"compose"};
      r.fields["output"] = output;
      r.fields["states"] = result.mdp->num_states();
      r.fields["actions"] = result.mdp->num_actions();
      r.pass = true;
      return emit(r);
    }
    if (*solve_cmd) {
      auto m = parse_mdp(read_file(file));
      auto sol = value_iteration(m, opts.solver);
      const std::string doc = dump(to_json(sol, m));
      if (output.empty()) {
        out << doc;
      } else {
        std::ofstream f(output);
        if (!f) throw Error(ErrorKind::Malformed, "cannot write " + output);
        f << doc;
      }
      return sol.converged ? kPass : kFail;
    }
    if (*check_cmd) {
      if (what == "theorem3") return emit(theorem3_report(load_zigzag(file, binds, kEps), opts));
      if (what == "pushforward") return emit(check_pushforward(cospan_from_json(parse_json(read_file(file))), opts));
      if (what == "static-obstacles") {
        auto m = share(parse_mdp(read_file(file)));
        return emit(check_static_obstacles(m, parse_state_list(o1), parse_state_list(o2), opts));
      }
      auto g = group_from_json(parse_json(read_file(file)));
      if (!g.mdp) throw Error(ErrorKind::SemanticError, "group document has no mdp");
      return emit(check_quotient(share(*g.mdp), g, opts));
    }
    if (*demo_cmd) {
      if (demo == "gridworld") return emit(demo_gridworld(opts));
      if (demo == "regions") return emit(demo_regions(opts));
      return emit(demo_fetch(opts));
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::Malformed ? kUsage : kFail;
  }
  return kUsage;
}

}  // namespace cmdp::app
