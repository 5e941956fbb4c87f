// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "app.hpp"
#include "cmdp/composition.hpp"
#include "cmdp/error.hpp"
#include "cmdp/io.hpp"
#include "cmdp/morphism.hpp"
#include "cmdp/puncture.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/symmetry.hpp"
#include "cmdp/worlds.hpp"
#include "cmdp/zigzag.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cmdp;
using namespace cmdp::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Fail {
  std::string what;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Fail{what};
}

bool same_tables(const MdpMorphism& a, const MdpMorphism& b) {
  return std::equal(a.state_table().begin(), a.state_table().end(), b.state_table().begin(),
                    b.state_table().end()) &&
         std::equal(a.action_table().begin(), a.action_table().end(), b.action_table().begin(),
                    b.action_table().end());
}

// Candidate lists: `fixed[i]` pins element i, npos leaves it free.
std::vector<std::vector<std::size_t>> candidates(const std::vector<std::size_t>& fixed, std::size_t codomain) {
  std::vector<std::vector<std::size_t>> out(fixed.size());
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] != npos) {
      out[i] = {fixed[i]};
    } else {
      for (std::size_t t = 0; t < codomain; ++t) out[i].push_back(t);
    }
  }
  return out;
}

// Mass vector of action a pushed along f into `n` states.
std::vector<double> dense_push(const FiniteMdp& m, std::size_t a, std::span<const std::size_t> f, std::size_t n) {
  std::vector<double> row(n, 0.0);
  auto sup = m.support(a);
  const auto& entries = m.action(a).to.entries();
  for (std::size_t k = 0; k < sup.size(); ++k) row[f[sup[k]]] += entries[k].second;
  return row;
}

std::vector<double> dense(const FiniteMdp& m, std::size_t a) {
  std::vector<double> row(m.num_states(), 0.0);
  auto sup = m.support(a);
  const auto& entries = m.action(a).to.entries();
  for (std::size_t k = 0; k < sup.size(); ++k) row[sup[k]] += entries[k].second;
  return row;
}

double max_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

MdpShape small(std::size_t states, std::size_t actions, bool rewarded = false, const std::string& prefix = "s") {
  MdpShape s;
  s.max_states = states;
  s.max_actions = actions;
  s.rewarded = rewarded;
  s.prefix = prefix;
  return s;
}

// ---------------------------------------------------------------------------

Outcome morphism_laws() {
  Rng rng(0x5eed0001);
  std::size_t compositions = 0;
  for (int i = 0; i < 200; ++i) {
    auto m = share(random_mdp(rng, small(6, 12, coin(rng))));
    require(validate(*m).ok(), "generator produced an invalid MDP");
    auto l1 = random_lift(rng, m, 2, "p");
    auto l2 = random_lift(rng, l1.source_ptr(), 2, "q");
    require(is_valid(l1) && is_valid(l2), "lift is not a morphism");
    auto c = compose(l1, l2);
    require(is_valid(c), "composite of valid morphisms is invalid");
    auto sub = random_sub_mdp(rng, l2.source_ptr());
    require(is_valid(compose(c, sub)), "composite with a subprocess is invalid");
    compositions += 2;

    auto bang = to_point(m);
    require(is_valid(bang), "map to pt does not validate");
    require(same_tables(compose(bang, l1), to_point(l1.source_ptr())), "map to pt is not unique");
    auto homs = enumerate_morphisms(m, point_ptr());
    require(homs.size() == 1, "expected exactly one morphism to pt, found " + std::to_string(homs.size()));
  }
  return {true, "200 MDPs, " + std::to_string(compositions) + " compositions"};
}

Outcome maximality() {
  Rng rng(0x5eed0002);
  std::size_t checked = 0, over_budget = 0;
  for (int i = 0; i < 100; ++i) {
    auto m = share(random_mdp(rng, small(5, 9)));
    auto keep = random_subset(rng, *m, 0.6);
    auto canon = canonical_subprocess(m, keep);
    auto part = random_sub_mdp(rng, canon.mdp, 0.7);
    auto rename = random_relabel(rng, part.source_ptr(), "n");
    auto src = rename.target_ptr();
    std::vector<char> in_keep(m->num_states(), 0);
    std::vector<std::size_t> keep_idx;
    for (const auto& s : keep) {
      in_keep[m->state_index(s)] = 1;
      keep_idx.push_back(m->state_index(s));
    }
    // The relabelled part, included back into m.
    StateMap sm;
    ActionMap am;
    for (const auto& x : part.source().states()) sm.emplace(rename.map_state(x), x);
    for (const auto& x : part.source().actions()) am.emplace(rename.map_action(x.id), x.id);
    auto back = MdpMorphism::from_tables(src, part.source_ptr(), sm, am);
    std::vector<MdpMorphism> homs{compose(canon.inclusion, compose(part, back))};
    try {
      MorphismConstraints inside_keep;
      inside_keep.state_candidates.assign(src->num_states(), keep_idx);
      for (auto& h : enumerate_morphisms(src, m, inside_keep, 20000)) homs.push_back(std::move(h));
    } catch (const Error&) {
      ++over_budget;
    }
    for (const auto& h : homs) {
      if (!is_subprocess(h)) continue;
      bool inside = true;
      for (auto t : h.state_table()) inside = inside && in_keep[t];
      if (!inside) continue;
      auto u = factor_through_canonical(h);
      require(is_valid(u), "factorization is not a morphism");
      require(same_tables(compose(canon.inclusion, u), h), "factorization does not compose back");
      // Any v with inclusion . v = h must send each element to a preimage of
      // its image under h.
      MorphismConstraints pre;
      pre.state_candidates.resize(src->num_states());
      pre.action_candidates.resize(src->num_actions());
      for (std::size_t x = 0; x < src->num_states(); ++x) {
        for (std::size_t y = 0; y < canon.mdp->num_states(); ++y) {
          if (canon.inclusion.state_table()[y] == h.state_table()[x]) pre.state_candidates[x].push_back(y);
        }
      }
      for (std::size_t x = 0; x < src->num_actions(); ++x) {
        for (std::size_t y = 0; y < canon.mdp->num_actions(); ++y) {
          if (canon.inclusion.action_table()[y] == h.action_table()[x]) pre.action_candidates[x].push_back(y);
        }
      }
      std::size_t count = 0;
      for (const auto& v : enumerate_morphisms(src, canon.mdp, pre)) {
        if (same_tables(compose(canon.inclusion, v), h)) ++count;
      }
      require(count == 1, "factorization is not unique");
      ++checked;
    }
  }
  require(checked >= 100, "too few subprocesses checked: " + std::to_string(checked));
  return {true, std::to_string(checked) + " subprocesses factored uniquely, " + std::to_string(over_budget) +
                    " enumerations over budget"};
}

Cospan random_cospan(Rng& rng, std::size_t apex_states) {
  auto apex = share(random_mdp(rng, small(apex_states, 5, false, "c")));
  auto m1 = random_lift(rng, apex, 2, "u");
  MdpMorphism m2 = coin(rng) ? random_lift(rng, apex, 2, "v") : random_sub_mdp(rng, apex, 0.7);
  return Cospan{m1, m2};
}

Outcome pushforward_works() {
  Rng rng(0x5eed0003);
  double worst = 0.0;
  std::size_t actions = 0;
  for (int i = 0; i < 100; ++i) {
    auto c = random_cospan(rng, 3);
    auto r = fiber_product(c);
    require(check_pushforward_prop(r, 1e-9), "check_pushforward_prop failed");
    const FiniteMdp& p = *r.product;
    for (std::size_t a = 0; a < p.num_actions(); ++a) {
      for (const auto* proj : {&r.proj1, &r.proj2}) {
        const FiniteMdp& factor = proj->target();
        worst = std::max(worst, max_diff(dense_push(p, a, proj->state_table(), factor.num_states()),
                                         dense(factor, proj->g(a))));
      }
      ++actions;
    }
  }
  require(worst <= 1e-9, "pushforward deviates by " + format_double(worst));
  return {true, std::to_string(actions) + " product actions, max deviation " + format_double(worst)};
}

Outcome fiber_universality() {
  Rng rng(0x5eed0004);
  std::size_t ci = 0, correlated = 0, skipped = 0;
  for (int i = 0; i < 50; ++i) {
    auto c = random_cospan(rng, 3);
    auto r = fiber_product(c);
    const FiniteMdp& p = *r.product;
    std::vector<MdpPtr> pool{r.product};
    pool.push_back(random_lift(rng, r.product, 2, "w").source_ptr());
    pool.push_back(random_sub_mdp(rng, r.product, 0.6).source_ptr());
    pool.push_back(share(random_mdp(rng, small(2, 3, false, "t"))));
    for (const auto& n : pool) {
      std::vector<MdpMorphism> h1, h2;
      try {
        h1 = enumerate_morphisms(n, c.m1.source_ptr(), {}, 3000);
        h2 = enumerate_morphisms(n, c.m2.source_ptr(), {}, 3000);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BudgetExceeded) throw;
        ++skipped;
        continue;
      }
      for (const auto& a1 : h1) {
        for (const auto& a2 : h2) {
          if (!same_tables(compose(c.m1, a1), compose(c.m2, a2))) continue;
          if (!is_conditionally_independent(n, a1, a2, c)) {
            ++correlated;
            continue;
          }
          auto u = universal_map_into_fiber(n, a1, a2, r);
          require(is_valid(u), "mediating map is not a morphism");
          require(same_tables(compose(r.proj1, u), a1) && same_tables(compose(r.proj2, u), a2),
                  "mediating map does not commute");
          MorphismConstraints k;
          k.state_candidates.resize(n->num_states());
          k.action_candidates.resize(n->num_actions());
          for (std::size_t s = 0; s < n->num_states(); ++s) {
            for (std::size_t q = 0; q < p.num_states(); ++q) {
              if (r.proj1.f(q) == a1.f(s) && r.proj2.f(q) == a2.f(s)) k.state_candidates[s].push_back(q);
            }
          }
          for (std::size_t a = 0; a < n->num_actions(); ++a) {
            for (std::size_t b = 0; b < p.num_actions(); ++b) {
              if (r.proj1.g(b) == a1.g(a) && r.proj2.g(b) == a2.g(a)) k.action_candidates[a].push_back(b);
            }
          }
          auto all = enumerate_morphisms(n, r.product, k);
          require(all.size() == 1, "cone factors " + std::to_string(all.size()) + " times");
          ++ci;
        }
      }
    }
  }
  require(ci > 0, "no conditionally independent cones were enumerated");
  return {true, std::to_string(ci) + " independent cones factored uniquely, " + std::to_string(correlated) +
                    " correlated cones excluded, " + std::to_string(skipped) + " sources over budget"};
}

Span random_injective_span(Rng& rng, std::size_t max_leg, bool escape_right = false) {
  auto apex = share(random_mdp(rng, small(2, 3, false, "k")));
  const std::size_t room = max_leg - apex->num_states();
  auto m1 = random_extension(rng, apex, uniform(rng, 0, room), uniform(rng, 0, 3), false, "x");
  auto m2 = random_extension(rng, apex, uniform(rng, escape_right ? 1 : 0, room), uniform(rng, 0, 3), escape_right, "y");
  return Span{m1, m2};
}

Outcome pushout_universality() {
  Rng rng(0x5eed0005);
  std::size_t cocones = 0, skipped = 0;
  for (int i = 0; i < 50; ++i) {
    auto sp = random_injective_span(rng, 4);
    auto r = pushout(sp);
    const FiniteMdp& p = *r.glued;
    std::vector<MdpPtr> pool{r.glued, point_ptr()};
    pool.push_back(random_extension(rng, r.glued, 1, 2, false, "z").target_ptr());
    pool.push_back(random_relabel(rng, r.glued, "g").target_ptr());
    pool.push_back(share(random_mdp(rng, small(3, 5, false, "t"))));
    for (const auto& n : pool) {
      std::vector<MdpMorphism> h1s;
      try {
        h1s = enumerate_morphisms(sp.m1.target_ptr(), n, {}, 3000);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BudgetExceeded) throw;
        ++skipped;
        continue;
      }
      const FiniteMdp& m2 = sp.m2.target();
      for (const auto& h1 : h1s) {
        std::vector<std::size_t> fs(m2.num_states(), npos), fa(m2.num_actions(), npos);
        for (std::size_t x = 0; x < sp.apex()->num_states(); ++x) fs[sp.m2.f(x)] = h1.f(sp.m1.f(x));
        for (std::size_t b = 0; b < sp.apex()->num_actions(); ++b) fa[sp.m2.g(b)] = h1.g(sp.m1.g(b));
        MorphismConstraints k{candidates(fs, n->num_states()), candidates(fa, n->num_actions()), false};
        std::vector<MdpMorphism> h2s;
        try {
          h2s = enumerate_morphisms(sp.m2.target_ptr(), n, k, 3000);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::BudgetExceeded) throw;
          ++skipped;
          continue;
        }
        for (const auto& h2 : h2s) {
          // Mediating maps: pinned wherever an inclusion reaches.
          std::vector<std::size_t> us(p.num_states(), npos), ua(p.num_actions(), npos);
          for (std::size_t s = 0; s < r.incl1.source().num_states(); ++s) us[r.incl1.f(s)] = h1.f(s);
          for (std::size_t a = 0; a < r.incl1.source().num_actions(); ++a) ua[r.incl1.g(a)] = h1.g(a);
          for (std::size_t s = 0; s < m2.num_states(); ++s) us[r.incl2.f(s)] = h2.f(s);
          for (std::size_t a = 0; a < m2.num_actions(); ++a) ua[r.incl2.g(a)] = h2.g(a);
          MorphismConstraints ku{candidates(us, n->num_states()), candidates(ua, n->num_actions()), false};
          std::size_t count = 0;
          for (const auto& u : enumerate_morphisms(r.glued, n, ku)) {
            if (same_tables(compose(u, r.incl1), h1) && same_tables(compose(u, r.incl2), h2)) ++count;
          }
          require(count == 1, "cocone has " + std::to_string(count) + " mediating morphisms");
          auto u = check_pushout_universal(r, h1, h2);
          require(is_valid(u), "check_pushout_universal returned an invalid morphism");
          ++cocones;
        }
      }
    }
  }
  require(cocones > 0, "no cocones were enumerated");
  return {true, std::to_string(cocones) + " cocones with exactly one mediating map, " + std::to_string(skipped) +
                    " enumerations over budget"};
}

Outcome gluing_and_recovery() {
  Rng rng(0x5eed0006);
  for (int i = 0; i < 100; ++i) {
    auto sp = random_injective_span(rng, 5);
    auto r = pushout(sp);
    require(check_subprocess_gluing(sp, r), "glued inclusions of a subprocess span are not subprocesses");
    require(is_subprocess(r.incl1) && is_subprocess(r.incl2), "inclusions are not injective");
  }
  std::size_t brute = 0;
  for (int i = 0; i < 50; ++i) {
    auto sp = random_injective_span(rng, 5, true);
    require(check_disjoint_recovery(sp), "puncturing the glue did not recover M1");
    // Independent oracle on the same data.
    auto r = pushout(sp);
    const FiniteMdp& m2 = sp.m2.target();
    std::vector<char> image(m2.num_states(), 0);
    for (auto t : sp.m2.state_table()) image[t] = 1;
    std::set<StateId> drop;
    for (std::size_t t = 0; t < m2.num_states(); ++t) {
      if (!image[t]) drop.insert(r.glued->state(r.incl2.f(t)));
    }
    auto rest = puncture(r.glued, drop).mdp;
    if (rest->num_states() <= 7) {
      require(brute_isomorphic(sp.m1.target(), *rest), "brute-force oracle disagrees");
      ++brute;
    }
  }
  return {true, "100 subprocess gluings, 50 recoveries (" + std::to_string(brute) + " confirmed by brute force)"};
}

Outcome static_obstacles() {
  const auto f = fig1_layout();
  auto grid = share(fig1_grid());
  const auto o1 = cell_states(f.red1), o2 = cell_states(f.red2);
  require(check_static_obstacles(grid, o1, o2), "static-obstacles check failed on the obstacle grid");
  // The two isomorphisms, spelled out.
  auto m1 = puncture(grid, o1), m2 = puncture(grid, o2);
  std::set<StateId> both = o1;
  both.insert(o2.begin(), o2.end());
  auto m12 = puncture(grid, both);
  auto fp = fiber_product(Cospan{m1.inclusion, m2.inclusion});
  require(isomorphic(fp.product, m12.mdp, kEps, 16).has_value(), "M1 x_M M2 is not M12");
  StateMap sm;
  ActionMap am;
  for (const auto& x : m12.mdp->states()) sm.emplace(x, x);
  for (const auto& x : m12.mdp->actions()) am.emplace(x.id, x.id);
  auto i1 = MdpMorphism::from_tables(m12.mdp, m1.mdp, sm, am);
  auto i2 = MdpMorphism::from_tables(m12.mdp, m2.mdp, sm, am);
  auto glued = pushout(Span{i1, i2});
  require(isomorphic(glued.glued, grid, kEps, 16).has_value(), "M1 u_M12 M2 is not M");
  return {true, "M12 " + std::to_string(m12.mdp->num_states()) + " states, glue " +
                    std::to_string(glued.glued->num_states()) + " states / " +
                    std::to_string(glued.glued->num_actions()) + " actions"};
}

Outcome quotient_criterion() {
  auto mg = mirror_grid(4, 4);
  auto group = close_group(mg.mdp, {mg.reflection});
  require(group.size() == 2, "reflection group has order " + std::to_string(group.size()));
  auto quot = quotient(group);
  require(quot.mdp->num_states() == 8, "quotient has " + std::to_string(quot.mdp->num_states()) + " states");
  require(is_valid(quot.q), "q does not validate");

  Rng rng(0x5eed0008);
  std::size_t targets = 0;
  for (int i = 0; i < 20; ++i) {
    MdpMorphism into = identity(quot.mdp);
    if (i == 0) {
      into = to_point(quot.mdp);
    } else if (i > 1) {
      auto re = random_relabel(rng, quot.mdp, "t" + std::to_string(i));
      auto ext = random_extension(rng, re.target_ptr(), uniform(rng, 0, 2), uniform(rng, 0, 3), false, "e");
      into = compose(ext, re);
    }
    auto h = compose(into, quot.q);
    auto u = check_quotient_universal(group, quot, h);
    require(same_tables(compose(u, quot.q), h), "factorization does not compose back");
    // Uniqueness: every u' with u' o q = h is pinned on the image of q.
    std::vector<std::size_t> fs(quot.mdp->num_states(), npos), fa(quot.mdp->num_actions(), npos);
    for (std::size_t s = 0; s < mg.mdp->num_states(); ++s) fs[quot.q.f(s)] = h.f(s);
    for (std::size_t a = 0; a < mg.mdp->num_actions(); ++a) fa[quot.q.g(a)] = h.g(a);
    const auto& n = h.target_ptr();
    MorphismConstraints k{candidates(fs, n->num_states()), candidates(fa, n->num_actions()), false};
    std::size_t count = 0;
    for (const auto& v : enumerate_morphisms(quot.mdp, n, k)) {
      if (same_tables(compose(v, quot.q), h)) ++count;
    }
    require(count == 1, "invariant morphism factors " + std::to_string(count) + " times");
    ++targets;
  }
  bool rejected = false;
  try {
    check_quotient_universal(group, quot, identity(mg.mdp));
  } catch (const Error& e) {
    rejected = e.kind() == ErrorKind::NotInvariant;
  }
  require(rejected, "a non-invariant morphism was accepted");

  SolverOptions opts;
  auto sq = value_iteration(*quot.mdp, opts);
  auto sm = value_iteration(*mg.mdp, opts);
  auto lifted = lift_policy(quot, sq.policy);
  double worst = 0.0;
  for (std::size_t s = 0; s < mg.mdp->num_states(); ++s) {
    if (mg.mdp->is_terminal(s)) continue;
    auto best = bellman_backup(*mg.mdp, sm.values, s, opts.gamma);
    worst = std::max(worst, best.value - action_value(*mg.mdp, sm.values, lifted[s], opts.gamma));
  }
  require(worst <= 1e-6, "lifted policy backup gap " + format_double(worst));
  return {true, "|S/G| = 8, " + std::to_string(targets) + " targets, lifted backup gap " + format_double(worst)};
}

Outcome demo(const std::string& name) {
  std::ostringstream out, err;
  const int code = app::run({"demo", name, "--format", "json", "--gamma", "0.9"}, out, err);
  auto doc = parse_json(out.str());
  require(code == 0, "demo " + name + " exited with " + std::to_string(code) + ": " + err.str());
  require(doc["forward_moving"].get<bool>(), "not forward-moving");
  require(doc["monotonic"].get<bool>(), "not monotonic");
  require(doc["gap"].is_number() && doc["gap"].get<double>() <= 1e-6, "gap " + doc["gap"].dump());
  return {true, "forward-moving, monotonic, gap " + doc["gap"].dump() + ", " +
                    doc["composite_states"].dump() + " composite states"};
}

Outcome negative_control() {
  auto z = monotonicity_counterexample();
  auto c = build_composite(z);
  require(c.mdp->num_states() == 3, "counterexample composite has " + std::to_string(c.mdp->num_states()) + " states");
  require(is_forward_moving(z), "counterexample should be forward-moving");
  require(!is_monotonic(z), "monotonicity violation not detected");
  auto t = verify_theorem3(z);
  require(!t.pass, "verify_theorem3 passed a non-monotonic diagram");
  require(t.gap && *t.gap > 1e-3, "stitched-policy gap " + (t.gap ? format_double(*t.gap) : std::string("n/a")));
  return {true, "is_monotonic = false, gap " + format_double(*t.gap)};
}

Outcome solver_sanity() {
  const StateId s = StateId::atom("s");
  FiniteMdp loop({s}, {ActionSpec{ActionId::atom("a"), s, Dist::dirac(s), 1.0}}, true);
  for (double gamma : {0.5, 0.9, 0.99}) {
    SolverOptions opts;
    opts.gamma = gamma;
    auto sol = value_iteration(loop, opts);
    const double err = std::abs(sol.values[0] - 1.0 / (1.0 - gamma));
    require(err <= 1e-9, "self-loop error " + format_double(err) + " at gamma " + format_double(gamma));
  }
  Rng rng(0x5eed0011);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    GridSpec spec{4, 4, {0, 0}, 0.0};
    std::set<Cell> obstacles;
    for (auto c : spec.cells()) {
      if (coin(rng, 0.25)) obstacles.insert(c);
    }
    std::vector<Cell> free;
    for (auto c : spec.cells()) {
      if (!obstacles.count(c)) free.push_back(c);
    }
    if (free.empty()) continue;
    const Cell goal = free[uniform(rng, 0, free.size() - 1)];
    auto grid = share(grid_world(spec, obstacles, {goal}));
    auto safe = puncture(grid, cell_states(obstacles)).mdp;
    auto m = make_absorbing(*safe, {cell_state(goal)});
    SolverOptions opts;
    opts.gamma = 0.9;
    auto sol = value_iteration(m, opts);
    const auto d = bfs_distance(m, m.state_index(cell_state(goal)));
    for (std::size_t x = 0; x < m.num_states(); ++x) {
      const double expect = (d[x] == npos || d[x] == 0) ? 0.0 : std::pow(0.9, static_cast<double>(d[x] - 1));
      worst = std::max(worst, std::abs(sol.values[x] - expect));
    }
  }
  require(worst <= 1e-6, "grid value error " + format_double(worst));
  return {true, "self-loop exact, 20 grids max error " + format_double(worst)};
}

FiniteMdp with_random_labels(Rng& rng, const FiniteMdp& m) {
  std::set<Label> used;
  auto fresh = [&] {
    for (;;) {
      Label l = random_label(rng, 3);
      if (used.insert(l).second) return l;
    }
  };
  std::map<StateId, StateId> rename;
  std::vector<StateId> states;
  for (const auto& s : m.states()) {
    StateId id(fresh());
    rename.emplace(s, id);
    states.push_back(id);
  }
  std::vector<ActionSpec> actions;
  for (const auto& a : m.actions()) {
    std::vector<Dist::Entry> to;
    for (const auto& [t, p] : a.to) to.emplace_back(rename.at(t), p);
    actions.push_back(ActionSpec{ActionId(fresh()), rename.at(a.state), Dist(std::move(to)), a.reward});
  }
  return FiniteMdp(std::move(states), std::move(actions), m.has_reward());
}

Outcome io_roundtrip() {
  Rng rng(0x5eed0012);
  std::size_t counts[6] = {};
  for (int i = 0; i < 500; ++i) {
    const int kind = i % 6;
    ++counts[kind];
    switch (kind) {
      case 0:
      case 1: {
        FiniteMdp m = random_mdp(rng, small(6, 12, coin(rng)));
        if (kind == 1) m = with_random_labels(rng, m);
        require(parse_mdp(serialize(m)) == m, "MDP round trip changed the MDP");
        break;
      }
      case 2: {
        auto a = share(random_mdp(rng, small(3, 4, true, "a")));
        auto b = share(random_mdp(rng, small(3, 4, true, "b")));
        auto p = cartesian_product(a, b).product;
        auto sp = random_injective_span(rng, 4);
        auto g = pushout(sp).glued;
        require(parse_mdp(serialize(*p)) == *p, "product round trip changed the MDP");
        require(parse_mdp(serialize(*g)) == *g, "pushout round trip changed the MDP");
        break;
      }
      case 3: {
        auto cw = cycle_world(static_cast<int>(uniform(rng, 1, 3)), static_cast<int>(uniform(rng, 2, 5)));
        auto group = close_group(cw.mdp, {cw.rotation});
        auto q = quotient(group);
        require(parse_mdp(serialize(*q.mdp)) == *q.mdp, "quotient round trip changed the MDP");
        auto back = group_from_json(parse_json(dump(to_json(group))));
        require(back.mdp && *back.mdp == *cw.mdp, "group document lost its MDP");
        auto rebound = back.bind(cw.mdp);
        require(rebound.generators() == group.generators(), "group generators changed");
        break;
      }
      case 4: {
        auto m = share(random_mdp(rng, small(4, 6, coin(rng))));
        auto l = random_lift(rng, m, 2, "l");
        auto back = morphism_from_json(parse_json(serialize(l))).bind();
        require(back == l, "morphism round trip changed the morphism");
        break;
      }
      case 5: {
        std::vector<Cell> cells = GridSpec{3, 3, {0, 0}, 0.0}.cells();
        std::shuffle(cells.begin(), cells.end(), rng);
        auto z = sequential_regions(GridSpec{3, 3, {0, 0}, 0.0}, {cells[0], cells[1], cells[2]}, {});
        auto back = zigzag_from_json(parse_json(dump(to_json(z))));
        require(back.environments.size() == z.environments.size(), "zigzag lost environments");
        for (std::size_t k = 0; k < z.environments.size(); ++k) {
          require(*back.environments[k] == *z.environments[k], "zigzag environment changed");
        }
        for (std::size_t k = 0; k < z.bridges.size(); ++k) {
          require(back.bridges[k].left == z.bridges[k].left && back.bridges[k].right == z.bridges[k].right,
                  "zigzag bridge changed");
        }
        break;
      }
    }
  }
  return {true, "500 objects (" + std::to_string(counts[0] + counts[1]) + " MDPs, " + std::to_string(counts[2]) +
                    " product/pushout pairs, " + std::to_string(counts[3]) + " quotients+groups, " +
                    std::to_string(counts[4]) + " morphisms, " + std::to_string(counts[5]) + " zigzags)"};
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"morphism-laws", 5, morphism_laws},
      {"subprocess-maximality", 30, maximality},
      {"fiber-pushforward", 10, pushforward_works},
      {"fiber-universality", 60, fiber_universality},
      {"pushout-universality", 60, pushout_universality},
      {"gluing-and-recovery", 30, gluing_and_recovery},
      {"static-obstacles", 5, static_obstacles},
      {"quotient", 10, quotient_criterion},
      {"stitching-demo-regions", 20, [] { return demo("regions"); }},
      {"stitching-demo-fetch", 20, [] { return demo("fetch"); }},
      {"negative-control", 5, negative_control},
      {"solver-sanity", 10, solver_sanity},
      {"io-roundtrip", 10, io_roundtrip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const Fail& f) {
      o = {false, f.what};
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs >= c.limit_s) {
      o.pass = false;
      o.detail += "; over the time limit";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3fs / %.0fs", secs, c.limit_s);
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " [" << timing << "] " << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
