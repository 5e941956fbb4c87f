#include "cmdp/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cmdp/error.hpp"
#include "detail.hpp"

namespace cmdp {

namespace {

[[noreturn]] void semantic(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::SemanticError, (path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& field(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object()) semantic(path, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) semantic(path, std::string("missing field \"") + key + "\"");
  return *it;
}

const Json* optional_field(const Json& doc, const char* key) {
  if (!doc.is_object()) return nullptr;
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

template <class T>
T label_from(const Json& j, const std::string& path) {
  if (!j.is_string()) semantic(path, "expected a label string");
  try {
    return T::parse(j.get<std::string>());
  } catch (const SyntaxError& e) {
    semantic(path, "bad label \"" + j.get<std::string>() + "\" (column " + std::to_string(e.column()) + ")");
  }
}

template <class T>
T label_from_text(std::string_view text, const std::string& path) {
  try {
    return T::parse(text);
  } catch (const SyntaxError& e) {
    semantic(path, "bad label \"" + std::string(text) + "\" (column " + std::to_string(e.column()) + ")");
  }
}

double number_from(const Json& j, const std::string& path) {
  if (!j.is_number()) semantic(path, "expected a number");
  return j.get<double>();
}

Json tables_json(const MdpMorphism& m) {
  Json states = Json::object(), actions = Json::object();
  for (std::size_t s = 0; s < m.source().num_states(); ++s) {
    states[m.source().state(s).str()] = m.target().state(m.f(s)).str();
  }
  for (std::size_t a = 0; a < m.source().num_actions(); ++a) {
    actions[m.source().action(a).id.str()] = m.target().action(m.g(a)).id.str();
  }
  Json out = Json::object();
  out["reward_compatible"] = m.reward_compatible();
  out["states"] = std::move(states);
  out["actions"] = std::move(actions);
  return out;
}

MorphismTables tables_from(const Json& doc, const std::string& path) {
  MorphismTables t;
  if (const Json* rc = optional_field(doc, "reward_compatible")) {
    if (!rc->is_boolean()) semantic(path + "/reward_compatible", "expected a boolean");
    t.reward_compatible = rc->get<bool>();
  }
  const Json& states = field(doc, "states", path);
  if (!states.is_object()) semantic(path + "/states", "expected an object");
  for (const auto& [k, v] : states.items()) {
    const std::string p = path + "/states/" + k;
    t.states.emplace(label_from_text<StateId>(k, p), label_from<StateId>(v, p));
  }
  const Json& actions = field(doc, "actions", path);
  if (!actions.is_object()) semantic(path + "/actions", "expected an object");
  for (const auto& [k, v] : actions.items()) {
    const std::string p = path + "/actions/" + k;
    t.actions.emplace(label_from_text<ActionId>(k, p), label_from<ActionId>(v, p));
  }
  return t;
}

FiniteMdp mdp_at(const Json& doc, const std::string& path) {
  const Json& states = field(doc, "states", path);
  const Json& actions = field(doc, "actions", path);
  if (!states.is_array()) semantic(path + "/states", "expected an array");
  if (!actions.is_array()) semantic(path + "/actions", "expected an array");
  std::vector<StateId> ss;
  for (std::size_t i = 0; i < states.size(); ++i) {
    ss.push_back(label_from<StateId>(states[i], path + "/states/" + std::to_string(i)));
  }
  std::vector<ActionSpec> as;
  bool any_reward = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::string p = path + "/actions/" + std::to_string(i);
    const Json& a = actions[i];
    const Json& to = field(a, "to", p);
    if (!to.is_object()) semantic(p + "/to", "expected an object of probabilities");
    std::vector<Dist::Entry> entries;
    for (const auto& [k, v] : to.items()) {
      entries.emplace_back(label_from_text<StateId>(k, p + "/to/" + k), number_from(v, p + "/to/" + k));
    }
    std::optional<double> reward;
    if (const Json* r = optional_field(a, "reward")) {
      reward = number_from(*r, p + "/reward");
      any_reward = true;
    }
    as.push_back(ActionSpec{label_from<ActionId>(field(a, "id", p), p + "/id"),
                            label_from<StateId>(field(a, "state", p), p + "/state"), Dist(std::move(entries)),
                            reward});
  }
  bool rewarded = any_reward;
  if (const Json* r = optional_field(doc, "rewarded")) {
    if (!r->is_boolean()) semantic(path + "/rewarded", "expected a boolean");
    rewarded = r->get<bool>();
  }
  try {
    return FiniteMdp(std::move(ss), std::move(as), rewarded);
  } catch (const Error& e) {
    semantic(path, e.what());
  }
}

FiniteMdp checked_mdp_at(const Json& doc, const std::string& path, double eps) {
  FiniteMdp m = mdp_at(doc, path);
  auto report = validate(m, eps);
  if (!report.ok()) semantic(path, report.summary());
  return m;
}

MdpMorphism bind_at(const MorphismTables& t, const MdpPtr& source, const MdpPtr& target, const std::string& path) {
  try {
    return t.bind(source, target);
  } catch (const Error& e) {
    semantic(path, e.what());
  }
}

std::vector<Label> state_labels(const FiniteMdp& m) {
  std::vector<Label> out;
  for (const auto& s : m.states()) out.push_back(s.label());
  return out;
}

std::vector<Label> action_labels(const FiniteMdp& m) {
  std::vector<Label> out;
  for (const auto& a : m.actions()) out.push_back(a.id.label());
  return out;
}

}  // namespace

std::string_view to_string(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::Mdp: return "mdp";
    case DocumentKind::Morphism: return "morphism";
    case DocumentKind::Group: return "group";
    case DocumentKind::Span: return "span";
    case DocumentKind::Cospan: return "cospan";
    case DocumentKind::ZigZag: return "zigzag";
    case DocumentKind::Bridge: return "bridge";
    case DocumentKind::Solution: return "solution";
  }
  return "?";
}

MdpMorphism MorphismTables::bind(const MdpPtr& src, const MdpPtr& tgt) const {
  return MdpMorphism::from_tables(src, tgt, states, actions, reward_compatible);
}

MdpMorphism MorphismTables::bind() const {
  if (!source || !target) throw Error(ErrorKind::SemanticError, "morphism document has no endpoints");
  return bind(share(*source), share(*target));
}

GroupAction GroupTables::bind(const MdpPtr& m, std::size_t budget) const {
  std::vector<Permutation> gens;
  for (const auto& g : generators) gens.push_back(permutation_from_maps(*m, g.states, g.actions));
  return close_group(m, std::move(gens), budget);
}

Bridge BridgeTables::bind(const MdpPtr& left_env, const MdpPtr& right_env) const {
  auto n = share(mdp);
  auto inclusion = [&](const MdpPtr& env, const std::optional<MorphismTables>& t) {
    if (t) return t->bind(n, env);
    StateMap sm;
    ActionMap am;
    for (const auto& s : n->states()) sm.emplace(s, s);
    for (const auto& a : n->actions()) am.emplace(a.id, a.id);
    return MdpMorphism::from_tables(n, env, sm, am);
  };
  return Bridge{inclusion(left_env, left), inclusion(right_env, right)};
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // e.byte is 1-based and points at the last character read.
    const std::size_t at = e.byte == 0 ? 0 : e.byte - 1;
    auto [line, col] = line_column(text, at);
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw SyntaxError(line, col, what);
  }
}

DocumentKind document_kind(const Json& doc) {
  if (!doc.is_object()) semantic("", "expected an object");
  if (const Json* k = optional_field(doc, "kind")) {
    if (!k->is_string()) semantic("/kind", "expected a string");
    const auto name = k->get<std::string>();
    for (auto kind : {DocumentKind::Mdp, DocumentKind::Morphism, DocumentKind::Group, DocumentKind::Span,
                      DocumentKind::Cospan, DocumentKind::ZigZag, DocumentKind::Bridge, DocumentKind::Solution}) {
      if (name == to_string(kind)) return kind;
    }
    semantic("/kind", "unknown document kind \"" + name + "\"");
  }
  if (doc.contains("states") && doc.contains("actions") && doc["actions"].is_array()) return DocumentKind::Mdp;
  semantic("", "cannot tell the document kind");
}

Json to_json(const FiniteMdp& m) {
  Json out = Json::object();
  out["kind"] = "mdp";
  out["rewarded"] = m.has_reward();
  Json states = Json::array();
  for (const auto& s : m.states()) states.push_back(s.str());
  out["states"] = std::move(states);
  Json actions = Json::array();
  for (const auto& a : m.actions()) {
    Json j = Json::object();
    j["id"] = a.id.str();
    j["state"] = a.state.str();
    if (a.reward) j["reward"] = *a.reward;
    Json to = Json::object();
    for (const auto& [s, p] : a.to) to[s.str()] = p;
    j["to"] = std::move(to);
    actions.push_back(std::move(j));
  }
  out["actions"] = std::move(actions);
  return out;
}

Json to_json(const MdpMorphism& m, bool embed_endpoints) {
  Json out = Json::object();
  out["kind"] = "morphism";
  if (embed_endpoints) {
    out["source"] = to_json(m.source());
    out["target"] = to_json(m.target());
  }
  const Json tables = tables_json(m);
  for (const auto& [k, v] : tables.items()) out[k] = v;
  return out;
}

Json to_json(const GroupAction& g, bool embed_mdp) {
  Json out = Json::object();
  out["kind"] = "group";
  if (embed_mdp) out["mdp"] = to_json(*g.mdp());
  Json gens = Json::array();
  const auto sl = state_labels(*g.mdp());
  const auto al = action_labels(*g.mdp());
  for (const auto& p : g.generators()) {
    Json j = Json::object();
    j["states"] = format_cycles(sl, p.states);
    j["actions"] = format_cycles(al, p.actions);
    gens.push_back(std::move(j));
  }
  out["generators"] = std::move(gens);
  return out;
}

Json to_json(const Span& s) {
  Json out = Json::object();
  out["kind"] = "span";
  out["apex"] = to_json(*s.apex());
  out["left"] = to_json(s.m1.target());
  out["right"] = to_json(s.m2.target());
  out["m1"] = tables_json(s.m1);
  out["m2"] = tables_json(s.m2);
  return out;
}

Json to_json(const Cospan& c) {
  Json out = Json::object();
  out["kind"] = "cospan";
  out["left"] = to_json(c.m1.source());
  out["right"] = to_json(c.m2.source());
  out["apex"] = to_json(*c.apex());
  out["m1"] = tables_json(c.m1);
  out["m2"] = tables_json(c.m2);
  return out;
}

Json to_json(const ZigZagDiagram& z) {
  Json out = Json::object();
  out["kind"] = "zigzag";
  Json envs = Json::array();
  for (const auto& m : z.environments) envs.push_back(to_json(*m));
  out["environments"] = std::move(envs);
  Json bridges = Json::array();
  for (const auto& b : z.bridges) {
    Json j = Json::object();
    j["mdp"] = to_json(*b.mdp());
    j["left"] = tables_json(b.left);
    j["right"] = tables_json(b.right);
    bridges.push_back(std::move(j));
  }
  out["bridges"] = std::move(bridges);
  return out;
}

Json to_json(const Solution& sol, const FiniteMdp& m) {
  Json out = Json::object();
  out["kind"] = "solution";
  out["gamma"] = sol.gamma;
  out["iterations"] = sol.iterations;
  out["residual"] = sol.residual;
  out["converged"] = sol.converged;
  Json values = Json::object();
  for (std::size_t s = 0; s < sol.values.size(); ++s) values[m.state(s).str()] = sol.values[s];
  out["values"] = std::move(values);
  Json policy = Json::object();
  for (std::size_t s = 0; s < sol.policy.size(); ++s) {
    if (sol.policy[s] != npos) policy[m.state(s).str()] = m.action(sol.policy[s]).id.str();
  }
  out["policy"] = std::move(policy);
  return out;
}

FiniteMdp mdp_from_json(const Json& doc) { return mdp_at(doc, ""); }

MorphismTables morphism_from_json(const Json& doc) {
  MorphismTables t = tables_from(doc, "");
  if (const Json* s = optional_field(doc, "source")) t.source = mdp_at(*s, "/source");
  if (const Json* s = optional_field(doc, "target")) t.target = mdp_at(*s, "/target");
  return t;
}

GroupTables group_from_json(const Json& doc) {
  GroupTables g;
  if (const Json* m = optional_field(doc, "mdp")) g.mdp = mdp_at(*m, "/mdp");
  const Json& gens = field(doc, "generators", "");
  if (!gens.is_array()) semantic("/generators", "expected an array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string p = "/generators/" + std::to_string(i);
    GroupTables::Generator gen;
    auto cycles = [&](const char* key) {
      const Json* c = optional_field(gens[i], key);
      if (!c) return std::vector<std::pair<Label, Label>>{};
      if (!c->is_string()) semantic(p + "/" + key, "expected cycle notation");
      return parse_cycles(c->get<std::string>());
    };
    for (auto& [a, b] : cycles("states")) gen.states.emplace(StateId(a), StateId(b));
    for (auto& [a, b] : cycles("actions")) gen.actions.emplace(ActionId(a), ActionId(b));
    g.generators.push_back(std::move(gen));
  }
  return g;
}

BridgeTables bridge_from_json(const Json& doc) {
  BridgeTables b{mdp_at(field(doc, "mdp", ""), "/mdp"), std::nullopt, std::nullopt};
  if (const Json* l = optional_field(doc, "left")) b.left = tables_from(*l, "/left");
  if (const Json* r = optional_field(doc, "right")) b.right = tables_from(*r, "/right");
  return b;
}

Span span_from_json(const Json& doc, double eps) {
  auto apex = share(checked_mdp_at(field(doc, "apex", ""), "/apex", eps));
  auto left = share(checked_mdp_at(field(doc, "left", ""), "/left", eps));
  auto right = share(checked_mdp_at(field(doc, "right", ""), "/right", eps));
  auto m1 = bind_at(tables_from(field(doc, "m1", ""), "/m1"), apex, left, "/m1");
  auto m2 = bind_at(tables_from(field(doc, "m2", ""), "/m2"), apex, right, "/m2");
  return Span{m1, m2};
}

Cospan cospan_from_json(const Json& doc, double eps) {
  auto apex = share(checked_mdp_at(field(doc, "apex", ""), "/apex", eps));
  auto left = share(checked_mdp_at(field(doc, "left", ""), "/left", eps));
  auto right = share(checked_mdp_at(field(doc, "right", ""), "/right", eps));
  auto m1 = bind_at(tables_from(field(doc, "m1", ""), "/m1"), left, apex, "/m1");
  auto m2 = bind_at(tables_from(field(doc, "m2", ""), "/m2"), right, apex, "/m2");
  return Cospan{m1, m2};
}

ZigZagDiagram zigzag_from_json(const Json& doc, double eps) {
  ZigZagDiagram z;
  const Json& envs = field(doc, "environments", "");
  const Json& bridges = field(doc, "bridges", "");
  if (!envs.is_array() || envs.empty()) semantic("/environments", "expected a nonempty array");
  if (!bridges.is_array() || bridges.size() + 1 != envs.size()) {
    semantic("/bridges", "expected one bridge fewer than environments");
  }
  for (std::size_t i = 0; i < envs.size(); ++i) {
    z.environments.push_back(share(checked_mdp_at(envs[i], "/environments/" + std::to_string(i), eps)));
  }
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    const std::string p = "/bridges/" + std::to_string(i);
    const Json& b = bridges[i];
    BridgeTables t{checked_mdp_at(field(b, "mdp", p), p + "/mdp", eps), std::nullopt, std::nullopt};
    if (const Json* l = optional_field(b, "left")) t.left = tables_from(*l, p + "/left");
    if (const Json* r = optional_field(b, "right")) t.right = tables_from(*r, p + "/right");
    try {
      z.bridges.push_back(t.bind(z.environments[i], z.environments[i + 1]));
    } catch (const Error& e) {
      semantic(p, e.what());
    }
  }
  return z;
}

FiniteMdp parse_mdp(std::string_view text, double eps) {
  return checked_mdp_at(parse_json(text), "", eps);
}

FiniteMdp parse_mdp_unchecked(std::string_view text) { return mdp_at(parse_json(text), ""); }

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string serialize(const FiniteMdp& m) { return dump(to_json(m)); }

std::string serialize(const MdpMorphism& m) { return dump(to_json(m)); }

std::string format_cycles(const std::vector<Label>& domain, const std::vector<std::size_t>& perm) {
  std::string out;
  std::vector<char> seen(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i] || perm[i] == i) continue;
    out += '(';
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      seen[j] = 1;
      if (j != i) out += ' ';
      out += domain.at(j).str();
    }
    out += ')';
  }
  return out.empty() ? "()" : out;
}

std::vector<std::pair<Label, Label>> parse_cycles(std::string_view text) {
  std::vector<std::pair<Label, Label>> out;
  std::set<Label> used;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& what) -> void {
    auto [line, col] = line_column(text, pos);
    throw SyntaxError(line, col, what);
  };
  for (skip(); pos < text.size(); skip()) {
    if (text[pos] != '(') fail("expected '(' opening a cycle");
    ++pos;
    std::vector<Label> cycle;
    for (skip(); pos < text.size() && text[pos] != ')'; skip()) {
      const std::size_t start = pos, end = detail::label_extent(text, pos);
      if (end == start) fail("expected a label");
      try {
        cycle.push_back(Label::parse(text.substr(start, end - start)));
      } catch (const SyntaxError& e) {
        auto [line, col] = line_column(text, start);
        throw SyntaxError(line, col + e.column() - 1, "bad label in cycle");
      }
      pos = end;
    }
    if (pos >= text.size()) fail("unterminated cycle");
    ++pos;
    for (const auto& l : cycle) {
      if (!used.insert(l).second) {
        throw Error(ErrorKind::SemanticError, "label " + l.str() + " occurs twice in cycle notation");
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) out.emplace_back(cycle[k], cycle[(k + 1) % cycle.size()]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Malformed, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace cmdp
