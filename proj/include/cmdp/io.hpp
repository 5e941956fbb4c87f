#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cmdp/composition.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/symmetry.hpp"
#include "cmdp/zigzag.hpp"

namespace cmdp {

using Json = nlohmann::ordered_json;

enum class DocumentKind { Mdp, Morphism, Group, Span, Cospan, ZigZag, Bridge, Solution };

std::string_view to_string(DocumentKind kind);

/// Morphism as label tables; endpoints are optional in documents and are
/// supplied by the context (the expression evaluator, a span document).
struct MorphismTables {
  StateMap states;
  ActionMap actions;
  bool reward_compatible = false;
  std::optional<FiniteMdp> source;
  std::optional<FiniteMdp> target;

  /// Throws Error(Mismatch) if the tables do not fit the endpoints.
  MdpMorphism bind(const MdpPtr& source, const MdpPtr& target) const;
  /// Uses the embedded endpoints; throws Error(SemanticError) without them.
  MdpMorphism bind() const;
};

/// Generators as label maps in cycle notation; unmentioned elements are fixed.
struct GroupTables {
  struct Generator {
    StateMap states;
    ActionMap actions;
  };
  std::vector<Generator> generators;
  std::optional<FiniteMdp> mdp;

  GroupAction bind(const MdpPtr& m, std::size_t budget = 10000) const;
};

/// N with label tables for its legs. Without tables the legs are label
/// inclusions.
struct BridgeTables {
  FiniteMdp mdp;
  std::optional<MorphismTables> left;
  std::optional<MorphismTables> right;

  Bridge bind(const MdpPtr& left_env, const MdpPtr& right_env) const;
};

/// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset);

/// Syntax checked only: wraps the JSON parser's error in SyntaxError.
Json parse_json(std::string_view text);
DocumentKind document_kind(const Json& doc);

Json to_json(const FiniteMdp& m);
Json to_json(const MdpMorphism& m, bool embed_endpoints = true);
Json to_json(const GroupAction& g, bool embed_mdp = true);
Json to_json(const Span& s);
Json to_json(const Cospan& c);
Json to_json(const ZigZagDiagram& z);
Json to_json(const Solution& sol, const FiniteMdp& m);

/// Shape errors raise Error(SemanticError) with the JSON path; construction
/// errors (duplicate ids) likewise.
FiniteMdp mdp_from_json(const Json& doc);
MorphismTables morphism_from_json(const Json& doc);
GroupTables group_from_json(const Json& doc);
BridgeTables bridge_from_json(const Json& doc);
Span span_from_json(const Json& doc, double eps = kEps);
Cospan cospan_from_json(const Json& doc, double eps = kEps);
ZigZagDiagram zigzag_from_json(const Json& doc, double eps = kEps);

/// Throws SyntaxError(line, col) or Error(SemanticError) with the validate()
/// summary.
FiniteMdp parse_mdp(std::string_view text, double eps = kEps);
/// As parse_mdp without the validate() step.
FiniteMdp parse_mdp_unchecked(std::string_view text);

/// Two-space indented JSON; doubles in shortest round-trip form.
std::string serialize(const FiniteMdp& m);
std::string serialize(const MdpMorphism& m);
std::string dump(const Json& doc);

/// "(a b c)(d e)" over labels; fixed points omitted.
std::string format_cycles(const std::vector<Label>& domain, const std::vector<std::size_t>& perm);
/// Throws SyntaxError on bad syntax, Error(SemanticError) if a label repeats.
std::vector<std::pair<Label, Label>> parse_cycles(std::string_view text);

/// Whole file as text. Throws Error(Malformed) if it cannot be read.
std::string read_file(const std::string& path);

}  // namespace cmdp
