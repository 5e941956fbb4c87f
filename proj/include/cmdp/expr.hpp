#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cmdp/io.hpp"

namespace cmdp {

/// Composition expression:
///
///   expr := NAME
///         | product(expr, expr)
///         | fiber(expr, expr over expr via NAME, NAME)
///         | glue(expr, expr along expr via NAME, NAME)
///         | puncture(expr minus {id, ...})
///         | quotient(expr by NAME)
///         | zigzag(expr -[NAME]- expr ...)
struct Expr {
  enum class Kind { Name, Product, Fiber, Glue, Puncture, Quotient, ZigZag };

  Kind kind = Kind::Name;
  /// Bound name for Name; group name for Quotient.
  std::string name;
  std::vector<Expr> args;
  /// Morphism names after `via`; bridge names of a zigzag.
  std::vector<std::string> refs;
  std::vector<StateId> ids;
  std::size_t line = 1;
  std::size_t column = 1;

  /// Canonical text; parse_expr(e.str()) == e up to positions.
  std::string str() const;
  bool same_shape(const Expr& other) const;
};

/// Throws SyntaxError(line, col).
Expr parse_expr(std::string_view text);

using Binding = std::variant<FiniteMdp, MorphismTables, GroupTables, BridgeTables>;

/// Names resolve to explicitly bound documents first, then to
/// `<dir>/NAME.json`. Files are read on first use.
class Bindings {
 public:
  explicit Bindings(std::string search_dir = {}) : dir_(std::move(search_dir)) {}

  void bind_file(const std::string& name, const std::string& path) { paths_[name] = path; }
  void bind(const std::string& name, Binding value) { loaded_.insert_or_assign(name, std::move(value)); }

  /// Throws Error(UnboundName), or the parse errors of the document.
  const Binding& lookup(const std::string& name);

 private:
  std::string dir_;
  std::map<std::string, std::string> paths_;
  std::map<std::string, Binding> loaded_;
};

/// Parses a document of kind mdp, morphism, group or bridge.
Binding binding_from_json(const Json& doc, double eps = kEps);

struct EvalResult {
  MdpPtr mdp;
  /// Set when the top-level node is a zigzag.
  std::optional<ZigZagDiagram> diagram;
};

/// Dispatches to the construction modules. Throws Error(UnboundName),
/// Error(SemanticError) for a name bound to the wrong kind of document, and
/// whatever the constructions raise.
EvalResult evaluate(const Expr& e, Bindings& bindings, double eps = kEps);

}  // namespace cmdp
