#ifndef TDM_TERM_HPP
#define TDM_TERM_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reader failure. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class SymbolClass { Builtin, UserFunction, Variable, Stub, ConstantSymbol };

/// Arity of a member of the closed builtin set, or nullopt for anything else.
/// `list` and `quote` are builtins without a fixed arity and report nullopt
/// too; use is_builtin() for membership.
std::optional<std::size_t> builtin_arity(std::string_view name);
bool is_builtin(std::string_view name);

/// Stubs are spelled `stub-<k>` with k >= 1 the arity.
std::optional<std::size_t> stub_arity(std::string_view name);
std::string stub_name(std::size_t arity);

/// Names a user may not define: builtins, reader abbreviations, stubs.
bool is_reserved_name(std::string_view name);

/// Class of a symbol as it occurs in a term. Head position decides between
/// functions and variables.
SymbolClass classify_symbol(std::string_view name, bool head_position);

/// Closed values: naturals, constant symbols, and finite pairs of values.
/// Used both as quoted constants and as the evaluation universe.
class Value {
 public:
  enum class Kind { Natural, Symbol, Pair };

  static Value natural(std::uint64_t n);
  static Value symbol(std::string name);
  static Value nil();
  static Value t();
  static Value cons(Value car, Value cdr);

  Kind kind() const;
  bool is_nil() const;
  bool is_pair() const { return kind() == Kind::Pair; }
  std::uint64_t as_natural() const;
  const std::string& symbol_name() const;
  const Value& car() const;
  const Value& cdr() const;

  friend std::strong_ordering operator<=>(const Value& a, const Value& b);
  friend bool operator==(const Value& a, const Value& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  struct Pair;
  Value() = default;
  std::variant<std::uint64_t, std::string, std::shared_ptr<const Pair>> rep_;
};

/// Dotted-pair rendering used in counterexample reports and quoted constants.
std::string print_value(const Value& v);

/// Immutable first-order term. Copies share structure.
class Term {
 public:
  enum class Kind { Const, Var, App };

  static Term constant(Value v);
  static Term var(std::string name);
  static Term app(std::string head, std::vector<Term> args);

  Kind kind() const;
  bool is_const() const { return kind() == Kind::Const; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_app() const { return kind() == Kind::App; }
  /// True for an application headed by `head`.
  bool is_app(std::string_view head) const;

  const Value& value() const;
  /// Variable name or application head.
  const std::string& name() const;
  std::span<const Term> args() const;
  const Term& arg(std::size_t i) const { return args()[i]; }

  /// Node count.
  std::size_t size() const;

  friend std::strong_ordering operator<=>(const Term& a, const Term& b);
  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering compare_terms(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Total order: Const < Var < App; constants by value, variables by name,
/// applications by (head, arity, args).
std::strong_ordering compare_terms(const Term& a, const Term& b);

/// Reads one term. Symbols are lowercased; c[ad]+r, list, 1+, 1-, and, or
/// are expanded.
Term parse_term(std::string_view text);

/// Canonical single-line form; parse_term(print_term(t)) == t.
std::string print_term(const Term& t);

struct FunctionRef {
  std::string name;
  std::size_t arity = 0;

  friend bool operator==(const FunctionRef&, const FunctionRef&) = default;
};

struct Substitution {
  std::map<std::string, Term> vars;
  std::map<std::string, FunctionRef> stubs;

  bool empty() const { return vars.empty() && stubs.empty(); }
  friend bool operator==(const Substitution&, const Substitution&) = default;
};

/// Simultaneous replacement of variables and stub heads. Throws Error when a
/// stub's image has a different arity.
Term apply_subst(const Term& t, const Substitution& s);

struct MatchOptions {
  /// Variables may bind only to variables.
  bool var_to_var_only = false;
  /// When set, unbound stubs may only bind to this function.
  std::optional<std::string> stub_target;
};

/// One-way matching: an extension s of seed with apply_subst(pattern, s) ==
/// target, or nullopt.
std::optional<Substitution> match_term(const Term& pattern, const Term& target,
                                       const Substitution& seed,
                                       const MatchOptions& options = {});

/// Free variables in first-occurrence order (left to right).
std::vector<std::string> free_variables(const Term& t);
void collect_variables(const Term& t, std::vector<std::string>& out);

/// True when some application in t has the given head.
bool mentions_function(const Term& t, std::string_view head);

/// Subterm at a child-index path; empty path is t itself.
const Term& subterm_at(const Term& t, std::span<const std::size_t> path);
Term replace_at(const Term& t, std::span<const std::size_t> path, Term replacement);

}  // namespace tdm

#endif  // TDM_TERM_HPP
