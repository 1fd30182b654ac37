#ifndef TDM_OBLIGATIONS_HPP
#define TDM_OBLIGATIONS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdm/term.hpp"

namespace tdm {

struct Sexp;

struct FunctionDef {
  std::string name;
  std::vector<std::string> formals;
  Term body;
  std::optional<Term> measure;

  bool is_recursive() const { return mentions_function(body, name); }
};

/// Accepts `(defun name (formals...) [(declare (xargs :measure m))] body)`;
/// `defunt` is read as a synonym.
FunctionDef parse_defun(std::string_view text);
FunctionDef defun_from_sexp(const Sexp& form);
/// Every defun form in a file (`;` comments allowed).
std::vector<FunctionDef> parse_defuns(std::string_view text);

/// Canonical one-line rendering of a definition, used for digests.
std::string print_defun(const FunctionDef& def);

struct CallContext {
  std::vector<Term> ruler;
  std::vector<Term> args;
  std::size_t index = 0;
};

/// One context per occurrence of def.name in the body, tests before branches,
/// arguments before the call that owns them.
std::vector<CallContext> call_contexts(const FunctionDef& def);

/// A disjunction of literals, sorted by compare_terms, duplicate-free.
struct Clause {
  std::vector<Term> literals;

  /// Sorts and removes duplicates.
  static Clause canonical(std::vector<Term> literals);
  friend bool operator==(const Clause&, const Clause&) = default;
};

/// A conjunction of clauses.
using ClauseList = std::vector<Clause>;

std::string print_clause(const Clause& c);

inline constexpr std::string_view kNatLess = "nat<";

struct Measure {
  Term term = Term::constant(Value::nil());
  std::string relation{kNatLess};
};

/// `(not p)` becomes p; anything else gets wrapped in not.
Term negate(const Term& t);

/// One clause per call context: the negated ruler tests plus
/// (< measure[formals := args] measure).
ClauseList measure_conjecture(const FunctionDef& def, const Measure& m);

/// naturals count as themselves, pairs as 1 + car + cdr, symbols as 0.
std::uint64_t acl2_count(const Value& v);

using Env = std::map<std::string, Value>;
using DefTable = std::map<std::string, FunctionDef>;

/// Strict evaluation with total coercions. Returns nullopt when the fuel
/// (one unit per user-function call) runs out. Throws Error on unknown
/// symbols.
std::optional<Value> eval_term(const Term& t, const Env& env, const DefTable& defs,
                               std::uint64_t fuel);

/// All values of acl2-count <= max_count over {nil, t} and naturals, ordered
/// by count, then by construction.
std::vector<Value> enumerate_values(std::uint64_t max_count);

inline constexpr std::uint64_t kDefaultMaxCount = 4;

struct Counterexample {
  std::size_t clause_index = 0;
  Env env;
};

struct FalsifyResult {
  std::optional<Counterexample> counterexample;
  /// Clauses mentioning user functions or stubs; not evaluated.
  std::vector<std::size_t> skipped;
};

/// Searches for an environment under which every literal of some clause is
/// nil. Variables are enumerated in sorted-name order; the first
/// counterexample in that order is returned.
FalsifyResult falsify(const ClauseList& clauses, std::uint64_t max_count = kDefaultMaxCount);

/// True when the term only uses builtins, variables, and constants.
bool is_builtin_only(const Term& t);

}  // namespace tdm

#endif  // TDM_OBLIGATIONS_HPP
