#ifndef TDM_NORMALIZE_HPP
#define TDM_NORMALIZE_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdm/obligations.hpp"
#include "tdm/term.hpp"

namespace tdm {

/// Identifies the rewrite theory below. Stored schemes and queries must be
/// simplified under the same theory; files carry this string.
inline constexpr std::string_view kTheoryVersion = "theory-v1";

struct RewriteRule {
  std::string id;
  Term pattern;
  Term replacement;
  /// Only fires at the root of a literal.
  bool top_level_only = false;
};

/// The fixed theory, in application order:
///   r1-atom    (atom x)      -> (not (consp x))
///   r2-endp    (endp x)      -> (not (consp x))
///   r3-null    (null x)      -> (not x)
///   r4-eq      (eq x y)      -> (equal x y)
///   r4-eql     (eql x y)     -> (equal x y)
///   r5-not-not (not (not p)) -> p            literal root only
const std::vector<RewriteRule>& theory_rules();
const RewriteRule& find_rule(std::string_view id);

using TermPath = std::vector<std::size_t>;

struct TraceStep {
  enum class Action {
    Rewrite,              // clause, literal, path, rule
    DropLiteral,          // clause, literal: duplicate of another literal
    DropClause,           // clause: tautology
    SortLiterals,         // clause
    DropDuplicateClause,  // clause: equal to an earlier clause
  };

  Action action = Action::Rewrite;
  std::size_t clause = 0;
  std::size_t literal = 0;
  TermPath path;
  std::string rule;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

/// Indices in each step refer to the clause list as left by the steps
/// before it.
struct RewriteTrace {
  std::vector<TraceStep> steps;

  friend bool operator==(const RewriteTrace&, const RewriteTrace&) = default;
};

struct Simplified {
  ClauseList clauses;
  RewriteTrace trace;
};

/// Innermost-first rewriting to fixpoint, then per-clause hygiene (sort,
/// duplicate literals, tautologies) and duplicate-clause removal.
/// Idempotent.
Simplified simplify_clause_list(const ClauseList& clauses);

/// Re-executes a trace. Every step is checked: the rule must match at the
/// stated position, dropped literals must be duplicates, dropped clauses must
/// be tautologies or duplicates. Throws Error on the first bad step.
ClauseList replay_trace(const ClauseList& original, const RewriteTrace& trace);

/// A literal t/non-nil constant, or a complementary pair p / (not p).
bool is_tautology(const Clause& c);

std::string slot_name(std::size_t index);  // v1, v2, ...

/// Simplified clause list renamed onto slot variables v1..vk (k = number of
/// formals) with the defining function's own calls replaced by stubs.
struct CanonicalScheme {
  ClauseList clauses;
  std::size_t slot_count = 0;

  friend bool operator==(const CanonicalScheme&, const CanonicalScheme&) = default;
};

CanonicalScheme canonicalize(const ClauseList& clauses, std::span<const std::string> formals,
                             std::string_view self);

/// The renaming canonicalize applies to each literal: formal i becomes
/// slot v(i+1), calls of `self` become stub-<arity>.
Term rename_to_slots(const Term& t, std::span<const std::string> formals,
                     std::string_view self);

struct SubsumptionWitness {
  Substitution substitution;
  /// For each literal of the subsuming clause, the index of its image.
  std::vector<std::size_t> literal_map;

  friend bool operator==(const SubsumptionWitness&, const SubsumptionWitness&) = default;
};

/// Does `old` subsume `target`? Slot variables bind only to variables; stubs
/// bind only to `stub_target` when given. Literals of `old` are tried
/// largest first; candidate images in target order. Returns the first
/// witness found.
std::optional<SubsumptionWitness> clause_subsumes(const Clause& old, const Clause& target,
                                                  const Substitution& seed,
                                                  std::optional<std::string_view> stub_target);

/// Checks a witness without searching.
bool check_witness(const Clause& old, const Clause& target, const SubsumptionWitness& w);

}  // namespace tdm

#endif  // TDM_NORMALIZE_HPP
