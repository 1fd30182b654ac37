// Random generators and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls the matcher or subsumption code.
#ifndef TDM_TESTS_SUPPORT_HPP
#define TDM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tdm/database.hpp"
#include "tdm/engine.hpp"
#include "tdm/normalize.hpp"
#include "tdm/obligations.hpp"
#include "tdm/term.hpp"

namespace tdm::test {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct Signature {
  std::vector<std::string> vars;
  /// name -> arity
  std::vector<std::pair<std::string, std::size_t>> functions;
  std::vector<Term> constants;
};

inline Signature builtin_signature(std::vector<std::string> vars) {
  return Signature{std::move(vars),
                   {{"car", 1},
                    {"cdr", 1},
                    {"cons", 2},
                    {"consp", 1},
                    {"not", 1},
                    {"acl2-count", 1},
                    {"<", 2},
                    {"equal", 2},
                    {"zp", 1},
                    {"-", 2}},
                   {Term::constant(Value::nil()), Term::constant(Value::natural(0)),
                    Term::constant(Value::natural(1))}};
}

/// Terms of depth <= depth (a leaf has depth 0).
inline Term random_term(Rng& rng, const Signature& sig, int depth) {
  if (depth == 0 || coin(rng, 0.3)) {
    if (!sig.vars.empty() && (sig.constants.empty() || coin(rng, 0.75))) {
      return Term::var(sig.vars[pick(rng, sig.vars.size())]);
    }
    return sig.constants[pick(rng, sig.constants.size())];
  }
  const auto& [name, arity] = sig.functions[pick(rng, sig.functions.size())];
  std::vector<Term> args;
  for (std::size_t i = 0; i < arity; ++i) {
    args.push_back(random_term(rng, sig, depth - 1));
  }
  return Term::app(name, std::move(args));
}

/// Every subterm of t, t included, in preorder.
inline void subterms(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  if (t.is_app()) {
    for (const auto& a : t.args()) {
      subterms(a, out);
    }
  }
}

/// Independent substitution: variables by lookup, stubs by head renaming.
inline Term substitute(const Term& t, const std::map<std::string, Term>& vars,
                       const std::map<std::string, std::string>& heads = {}) {
  if (t.is_var()) {
    auto it = vars.find(t.name());
    return it == vars.end() ? t : it->second;
  }
  if (!t.is_app()) {
    return t;
  }
  std::vector<Term> args;
  for (const auto& a : t.args()) {
    args.push_back(substitute(a, vars, heads));
  }
  auto it = heads.find(t.name());
  return Term::app(it == heads.end() ? t.name() : it->second, std::move(args));
}

inline std::vector<std::string> sorted_vars(const std::vector<Term>& terms) {
  std::set<std::string> s;
  std::function<void(const Term&)> walk = [&](const Term& t) {
    if (t.is_var()) {
      s.insert(t.name());
    } else if (t.is_app()) {
      for (const auto& a : t.args()) {
        walk(a);
      }
    }
  };
  for (const auto& t : terms) {
    walk(t);
  }
  return {s.begin(), s.end()};
}

/// Brute-force matching: tries every assignment of the pattern's unseeded
/// variables to subterms of target (or only to variable subterms).
inline bool brute_force_match(const Term& pattern, const Term& target,
                              const std::map<std::string, Term>& seed, bool var_to_var_only) {
  std::vector<Term> pool;
  subterms(target, pool);
  if (var_to_var_only) {
    std::erase_if(pool, [](const Term& t) { return !t.is_var(); });
  }
  std::vector<std::string> free;
  for (const auto& v : sorted_vars({pattern})) {
    if (!seed.count(v)) {
      free.push_back(v);
    }
  }
  std::map<std::string, Term> assignment = seed;
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == free.size()) {
      return substitute(pattern, assignment) == target;
    }
    for (const auto& p : pool) {
      assignment.insert_or_assign(free[i], p);
      if (go(i + 1)) {
        return true;
      }
    }
    assignment.erase(free[i]);
    return false;
  };
  return go(0);
}

/// Brute-force subsumption: every assignment of old's variables to target's
/// variables (consistent with seed) with old's stubs renamed to stub_target,
/// then a literal subset test.
inline bool brute_force_subsumes(const Clause& old, const Clause& target,
                                 const std::map<std::string, Term>& seed,
                                 const std::string& stub_target) {
  std::set<std::string> stubs;
  std::function<void(const Term&)> walk = [&](const Term& t) {
    if (t.is_app()) {
      if (stub_arity(t.name())) {
        stubs.insert(t.name());
      }
      for (const auto& a : t.args()) {
        walk(a);
      }
    }
  };
  for (const auto& l : old.literals) {
    walk(l);
  }
  std::map<std::string, std::string> heads;
  for (const auto& s : stubs) {
    heads[s] = stub_target;
  }
  std::vector<std::string> targets = sorted_vars(target.literals);
  std::vector<std::string> free;
  for (const auto& v : sorted_vars(old.literals)) {
    if (!seed.count(v)) {
      free.push_back(v);
    }
  }
  std::set<Term> lits(target.literals.begin(), target.literals.end());
  std::map<std::string, Term> assignment = seed;
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == free.size()) {
      return std::all_of(old.literals.begin(), old.literals.end(), [&](const Term& l) {
        return lits.count(substitute(l, assignment, heads)) != 0;
      });
    }
    for (const auto& v : targets) {
      assignment.insert_or_assign(free[i], Term::var(v));
      if (go(i + 1)) {
        return true;
      }
    }
    assignment.erase(free[i]);
    return false;
  };
  return go(0);
}

/// Values of acl2-count exactly c, built from scratch.
inline std::vector<Value> values_of_count(std::uint64_t c) {
  static std::map<std::uint64_t, std::vector<Value>> memo;
  if (auto it = memo.find(c); it != memo.end()) {
    return it->second;
  }
  std::vector<Value> out;
  if (c == 0) {
    out = {Value::nil(), Value::t(), Value::natural(0)};
  } else {
    out.push_back(Value::natural(c));
    for (std::uint64_t a = 0; a < c; ++a) {
      for (const auto& x : values_of_count(a)) {
        for (const auto& y : values_of_count(c - 1 - a)) {
          out.push_back(Value::cons(x, y));
        }
      }
    }
  }
  memo[c] = out;
  return out;
}

/// Truth of a clause (disjunction) under env.
inline bool clause_true(const Clause& c, const Env& env) {
  for (const auto& l : c.literals) {
    auto v = eval_term(l, env, {}, 0);
    if (v && !v->is_nil()) {
      return true;
    }
  }
  return false;
}

inline bool clauses_true(const ClauseList& cl, const Env& env) {
  return std::all_of(cl.begin(), cl.end(), [&](const Clause& c) { return clause_true(c, env); });
}

/// Enumerates every env over vars with values of count <= max_count; stops
/// early when f returns false.
inline bool for_all_envs(const std::vector<std::string>& vars, std::uint64_t max_count,
                         const std::function<bool(const Env&)>& f) {
  std::vector<Value> universe;
  for (std::uint64_t c = 0; c <= max_count; ++c) {
    auto v = values_of_count(c);
    universe.insert(universe.end(), v.begin(), v.end());
  }
  Env env;
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == vars.size()) {
      return f(env);
    }
    for (const auto& v : universe) {
      env.insert_or_assign(vars[i], v);
      if (!go(i + 1)) {
        return false;
      }
    }
    return true;
  };
  return go(0);
}

/// Literal generator for the simplifier: includes every rewrite-rule head.
inline Term random_literal(Rng& rng, const std::vector<std::string>& vars, int depth) {
  Signature sig{vars,
                {{"car", 1},
                 {"cdr", 1},
                 {"cons", 2},
                 {"consp", 1},
                 {"atom", 1},
                 {"endp", 1},
                 {"null", 1},
                 {"not", 1},
                 {"eq", 2},
                 {"eql", 2},
                 {"equal", 2},
                 {"natp", 1},
                 {"zp", 1},
                 {"<", 2},
                 {"acl2-count", 1}},
                {Term::constant(Value::nil()), Term::constant(Value::t()),
                 Term::constant(Value::natural(0)), Term::constant(Value::natural(2))}};
  static const std::vector<std::string> preds = {"consp", "atom", "endp", "null", "not", "zp"};
  if (coin(rng, 0.6)) {
    // Predicate shapes the rules care about, possibly doubly negated.
    Term t = Term::app(preds[pick(rng, preds.size())], {random_term(rng, sig, depth - 1)});
    int negations = static_cast<int>(pick(rng, 3));
    for (int i = 0; i < negations; ++i) {
      t = Term::app("not", {t});
    }
    return t;
  }
  return random_term(rng, sig, depth);
}

inline Clause random_clause(Rng& rng, const std::vector<std::string>& vars, std::size_t max_lits,
                            int depth) {
  Clause c;
  std::size_t n = 1 + pick(rng, max_lits);
  for (std::size_t i = 0; i < n; ++i) {
    c.literals.push_back(random_literal(rng, vars, depth));
  }
  return c;
}

inline ClauseList random_clause_list(Rng& rng, const std::vector<std::string>& vars,
                                     std::size_t max_clauses, std::size_t max_lits, int depth) {
  ClauseList cl;
  std::size_t n = 1 + pick(rng, max_clauses);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cl.empty() && coin(rng, 0.15)) {
      cl.push_back(cl[pick(rng, cl.size())]);  // exercise duplicate-clause removal
    } else {
      cl.push_back(random_clause(rng, vars, max_lits, depth));
    }
  }
  return cl;
}

/// A random pair for the subsumption oracle. Half of the pairs derive old
/// from target by abstracting formals to slots and f to stub-2, so that
/// positive answers are common.
struct SubsumptionCase {
  Clause old;
  Clause target;
};

inline SubsumptionCase random_subsumption_case(Rng& rng) {
  Signature target_sig = builtin_signature({"x", "y", "z"});
  target_sig.functions.push_back({"f", 2});
  Signature old_sig = builtin_signature({"v1", "v2", "v3"});
  if (coin(rng)) {
    old_sig.functions.push_back({"stub-2", 2});
  } else {
    old_sig.functions.push_back({"f", 2});
  }

  SubsumptionCase out;
  std::size_t nt = 1 + pick(rng, 5);
  for (std::size_t i = 0; i < nt; ++i) {
    out.target.literals.push_back(random_term(rng, target_sig, static_cast<int>(pick(rng, 4))));
  }
  if (coin(rng)) {
    // Abstract a subset of target literals.
    std::vector<std::string> formals = {"x", "y", "z"};
    std::shuffle(formals.begin(), formals.end(), rng);
    std::map<std::string, Term> to_slot;
    for (std::size_t i = 0; i < formals.size(); ++i) {
      // Non-injective abstractions too: two formals may share a slot.
      to_slot.insert_or_assign(formals[i], Term::var(slot_name(1 + (coin(rng, 0.2) ? 0 : i))));
    }
    for (const auto& l : out.target.literals) {
      if (coin(rng, 0.6)) {
        out.old.literals.push_back(substitute(l, to_slot, {{"f", "stub-2"}}));
      }
    }
    if (coin(rng, 0.25)) {
      out.old.literals.push_back(random_term(rng, old_sig, static_cast<int>(pick(rng, 4))));
    }
    if (out.old.literals.empty()) {
      out.old.literals.push_back(substitute(out.target.literals[0], to_slot, {{"f", "stub-2"}}));
    }
  } else {
    std::size_t no = 1 + pick(rng, 5);
    for (std::size_t i = 0; i < no; ++i) {
      out.old.literals.push_back(random_term(rng, old_sig, static_cast<int>(pick(rng, 4))));
    }
  }
  // Canonical literal order, no duplicates, on both sides.
  out.old = Clause::canonical(std::move(out.old.literals));
  out.target = Clause::canonical(std::move(out.target.literals));
  return out;
}

}  // namespace tdm::test

#endif  // TDM_TESTS_SUPPORT_HPP
