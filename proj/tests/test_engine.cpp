#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace tdm;

namespace {

Term P(const char* s) { return parse_term(s); }

const char* kF3 =
    "(defunt f3 (x y) (if (consp x) (if (atom y) (list (f3 (cddr x) y) (f3 (cadr x) y)) "
    "(f3 (cdr x) y)) (list x y)))";
const char* kG3 =
    "(defunt g3 (a b) (if (consp a) (if (atom b) (list (g3 (cddr a) b) (g3 (cadr a) b)) "
    "(g3 (cdr a) b)) (list a b)))";

const char* kDesk =
    ";; book: misc/symbol-btree\n"
    "(defun symbol-btree-to-alist-aux (x acc) (if (consp x) "
    "(symbol-btree-to-alist-aux (cadr x) (cons (car x) acc)) acc))\n"
    "(defun evens (l) (if (consp l) (cons (car l) (evens (cddr l))) nil))\n"
    "(defun true-listp (x) (if (consp x) (true-listp (cdr x)) (eq x nil)))\n";

Database desk(bool book = true) {
  std::string text = kDesk;
  if (!book) {
    text.erase(0, text.find('\n') + 1);
  }
  return mine_corpus(parse_corpus(text)).db;
}

std::vector<std::string> used_names(const SearchResult& r) {
  std::vector<std::string> out;
  for (const auto& u : r.used_entries) {
    out.push_back(u.name);
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("measure candidates") {
  Database db;
  SchemeEntry e;
  e.scheme = CanonicalScheme{{}, 1};
  e.justification = Justification{P("(acl2-count v1)")};
  e.representative = "a";
  insert_entry(db, e);
  std::vector<std::string> xy = {"x", "y"};
  auto c = enumerate_measure_candidates(db, xy);
  REQUIRE(c.size() == 2);
  CHECK(c[0].measure == P("(acl2-count x)"));
  CHECK(c[1].measure == P("(acl2-count y)"));

  CHECK(enumerate_measure_candidates(Database{}, xy).empty());

  Database two;
  SchemeEntry s;
  s.scheme = CanonicalScheme{{}, 2};
  s.justification = Justification{P("(+ (acl2-count v1) (acl2-count v2))")};
  s.representative = "b";
  insert_entry(two, s);
  // Injections of 2 slots into 2 formals: 2!/(2-2)! = 2.
  CHECK(enumerate_measure_candidates(two, xy).size() == 2);
  std::vector<std::string> xyz = {"x", "y", "z"};
  // 3!/(3-2)! = 6.
  auto six = enumerate_measure_candidates(two, xyz);
  CHECK(six.size() == 6);
  CHECK(six[0].measure == P("(+ (acl2-count x) (acl2-count y))"));
  CHECK(six[1].measure == P("(+ (acl2-count x) (acl2-count z))"));
  CHECK(six[2].measure == P("(+ (acl2-count y) (acl2-count x))"));
  CHECK(enumerate_measure_candidates(two, xyz, 4).size() == 4);
  CHECK_THROWS_AS(enumerate_measure_candidates(two, xyz, 0), Error);
  std::vector<std::string> one = {"x"};
  CHECK(enumerate_measure_candidates(two, one).empty());

  // Groups that instantiate to the same measure merge.
  SchemeEntry e2;
  e2.scheme = CanonicalScheme{{}, 2};
  e2.justification = Justification{P("(acl2-count v2)")};
  e2.representative = "c";
  insert_entry(db, e2);
  auto merged = enumerate_measure_candidates(db, xy);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].sources.size() == 2);
}

TEST_CASE("f3 against the desk corpus") {
  Database db = desk();
  FunctionDef f3 = parse_defun(kF3);
  auto r = search(db, SessionSet::from(db), f3);
  REQUIRE(r);
  CHECK(r->measure.term == P("(acl2-count x)"));
  CHECK(r->mode == ProofMode::Subsumption);
  CHECK(r->pass == 2);
  CHECK(used_names(*r) ==
        std::vector<std::string>{"symbol-btree-to-alist-aux", "evens", "true-listp"});
  CHECK(r->includes_needed == std::vector<std::string>{"misc/symbol-btree"});
  REQUIRE(r->witnesses.size() == r->simplified.clauses.size());
  for (std::size_t k = 0; k < r->witnesses.size(); ++k) {
    CHECK(r->witnesses[k].clause == k);
  }
  auto notes = format_notes(*r);
  REQUIRE(notes.size() == 2);
  CHECK(notes[0] ==
        "*note*: Using termination theorems for SYMBOL-BTREE-TO-ALIST-AUX, EVENS and TRUE-LISTP.");
  CHECK(notes[1] == "*note*: Requires book misc/symbol-btree for SYMBOL-BTREE-TO-ALIST-AUX.");
  CHECK(r->elapsed_ms < 1000.0);
}

TEST_CASE("pass preference") {
  Database db = desk(false);
  auto r = search(db, SessionSet::from(db), parse_defun(kF3));
  REQUIRE(r);
  CHECK(r->pass == 1);
  CHECK(r->includes_needed.empty());
  CHECK(format_notes(*r).size() == 1);

  // A book entry whose representative is loaded in the session is usable in
  // pass 1 and needs no include.
  Database booked = desk(true);
  std::vector<FunctionDef> session = {parse_defun(
      "(defun symbol-btree-to-alist-aux (x acc) (if (consp x) "
      "(symbol-btree-to-alist-aux (cadr x) (cons (car x) acc)) acc))")};
  auto s = search(booked, SessionSet::from(booked, session), parse_defun(kF3));
  REQUIRE(s);
  CHECK(s->pass == 1);
  CHECK(s->includes_needed.empty());

  SearchConfig single;
  single.two_pass = false;
  auto one = search(booked, SessionSet::from(booked), parse_defun(kF3), single);
  REQUIRE(one);
  CHECK(one->pass == 0);
  CHECK(one->includes_needed == std::vector<std::string>{"misc/symbol-btree"});
}

TEST_CASE("fallback and no-match") {
  Database db;
  FunctionDef g = parse_defun("(defun g (x y) (if (consp y) (g x (cdr y)) x))");
  auto r = search(db, SessionSet::from(db), g);
  REQUIRE(r);
  CHECK(r->mode == ProofMode::Fallback);
  CHECK(r->measure.term == P("(acl2-count y)"));
  CHECK(r->used_entries.empty());
  auto notes = format_notes(*r);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].find("default measure (acl2-count y)") != std::string::npos);

  SearchConfig strict;
  strict.fallback_default_measures = false;
  CHECK_FALSE(search(db, SessionSet::from(db), g, strict));

  FunctionDef grow = parse_defun("(defun grow (x) (if (consp x) (grow (cons x x)) nil))");
  Database full = mine_corpus(parse_corpus(read_file(std::string(TDM_DATA_DIR) + "/corpus.tdc"))).db;
  CHECK_FALSE(search(full, SessionSet::from(full), grow));
  auto cex = falsify(measure_conjecture(grow, Measure{P("(acl2-count x)")}), 4);
  CHECK(cex.counterexample);

  CHECK_THROWS_AS(search(db, SessionSet::from(db), parse_defun("(defun id (x) x)")), Error);
}

TEST_CASE("certificates: round trip and verification") {
  Database db = desk();
  FunctionDef f3 = parse_defun(kF3);
  auto r = search(db, SessionSet::from(db), f3);
  REQUIRE(r);
  Plan plan = emit_plan(db, f3, *r);
  std::string text = write_certificate(plan.certificate);
  Certificate back = read_certificate(text);
  CHECK(write_certificate(back) == text);
  Verdict v = verify_certificate(db, f3, back);
  CHECK(v.accepted);
  CHECK(v.reason == "");

  // Determinism.
  auto r2 = search(db, SessionSet::from(db), f3);
  CHECK(format_search_result(*r2) == format_search_result(*r));
  CHECK(write_certificate(emit_plan(db, f3, *r2).certificate) == text);
  CHECK(emit_plan(db, f3, *r2).events.text == plan.events.text);

  const std::string& events = plan.events.text;
  CHECK(events.rfind("(encapsulate ()", 0) == 0);
  CHECK(events.find("(local (include-book \"misc/symbol-btree\" :dir :system))") != std::string::npos);
  CHECK(events.find(":measure (acl2-count x)") != std::string::npos);
  CHECK(events.find("(:functional-instance new-termination-theorem (stub-2 f3))") !=
        std::string::npos);
  CHECK(std::count(events.begin(), events.end(), '(') ==
        std::count(events.begin(), events.end(), ')'));
}

TEST_CASE("certificates: mutations are rejected at the right step") {
  Database db = desk();
  FunctionDef f3 = parse_defun(kF3);
  Certificate good = emit_plan(db, f3, *search(db, SessionSet::from(db), f3)).certificate;

  auto expect = [&](Certificate c, const std::string& step) {
    Verdict v = verify_certificate(db, f3, c);
    CHECK_FALSE(v.accepted);
    CHECK(v.step == step);
  };

  Certificate c = good;
  c.by_step[1].witness.literal_map[0] = (c.by_step[1].witness.literal_map[0] + 1) % 3;
  expect(c, "by");

  c = good;
  c.new_simplified[0].literals[0] = P("(consp zz)");
  expect(c, "new-simplify");

  c = good;
  c.database_digest[0] = c.database_digest[0] == '0' ? '1' : '0';
  expect(c, "header");

  c = good;
  c.measure = P("(acl2-count y)");
  expect(c, "new-simplify");

  c = good;
  c.includes.push_back("other/book");
  expect(c, "include");

  c = good;
  c.entry_refs.push_back(999);
  expect(c, "entry");

  c = good;
  c.by_step.pop_back();
  expect(c, "by");

  c = good;
  c.by_step[0].witness.substitution.stubs.emplace("stub-2", FunctionRef{"other", 2});
  expect(c, "by");

  c = good;
  c.use_step = false;
  expect(c, "use");

  c = good;
  c.stub_instantiation.clear();
  c.stub_instantiation.emplace("stub-2", FunctionRef{"other", 2});
  expect(c, "final-defun");

  c = good;
  c.new_simplify.steps.pop_back();
  expect(c, "new-simplify");

  // A changed definition changes the definition digest.
  FunctionDef changed = parse_defun(
      "(defunt f3 (x y) (if (consp x) (if (atom y) (list (f3 (cddr x) y) (f3 (cadr x) y)) "
      "(f3 (cdr x) y)) (list y x)))");
  Verdict v = verify_certificate(db, changed, good);
  CHECK(v.step == "header");

  CHECK_THROWS_AS(read_certificate("tdm-certificate 2\n"), ParseError);
  CHECK_THROWS_AS(read_certificate(write_certificate(good).substr(0, 200)), ParseError);
}

TEST_CASE("fallback certificates") {
  Database db;
  FunctionDef g = parse_defun("(defun g (n) (if (zp n) 0 (g (- n 1))))");
  auto r = search(db, SessionSet::from(db), g);
  REQUIRE(r);
  Plan plan = emit_plan(db, g, *r);
  CHECK(plan.certificate.includes.empty());
  CHECK(plan.certificate.by_step.empty());
  CHECK(plan.certificate.structural.size() == 1);
  CHECK(plan.events.text.find("structural") != std::string::npos);
  CHECK(plan.events.text.find("include-book") == std::string::npos);
  Certificate back = read_certificate(write_certificate(plan.certificate));
  CHECK(verify_certificate(db, g, back).accepted);

  back.structural.push_back(0);
  CHECK(verify_certificate(db, g, back).step == "structural");
}

TEST_CASE("reflexive calls are not covered by a plain cdr scheme") {
  Database db = mine_corpus(parse_corpus(
                                "(defun r (x) (declare (xargs :measure (acl2-count x))) "
                                "(if (consp x) (r (cdr x)) x))"))
                    .db;
  // Only the inner call's clause is covered.
  FunctionDef refl = parse_defun("(defun q (x) (if (consp x) (q (q (cdr x))) x))");
  SearchConfig cfg;
  cfg.fallback_default_measures = false;
  CHECK_FALSE(search(db, SessionSet::from(db), refl, cfg));
}

TEST_CASE("extension") {
  Database db = desk();
  FunctionDef f3 = parse_defun(kF3);
  auto r = search(db, SessionSet::from(db), f3);
  REQUIRE(r);

  Database untouched = db;
  SearchConfig off;
  CHECK_FALSE(extend_database(db, f3, *r, off));
  CHECK(db == untouched);

  SearchConfig on;
  on.incremental_extend = true;
  auto action = extend_database(db, f3, *r, on);
  REQUIRE(action);
  CHECK(action->kind == InsertAction::Kind::Added);
  CHECK(db.find(action->id)->representative == "f3");

  FunctionDef g3 = parse_defun(kG3);
  auto again = search(db, SessionSet::from(db), g3);
  REQUIRE(again);
  CHECK(again->pass == 1);
  CHECK(again->includes_needed.empty());
  CHECK(again->measure.term == P("(acl2-count a)"));

  auto skip = extend_database(db, g3, *again, on);
  REQUIRE(skip);
  CHECK(skip->kind == InsertAction::Kind::Skipped);
  CHECK(skip->id == action->id);
  const auto& contributors = db.find(action->id)->provenance.contributors;
  CHECK(std::find(contributors.begin(), contributors.end(), "g3") != contributors.end());
}

TEST_CASE("measure candidate completeness on small databases") {
  // Brute force: for each stored justification and each injective mapping,
  // check coverage by that group's entries alone; search must succeed
  // whenever any does.
  test::Rng rng(51);
  const char* defs[] = {
      "(defun h (x y) (if (consp y) (h x (cdr y)) x))",
      "(defun h (x y) (if (consp x) (h (cddr x) y) y))",
      "(defun h (x y) (if (zp y) x (h x (- y 1))))",
      "(defun h (x y) (if (consp x) (if (consp y) (h (cdr x) (cdr y)) x) y))",
      "(defun h (x y) (if (consp x) (h (cons x x) y) y))",
  };
  const char* corpus_pool[] = {
      "(defun c1 (a) (if (consp a) (c1 (cdr a)) a))",
      "(defun c2 (a b) (if (consp b) (c2 a (cdr b)) a))",
      "(defun c3 (a) (if (zp a) 0 (c3 (- a 1))))",
      "(defun c4 (a b) (if (zp b) a (c4 a (- b 1))))",
      "(defun c5 (a) (if (consp a) (c5 (cddr a)) a))",
  };
  for (int round = 0; round < 20; ++round) {
    std::string text;
    for (const char* c : corpus_pool) {
      if (test::coin(rng)) {
        text += std::string(c) + "\n";
      }
    }
    Database db = mine_corpus(parse_corpus(text)).db;
    for (const char* d : defs) {
      FunctionDef def = parse_defun(d);
      bool any = false;
      for (const auto& [j, entries] : db.groups) {
        auto slots = free_variables(j.measure);
        for (const auto& formal : def.formals) {
          if (slots.size() != 1) {
            continue;
          }
          Substitution mu;
          mu.vars.emplace(slots[0], Term::var(formal));
          Simplified s = simplify_clause_list(
              measure_conjecture(def, Measure{apply_subst(j.measure, mu)}));
          bool covered = std::all_of(s.clauses.begin(), s.clauses.end(), [&](const Clause& c) {
            return std::any_of(entries.begin(), entries.end(), [&](const SchemeEntry& e) {
              return std::any_of(e.scheme.clauses.begin(), e.scheme.clauses.end(),
                                 [&](const Clause& ec) {
                                   return test::brute_force_subsumes(
                                       ec, c, {{slots[0], Term::var(formal)}}, def.name);
                                 });
            });
          });
          any = any || covered;
        }
      }
      SearchConfig cfg;
      cfg.fallback_default_measures = false;
      auto r = search(db, SessionSet::from(db), def, cfg);
      CHECK(r.has_value() == any);
    }
  }
}

}  // TEST_SUITE
