#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>

#include "tdm/database.hpp"
#include "tdm/engine.hpp"
#include "tdm/obligations.hpp"

namespace tdm::cli {

namespace {

struct Options {
  std::uint64_t max_count = kDefaultMaxCount;
  std::uint64_t seed = 0;
  bool verbose = false;

  std::string corpus;
  std::string db_path;
  std::string out_path;
  bool strict = false;

  std::string session_path;
  std::string plan_path;
  std::string defun_path;
  std::string cert_path;
  bool no_two_pass = false;
  bool no_fallback = false;
  bool extend = false;
};

FunctionDef single_defun(const std::string& path) {
  auto defs = parse_defuns(read_file(path));
  if (defs.size() != 1) {
    throw Error(path + ": expected exactly one defun, found " + std::to_string(defs.size()));
  }
  return defs.front();
}

std::string env_text(const Env& env) {
  std::string s;
  for (const auto& [name, value] : env) {
    s += (s.empty() ? "" : ", ") + name + "=" + print_value(value);
  }
  return s;
}

int cmd_mine(const Options& o, std::ostream& out, std::ostream& err) {
  auto corpus = parse_corpus(read_file(o.corpus));
  MineResult r = mine_corpus(corpus);
  out << r.report.format();
  out << stats(r.db).summary() << "\n";
  if (!r.report.all_accepted() && o.strict) {
    err << "tdm: rejected definitions; database not written\n";
    return kExitError;
  }
  save_database(r.db, o.out_path);
  return r.report.all_accepted() ? kExitOk : kExitRejectedDefs;
}

int cmd_stats(const Options& o, std::ostream& out) {
  DatabaseStats s = stats(load_database(o.db_path));
  out << s.summary() << "\n";
  if (o.verbose) {
    for (const auto& [measure, n] : s.group_sizes) {
      out << "group " << measure << " " << n << "\n";
    }
  }
  return kExitOk;
}

int cmd_prove(const Options& o, std::ostream& out, std::ostream& err) {
  Database db = load_database(o.db_path);
  std::vector<FunctionDef> session_defs;
  if (!o.session_path.empty()) {
    session_defs = parse_defuns(read_file(o.session_path));
  }
  FunctionDef def = single_defun(o.defun_path);

  SearchConfig cfg;
  cfg.two_pass = !o.no_two_pass;
  cfg.fallback_default_measures = !o.no_fallback;
  cfg.incremental_extend = o.extend;

  auto result = search(db, SessionSet::from(db, session_defs), def, cfg);
  if (!result) {
    err << "tdm: no stored termination theorem proves " << def.name << "\n";
    return kExitNoMatch;
  }
  for (const auto& line : format_notes(*result)) {
    out << line << "\n";
  }
  if (o.verbose) {
    out << format_search_result(*result);
    out << "elapsed-ms " << result->elapsed_ms << "\n";
  }

  Plan plan = emit_plan(db, def, *result);
  write_file(o.out_path, write_certificate(plan.certificate));
  if (!o.plan_path.empty()) {
    write_file(o.plan_path, plan.events.text);
  }
  if (auto action = extend_database(db, def, *result, cfg)) {
    save_database(db, o.db_path);
    if (o.verbose) {
      out << "extend entry " << action->id << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  Database db = load_database(o.db_path);
  FunctionDef def = single_defun(o.defun_path);
  Certificate cert = read_certificate(read_file(o.cert_path));
  Verdict v = verify_certificate(db, def, cert);
  if (!v.accepted) {
    out << "rejected at " << v.step << ": " << v.reason << "\n";
    return kExitCertificateRejected;
  }
  out << "accepted\n";
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  bool all_proven = true;
  for (const auto& def : parse_defuns(read_file(o.defun_path))) {
    if (!def.is_recursive()) {
      out << def.name << ": not recursive\n";
      continue;
    }
    std::vector<Term> measures =
        def.measure ? std::vector<Term>{*def.measure} : default_measures(def);
    auto chosen = std::find_if(measures.begin(), measures.end(), [&](const Term& m) {
      return validated_obligation(def, m).has_value();
    });
    const Term& measure = chosen == measures.end() ? measures.front() : *chosen;
    out << def.name << ": measure " << print_term(measure) << "\n";

    Simplified s = simplify_clause_list(measure_conjecture(def, Measure{measure}));
    for (std::size_t i = 0; i < s.clauses.size(); ++i) {
      const Clause& c = s.clauses[i];
      std::string verdict;
      try {
        verdict = structural_decrease_check(c) == StructuralVerdict::Proven ? "proven" : "unknown";
      } catch (const Error&) {
        verdict = "malformed";
      }
      out << "  clause " << i << " " << verdict << " " << print_clause(c);
      if (verdict != "proven") {
        all_proven = false;
        FalsifyResult f = falsify({c}, o.max_count);
        if (f.counterexample) {
          out << " counterexample " << env_text(f.counterexample->env);
        } else if (!f.skipped.empty()) {
          out << " falsifier skipped";
        } else {
          out << " no counterexample up to " << o.max_count;
        }
      }
      out << "\n";
    }
  }
  return all_proven ? kExitOk : kExitCheckUnproven;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Termination proofs from a database of mined termination schemes", "tdm"};
  app.require_subcommand(1);
  app.add_option("--max-count", o.max_count, "Falsifier bound on acl2-count")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "Reserved; all behavior is deterministic");
  app.add_flag("-v,--verbose", o.verbose, "Print search details");

  auto* mine = app.add_subcommand("mine", "Mine a corpus into a database");
  mine->add_option("corpus", o.corpus, "Corpus file (.tdc)")->required();
  mine->add_option("-o,--out", o.out_path, "Database file to write (.tdb)")->required();
  mine->add_flag("--strict", o.strict, "Fail without writing when any definition is rejected");

  auto* st = app.add_subcommand("stats", "Print database statistics");
  st->add_option("db", o.db_path, "Database file")->required();

  auto* prove = app.add_subcommand("prove", "Prove termination of a definition");
  prove->add_option("--db", o.db_path, "Database file")->required();
  prove->add_option("--session", o.session_path, "Definitions already in the session");
  prove->add_flag("--no-two-pass", o.no_two_pass, "Search all entries in a single pass");
  prove->add_flag("--no-fallback", o.no_fallback, "Do not fall back to default measures");
  prove->add_flag("--extend", o.extend, "Add the proved scheme to the database");
  prove->add_option("--out", o.out_path, "Certificate file to write")->required();
  prove->add_option("--plan", o.plan_path, "Event plan file to write");
  prove->add_option("defun", o.defun_path, "File holding the definition")->required();

  auto* verify = app.add_subcommand("verify", "Verify a certificate");
  verify->add_option("--db", o.db_path, "Database file")->required();
  verify->add_option("cert", o.cert_path, "Certificate file")->required();
  verify->add_option("defun", o.defun_path, "File holding the definition")->required();

  auto* check = app.add_subcommand("check", "Run the structural checker and falsifier");
  check->add_option("defun", o.defun_path, "File holding definitions")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (mine->parsed()) {
      return cmd_mine(o, out, err);
    }
    if (st->parsed()) {
      return cmd_stats(o, out);
    }
    if (prove->parsed()) {
      return cmd_prove(o, out, err);
    }
    if (verify->parsed()) {
      return cmd_verify(o, out);
    }
    return cmd_check(o, out);
  } catch (const ParseError& e) {
    err << "tdm: parse error: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "tdm: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace tdm::cli
