#ifndef TDM_ENGINE_HPP
#define TDM_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tdm/database.hpp"
#include "tdm/normalize.hpp"
#include "tdm/obligations.hpp"

namespace tdm {

struct SearchConfig {
  bool two_pass = true;
  std::size_t max_slot_mappings = 64;
  bool fallback_default_measures = true;
  bool incremental_extend = false;
};

/// Functions considered defined in the current session: contributors of
/// session-origin entries plus any definitions loaded from a session file.
struct SessionSet {
  std::set<std::string> names;

  static SessionSet from(const Database& db, std::span<const FunctionDef> session_defs = {});
  bool contains(const std::string& name) const { return names.count(name) != 0; }
};

/// A group's justification together with one injective slot -> formal
/// mapping.
struct MeasureSource {
  Justification justification;
  Substitution mapping;
};

/// One instantiated measure. Groups whose mappings instantiate to the same
/// term are merged into one candidate, in first-seen order.
struct MeasureCandidate {
  Term measure;
  std::vector<MeasureSource> sources;
};

std::vector<MeasureCandidate> enumerate_measure_candidates(const Database& db,
                                                           std::span<const std::string> formals,
                                                           std::size_t max_slot_mappings = 64);

enum class ProofMode { Subsumption, Fallback };

struct UsedEntry {
  std::uint64_t id = 0;
  Provenance provenance;
  std::string name;
  bool include_needed = false;
};

struct ClauseWitness {
  std::size_t clause = 0;
  std::uint64_t entry = 0;
  std::size_t entry_clause = 0;
  SubsumptionWitness witness;

  friend bool operator==(const ClauseWitness&, const ClauseWitness&) = default;
};

struct SearchResult {
  Measure measure;
  ProofMode mode = ProofMode::Subsumption;
  /// 1 or 2 for the two-pass search, 0 for a single full pass or fallback.
  int pass = 0;
  std::vector<UsedEntry> used_entries;
  /// One per simplified obligation clause, in clause order.
  std::vector<ClauseWitness> witnesses;
  std::vector<std::string> includes_needed;
  ClauseList obligation;
  Simplified simplified;
  double elapsed_ms = 0.0;
};

/// Pass 1 only looks at entries whose representative is defined in the
/// session; pass 2 at everything. The first measure candidate whose entries
/// cover every obligation clause wins; per clause, the lowest entry id wins.
std::optional<SearchResult> search(const Database& db, const SessionSet& session,
                                   const FunctionDef& def, const SearchConfig& cfg = {});

/// Deterministic text form (timing excluded).
std::string format_search_result(const SearchResult& r);

/// The user-facing notes, one per line.
std::vector<std::string> format_notes(const SearchResult& r);

// ---------------------------------------------------------------------------
// Certificates

inline constexpr int kCertificateFormat = 1;

struct Certificate {
  std::string theory_version{kTheoryVersion};
  std::string database_digest;
  std::string definition_digest;
  std::string function;
  ProofMode mode = ProofMode::Subsumption;

  std::vector<std::string> includes;
  std::vector<std::uint64_t> entry_refs;
  RewriteTrace new_simplify;
  ClauseList new_simplified;
  std::vector<ClauseWitness> by_step;
  std::vector<std::size_t> structural;
  bool use_step = true;
  Term measure = Term::constant(Value::nil());
  /// stub -> function, as used by the final functional instance.
  std::map<std::string, FunctionRef> stub_instantiation;
};

std::string definition_digest(const FunctionDef& def);

struct EventPlan {
  std::string text;
};

Certificate make_certificate(const Database& db, const FunctionDef& def, const SearchResult& r);
EventPlan render_event_plan(const Database& db, const FunctionDef& def, const Certificate& cert);

struct Plan {
  Certificate certificate;
  EventPlan events;
};
Plan emit_plan(const Database& db, const FunctionDef& def, const SearchResult& r);

std::string write_certificate(const Certificate& cert);
Certificate read_certificate(std::string_view text);

struct Verdict {
  bool accepted = false;
  /// header, include, entry, new-simplify, by, structural, use, final-defun
  std::string step;
  std::string reason;
};

Verdict verify_certificate(const Database& db, const FunctionDef& def, const Certificate& cert);

/// Adds def's scheme as a session entry when cfg.incremental_extend is set;
/// nullopt (and no change) otherwise.
std::optional<InsertAction> extend_database(Database& db, const FunctionDef& def,
                                            const SearchResult& r, const SearchConfig& cfg);

}  // namespace tdm

#endif  // TDM_ENGINE_HPP
