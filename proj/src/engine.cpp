#include "tdm/engine.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <functional>
#include <map>
#include <sstream>

namespace tdm {

SessionSet SessionSet::from(const Database& db, std::span<const FunctionDef> session_defs) {
  SessionSet s;
  for (const auto& [j, entries] : db.groups) {
    for (const auto& e : entries) {
      if (e.provenance.origin == Origin::Session) {
        s.names.insert(e.provenance.contributors.begin(), e.provenance.contributors.end());
      }
    }
  }
  for (const auto& d : session_defs) {
    s.names.insert(d.name);
  }
  return s;
}

namespace {

std::size_t slot_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'v' ||
      !std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(c) != 0; })) {
    throw Error("'" + name + "' is not a slot variable");
  }
  return std::stoul(name.substr(1));
}

}  // namespace

std::vector<MeasureCandidate> enumerate_measure_candidates(const Database& db,
                                                           std::span<const std::string> formals,
                                                           std::size_t max_slot_mappings) {
  if (max_slot_mappings == 0) {
    throw Error("max-slot-mappings must be at least 1");
  }
  std::vector<MeasureCandidate> out;
  for (const auto& [j, entries] : db.groups) {
    std::vector<std::string> slots = free_variables(j.measure);
    std::sort(slots.begin(), slots.end(), [](const std::string& a, const std::string& b) {
      return slot_index(a) < slot_index(b);
    });
    if (slots.size() > formals.size()) {
      continue;
    }

    // Injective slot -> formal assignments in lexicographic order of formal
    // positions.
    std::vector<std::size_t> chosen;
    std::vector<bool> used(formals.size(), false);
    std::size_t produced = 0;
    std::function<void()> assign = [&] {
      if (produced >= max_slot_mappings) {
        return;
      }
      if (chosen.size() == slots.size()) {
        Substitution mapping;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          mapping.vars.emplace(slots[i], Term::var(formals[chosen[i]]));
        }
        Term measure = apply_subst(j.measure, mapping);
        ++produced;
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const MeasureCandidate& c) { return c.measure == measure; });
        if (it == out.end()) {
          out.push_back(MeasureCandidate{measure, {}});
          it = out.end() - 1;
        }
        it->sources.push_back(MeasureSource{j, std::move(mapping)});
        return;
      }
      for (std::size_t f = 0; f < formals.size(); ++f) {
        if (used[f]) {
          continue;
        }
        used[f] = true;
        chosen.push_back(f);
        assign();
        chosen.pop_back();
        used[f] = false;
      }
    };
    assign();
  }
  return out;
}

namespace {

struct PoolEntry {
  const SchemeEntry* entry;
  const Substitution* mapping;
};

bool available_in_session(const SchemeEntry& e, const SessionSet& session) {
  return e.provenance.origin == Origin::Session || session.contains(e.representative);
}

std::optional<std::vector<ClauseWitness>> cover(const ClauseList& clauses,
                                                const std::vector<PoolEntry>& pool,
                                                const std::string& self) {
  std::vector<ClauseWitness> witnesses;
  for (std::size_t k = 0; k < clauses.size(); ++k) {
    bool found = false;
    for (const auto& p : pool) {
      const auto& entry_clauses = p.entry->scheme.clauses;
      for (std::size_t ec = 0; ec < entry_clauses.size() && !found; ++ec) {
        if (auto w = clause_subsumes(entry_clauses[ec], clauses[k], *p.mapping, self)) {
          witnesses.push_back(ClauseWitness{k, p.entry->id, ec, std::move(*w)});
          found = true;
        }
      }
      if (found) {
        break;
      }
    }
    if (!found) {
      return std::nullopt;
    }
  }
  return witnesses;
}

}  // namespace

std::optional<SearchResult> search(const Database& db, const SessionSet& session,
                                   const FunctionDef& def, const SearchConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  auto finish = [&](SearchResult r) {
    r.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
  };
  if (!def.is_recursive()) {
    throw Error(def.name + " is not recursive");
  }

  const auto candidates = enumerate_measure_candidates(db, def.formals, cfg.max_slot_mappings);
  std::vector<std::optional<Simplified>> simplified(candidates.size());
  std::vector<ClauseList> raw(candidates.size());
  auto obligation = [&](std::size_t i) -> const Simplified& {
    if (!simplified[i]) {
      raw[i] = measure_conjecture(def, Measure{candidates[i].measure});
      simplified[i] = simplify_clause_list(raw[i]);
    }
    return *simplified[i];
  };

  std::vector<int> passes = cfg.two_pass ? std::vector<int>{1, 2} : std::vector<int>{0};
  for (int pass : passes) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::vector<PoolEntry> pool;
      for (const auto& src : candidates[i].sources) {
        for (const auto& e : db.groups.at(src.justification)) {
          if (pass != 1 || available_in_session(e, session)) {
            pool.push_back(PoolEntry{&e, &src.mapping});
          }
        }
      }
      if (pool.empty()) {
        continue;
      }
      std::stable_sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
        return a.entry->id < b.entry->id;
      });
      const Simplified& s = obligation(i);
      auto witnesses = cover(s.clauses, pool, def.name);
      if (!witnesses) {
        continue;
      }

      SearchResult r;
      r.measure = Measure{candidates[i].measure};
      r.mode = ProofMode::Subsumption;
      r.pass = pass;
      r.obligation = raw[i];
      r.simplified = s;
      r.witnesses = std::move(*witnesses);
      std::vector<std::uint64_t> ids;
      for (const auto& w : r.witnesses) {
        ids.push_back(w.entry);
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (auto id : ids) {
        const SchemeEntry& e = *db.find(id);
        bool needed = e.provenance.origin == Origin::Book && !session.contains(e.representative);
        r.used_entries.push_back(UsedEntry{id, e.provenance, e.representative, needed});
        if (needed && std::find(r.includes_needed.begin(), r.includes_needed.end(),
                                e.provenance.book) == r.includes_needed.end()) {
          r.includes_needed.push_back(e.provenance.book);
        }
      }
      return finish(std::move(r));
    }
  }

  if (cfg.fallback_default_measures) {
    for (const auto& m : default_measures(def)) {
      if (auto s = validated_obligation(def, m)) {
        SearchResult r;
        r.measure = Measure{m};
        r.mode = ProofMode::Fallback;
        r.pass = 0;
        r.obligation = measure_conjecture(def, r.measure);
        r.simplified = std::move(*s);
        return finish(std::move(r));
      }
    }
  }
  return std::nullopt;
}

std::string format_search_result(const SearchResult& r) {
  std::ostringstream os;
  os << "measure " << print_term(r.measure.term) << " " << r.measure.relation << "\n";
  os << "mode " << (r.mode == ProofMode::Subsumption ? "subsumption" : "fallback") << "\n";
  os << "pass " << r.pass << "\n";
  for (const auto& u : r.used_entries) {
    os << "used " << u.id << " " << u.name << " "
       << (u.provenance.origin == Origin::Session ? "session" : "book " + u.provenance.book)
       << (u.include_needed ? " include" : "") << "\n";
  }
  for (const auto& w : r.witnesses) {
    os << "witness " << w.clause << " entry " << w.entry << " clause " << w.entry_clause
       << " map";
    for (auto i : w.witness.literal_map) {
      os << ' ' << i;
    }
    for (const auto& [v, t] : w.witness.substitution.vars) {
      os << ' ' << v << '=' << print_term(t);
    }
    for (const auto& [s, f] : w.witness.substitution.stubs) {
      os << ' ' << s << '=' << f.name;
    }
    os << "\n";
  }
  for (const auto& b : r.includes_needed) {
    os << "include " << b << "\n";
  }
  for (const auto& c : r.simplified.clauses) {
    os << "clause " << print_clause(c) << "\n";
  }
  return os.str();
}

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) {
      out += (i + 1 == names.size()) ? " and " : ", ";
    }
    out += upper(names[i]);
  }
  return out;
}

}  // namespace

std::vector<std::string> format_notes(const SearchResult& r) {
  std::vector<std::string> lines;
  if (r.mode == ProofMode::Fallback) {
    lines.push_back("*note*: No stored termination theorem applies; using default measure " +
                    print_term(r.measure.term) + ", checked structurally.");
    return lines;
  }
  std::vector<std::string> names;
  for (const auto& u : r.used_entries) {
    if (std::find(names.begin(), names.end(), u.name) == names.end()) {
      names.push_back(u.name);
    }
  }
  lines.push_back("*note*: Using termination theorems for " + join_names(names) + ".");
  for (const auto& book : r.includes_needed) {
    std::vector<std::string> needing;
    for (const auto& u : r.used_entries) {
      if (u.include_needed && u.provenance.book == book) {
        needing.push_back(u.name);
      }
    }
    lines.push_back("*note*: Requires book " + book + " for " + join_names(needing) + ".");
  }
  return lines;
}

std::optional<InsertAction> extend_database(Database& db, const FunctionDef& def,
                                            const SearchResult& r, const SearchConfig& cfg) {
  if (!cfg.incremental_extend) {
    return std::nullopt;
  }
  SchemeEntry entry;
  entry.scheme = canonicalize(r.simplified.clauses, def.formals, def.name);
  entry.justification =
      Justification{rename_to_slots(r.measure.term, def.formals, def.name), r.measure.relation};
  entry.provenance = Provenance{Origin::Session, {}, {def.name}};
  entry.representative = def.name;
  return insert_entry(db, std::move(entry));
}

}  // namespace tdm
