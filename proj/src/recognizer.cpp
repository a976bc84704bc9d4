#include "graminfer/recognizer.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

namespace graminfer {

namespace {

constexpr std::size_t kMaxDimension = 65'535;

struct CompiledSymbol {
  bool terminal = true;
  int rule = -1;               // rule-set index for non-terminals
  std::string_view literal;    // literal text for terminals
};

struct CompiledGrammar {
  Grammar storage;             // normalized copy the views point into
  std::vector<std::vector<std::vector<CompiledSymbol>>> alts; // [rule][alt][sym]
  std::vector<bool> nullable;
  std::array<bool, 256> terminal_chars{};
  int start_rule = -1;
  bool usable = false;         // valid grammar with in-range dimensions

  std::size_t rule_count() const { return alts.size(); }
};

CompiledGrammar compile(const Grammar& g) {
  CompiledGrammar cg;
  cg.storage = normalized(g);
  const Grammar& norm = cg.storage;
  if (!is_valid(norm)) return cg;

  std::unordered_map<std::string_view, int> rule_index;
  for (std::size_t r = 0; r < norm.rule_sets.size(); ++r) {
    rule_index.emplace(norm.rule_sets[r].lhs, static_cast<int>(r));
  }

  if (norm.rule_sets.size() > kMaxDimension) return cg;
  cg.alts.resize(norm.rule_sets.size());
  for (std::size_t r = 0; r < norm.rule_sets.size(); ++r) {
    const RuleSet& rs = norm.rule_sets[r];
    if (rs.alternatives.size() > kMaxDimension) return cg;
    cg.alts[r].reserve(rs.alternatives.size());
    for (const SententialForm& alt : rs.alternatives) {
      if (alt.size() > kMaxDimension) return cg;
      std::vector<CompiledSymbol> calt;
      calt.reserve(alt.size());
      for (const Symbol& sym : alt) {
        CompiledSymbol cs;
        if (sym.is_terminal()) {
          cs.terminal = true;
          cs.literal = sym.text;
          for (unsigned char c : sym.text) cg.terminal_chars[c] = true;
        } else {
          cs.terminal = false;
          cs.rule = rule_index.at(sym.text);
        }
        calt.push_back(cs);
      }
      cg.alts[r].push_back(std::move(calt));
    }
  }
  cg.start_rule = rule_index.at(norm.start);

  // Nullable fixpoint: a rule is nullable iff some alternative consists
  // entirely of empty terminals and nullable non-terminals.
  cg.nullable.assign(cg.rule_count(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < cg.rule_count(); ++r) {
      if (cg.nullable[r]) continue;
      for (const auto& alt : cg.alts[r]) {
        bool all_nullable = true;
        for (const CompiledSymbol& cs : alt) {
          if (cs.terminal ? !cs.literal.empty() : !cg.nullable[cs.rule]) {
            all_nullable = false;
            break;
          }
        }
        if (all_nullable) {
          cg.nullable[r] = true;
          changed = true;
          break;
        }
      }
    }
  }

  cg.usable = true;
  return cg;
}

struct Item {
  int rule;
  int alt;
  int dot;
  int origin;
};

uint64_t pack_item(const Item& it) {
  return (static_cast<uint64_t>(it.rule) << 48) |
         (static_cast<uint64_t>(it.alt) << 32) |
         (static_cast<uint64_t>(it.dot) << 16) |
         static_cast<uint64_t>(it.origin);
}

uint64_t pack_span(int rule, int i, int j) {
  return (static_cast<uint64_t>(rule) << 42) |
         (static_cast<uint64_t>(i) << 21) |
         static_cast<uint64_t>(j);
}

struct ItemSet {
  std::vector<Item> items;
  std::unordered_set<uint64_t> seen;
  std::unordered_map<int, std::vector<std::size_t>> waiting; // rule -> item indices
  std::unordered_set<int> predicted;
};

struct Chart {
  bool accepted = false;
  bool capped = false;
  // (rule, origin, end) -> completed alternative indices, ascending
  std::unordered_map<uint64_t, std::vector<int>> completed_alts;
  // (rule, origin) -> completed end positions, ascending
  std::unordered_map<uint64_t, std::vector<int>> completed_ends;
};

// One full Earley pass over the input. Nullable non-terminals use the
// predict-and-advance treatment so same-position completions never miss
// parents added later in the set.
Chart run_earley(const CompiledGrammar& cg, std::string_view input,
                 const RecognizerLimits& limits, bool record_spans) {
  Chart chart;
  const std::size_t n = input.size();
  std::vector<ItemSet> sets(n + 1);
  std::size_t total_items = 0;

  auto next_symbol = [&](const Item& it) -> const CompiledSymbol* {
    const auto& alt = cg.alts[it.rule][it.alt];
    if (static_cast<std::size_t>(it.dot) >= alt.size()) return nullptr;
    return &alt[it.dot];
  };

  auto add = [&](std::size_t set_idx, Item it) -> bool {
    ItemSet& set = sets[set_idx];
    if (!set.seen.insert(pack_item(it)).second) return true;
    if (++total_items > limits.max_chart_items) {
      chart.capped = true;
      return false;
    }
    const CompiledSymbol* sym = next_symbol(it);
    if (sym && !sym->terminal) set.waiting[sym->rule].push_back(set.items.size());
    set.items.push_back(it);
    return true;
  };

  for (std::size_t a = 0; a < cg.alts[cg.start_rule].size(); ++a) {
    if (!add(0, Item{cg.start_rule, static_cast<int>(a), 0, 0})) return chart;
  }

  for (std::size_t j = 0; j <= n; ++j) {
    ItemSet& set = sets[j];
    for (std::size_t idx = 0; idx < set.items.size(); ++idx) {
      Item it = set.items[idx];
      const CompiledSymbol* sym = next_symbol(it);

      if (sym == nullptr) {
        // Completion of it.rule over [origin, j).
        if (it.rule == cg.start_rule && it.origin == 0 && j == n) chart.accepted = true;
        if (record_spans) {
          chart.completed_alts[pack_span(it.rule, it.origin, static_cast<int>(j))]
              .push_back(it.alt);
          chart.completed_ends[pack_span(it.rule, it.origin, 0)]
              .push_back(static_cast<int>(j));
        }
        // The waiting list may grow mid-loop when origin == j (epsilon
        // completions), so look it up afresh on every step.
        for (std::size_t wi = 0;; ++wi) {
          auto found = sets[it.origin].waiting.find(it.rule);
          if (found == sets[it.origin].waiting.end() || wi >= found->second.size()) break;
          Item parent = sets[it.origin].items[found->second[wi]];
          ++parent.dot;
          if (!add(j, parent)) return chart;
        }
        continue;
      }

      if (sym->terminal) {
        const std::string_view lit = sym->literal;
        if (lit.empty()) {
          Item adv = it;
          ++adv.dot;
          if (!add(j, adv)) return chart;
        } else if (input.compare(j, lit.size(), lit) == 0) {
          Item adv = it;
          ++adv.dot;
          if (!add(j + lit.size(), adv)) return chart;
        }
        continue;
      }

      // Prediction.
      if (set.predicted.insert(sym->rule).second) {
        for (std::size_t a = 0; a < cg.alts[sym->rule].size(); ++a) {
          if (!add(j, Item{sym->rule, static_cast<int>(a), 0, static_cast<int>(j)})) {
            return chart;
          }
        }
      }
      if (cg.nullable[sym->rule]) {
        Item adv = it;
        ++adv.dot;
        if (!add(j, adv)) return chart;
      }
    }
  }

  if (record_spans) {
    for (auto& [key, alts] : chart.completed_alts) {
      std::sort(alts.begin(), alts.end());
      alts.erase(std::unique(alts.begin(), alts.end()), alts.end());
    }
    for (auto& [key, ends] : chart.completed_ends) {
      std::sort(ends.begin(), ends.end());
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    }
  }
  return chart;
}

// Deterministic reconstruction of one left-most derivation from the chart:
// alternatives in index order, child spans shortest-first left to right, and
// no (rule, span) node may repeat along the active path (which would denote
// a derivation with a superfluous cycle).
class TraceBuilder {
public:
  TraceBuilder(const CompiledGrammar& cg, const Chart& chart,
               const RecognizerLimits& limits)
      : cg_(cg), chart_(chart), limits_(limits) {}

  bool derive(int rule, int i, int j) {
    step();
    uint64_t key = pack_span(rule, i, j);
    auto alts_it = chart_.completed_alts.find(key);
    if (alts_it == chart_.completed_alts.end()) return false;
    if (!on_path_.insert(key).second) return false;
    if (++depth_ > kMaxDepth) {
      throw ResourceLimitError("derivation reconstruction exceeded the depth limit");
    }

    bool ok = false;
    for (int alt : alts_it->second) {
      std::size_t mark = used_.size();
      if (derive_seq(cg_.alts[rule][alt], 0, i, j)) {
        used_.push_back({rule, alt});
        ok = true;
        break;
      }
      used_.resize(mark);
    }
    --depth_;
    on_path_.erase(key);
    return ok;
  }

  std::set<Production> productions() const {
    std::set<Production> out;
    for (const auto& [rule, alt] : used_) {
      out.insert(Production{cg_.storage.rule_sets[rule].lhs,
                            cg_.storage.rule_sets[rule].alternatives[alt]});
    }
    return out;
  }

private:
  void step() {
    if (++steps_ > limits_.max_trace_steps) {
      throw ResourceLimitError("derivation reconstruction exceeded the step limit");
    }
  }

  bool derive_seq(const std::vector<CompiledSymbol>& alt, std::size_t k, int pos, int end) {
    step();
    if (k == alt.size()) return pos == end;
    const CompiledSymbol& sym = alt[k];
    if (sym.terminal) {
      int next = pos + static_cast<int>(sym.literal.size());
      if (next > end) return false;
      if (input_->compare(pos, sym.literal.size(), sym.literal) != 0) return false;
      return derive_seq(alt, k + 1, next, end);
    }
    auto ends_it = chart_.completed_ends.find(pack_span(sym.rule, pos, 0));
    if (ends_it == chart_.completed_ends.end()) return false;
    for (int q : ends_it->second) {
      if (q > end) break;
      std::size_t mark = used_.size();
      if (derive(sym.rule, pos, q) && derive_seq(alt, k + 1, q, end)) return true;
      used_.resize(mark);
    }
    return false;
  }

public:
  const std::string_view* input_ = nullptr;

private:
  static constexpr std::size_t kMaxDepth = 4'000; // stack guard

  const CompiledGrammar& cg_;
  const Chart& chart_;
  const RecognizerLimits& limits_;
  std::unordered_set<uint64_t> on_path_;
  std::vector<std::pair<int, int>> used_;
  std::size_t steps_ = 0;
  std::size_t depth_ = 0;
};

bool dimensions_ok(std::string_view s) { return s.size() < kMaxDimension; }

bool chars_feasible(const CompiledGrammar& cg, std::string_view s) {
  for (unsigned char c : s) {
    if (!cg.terminal_chars[c]) return false;
  }
  return true;
}

} // namespace

Membership membership(const Grammar& g, std::string_view s,
                      const RecognizerLimits& limits) {
  CompiledGrammar cg = compile(g);
  if (!cg.usable) return Membership::Rejected; // invalid grammar: L = empty set
  if (!dimensions_ok(s)) return Membership::ResourceLimit;
  if (!chars_feasible(cg, s)) return Membership::Rejected;
  Chart chart = run_earley(cg, s, limits, /*record_spans=*/false);
  if (chart.accepted) return Membership::Accepted;
  if (chart.capped) return Membership::ResourceLimit;
  return Membership::Rejected;
}

bool accepts(const Grammar& g, std::string_view s, const RecognizerLimits& limits) {
  Membership m = membership(g, s, limits);
  if (m == Membership::ResourceLimit) {
    throw ResourceLimitError("membership query exceeded the chart item limit");
  }
  return m == Membership::Accepted;
}

std::optional<DerivationTrace> leftmost_derivation_rules(
    const Grammar& g, std::string_view s, const RecognizerLimits& limits) {
  CompiledGrammar cg = compile(g);
  if (!cg.usable) return std::nullopt;
  if (!dimensions_ok(s)) {
    throw ResourceLimitError("membership query exceeded the chart item limit");
  }
  if (!chars_feasible(cg, s)) return std::nullopt;
  Chart chart = run_earley(cg, s, limits, /*record_spans=*/true);
  if (chart.capped && !chart.accepted) {
    throw ResourceLimitError("membership query exceeded the chart item limit");
  }
  if (!chart.accepted) return std::nullopt;

  TraceBuilder builder(cg, chart, limits);
  builder.input_ = &s;
  if (!builder.derive(cg.start_rule, 0, static_cast<int>(s.size()))) {
    // The chart proved membership, so reconstruction cannot fail.
    throw ResourceLimitError("derivation reconstruction failed unexpectedly");
  }
  return DerivationTrace{builder.productions()};
}

std::set<Production> used_rules_for_examples(const Grammar& g,
                                             const std::vector<std::string>& examples,
                                             const RecognizerLimits& limits) {
  std::set<Production> out;
  for (const std::string& example : examples) {
    auto trace = leftmost_derivation_rules(g, example, limits);
    if (!trace.has_value()) {
      throw ExampleNotAccepted("example is not in the grammar's language: \"" + example + "\"",
                               example);
    }
    out.insert(trace->used_productions.begin(), trace->used_productions.end());
  }
  return out;
}

} // namespace graminfer
