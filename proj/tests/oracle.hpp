#ifndef GRAMINFER_TESTS_ORACLE_HPP
#define GRAMINFER_TESTS_ORACLE_HPP

// Test-side oracles, deliberately independent of the production recognizer:
//  - bounded_language: every string of length <= max_len a grammar derives,
//    via a bottom-up fixpoint over length-bucketed string sets;
//  - all_leftmost_derivations: exhaustive left-most derivation enumeration
//    against a target string, alternatives explored in index order;
//  - random grammar generators for the property suites.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graminfer/grammar.hpp"
#include "graminfer/rng.hpp"

namespace oracle {

using graminfer::Grammar;
using graminfer::Production;
using graminfer::RuleSet;
using graminfer::SententialForm;
using graminfer::Symbol;
using graminfer::SymbolKind;

// ---- bounded language enumeration -----------------------------------------

using LenBuckets = std::vector<std::set<std::string>>; // index = string length

inline LenBuckets combine_symbol(const LenBuckets& partial, const Symbol& sym,
                                 const std::vector<LenBuckets>& nt_sets,
                                 const std::vector<std::string>& nt_names,
                                 std::size_t max_len) {
  LenBuckets out(max_len + 1);
  for (std::size_t lp = 0; lp <= max_len; ++lp) {
    for (const std::string& p : partial[lp]) {
      if (sym.is_terminal()) {
        std::size_t lt = sym.text.size();
        if (lp + lt <= max_len) out[lp + lt].insert(p + sym.text);
        continue;
      }
      std::size_t nt = 0;
      while (nt < nt_names.size() && nt_names[nt] != sym.text) ++nt;
      if (nt == nt_names.size()) continue; // dangling reference derives nothing
      for (std::size_t lq = 0; lq + lp <= max_len; ++lq) {
        for (const std::string& q : nt_sets[nt][lq]) out[lp + lq].insert(p + q);
      }
    }
  }
  return out;
}

/// L(g) restricted to strings of length <= max_len, exactly.
inline std::set<std::string> bounded_language(const Grammar& g, std::size_t max_len) {
  std::vector<std::string> names;
  for (const RuleSet& rs : g.rule_sets) names.push_back(rs.lhs);
  std::vector<LenBuckets> sets(g.rule_sets.size(), LenBuckets(max_len + 1));

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
      for (const SententialForm& alt : g.rule_sets[r].alternatives) {
        LenBuckets partial(max_len + 1);
        partial[0].insert("");
        for (const Symbol& sym : alt) {
          partial = combine_symbol(partial, sym, sets, names, max_len);
        }
        for (std::size_t len = 0; len <= max_len; ++len) {
          for (const std::string& s : partial[len]) {
            if (sets[r][len].insert(s).second) changed = true;
          }
        }
      }
    }
  }

  std::set<std::string> language;
  for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
    if (names[r] != g.start) continue;
    for (const auto& bucket : sets[r]) language.insert(bucket.begin(), bucket.end());
    break;
  }
  return language;
}

/// Distinct characters usable by the grammar's terminals.
inline std::set<char> terminal_alphabet(const Grammar& g) {
  std::set<char> chars;
  for (const RuleSet& rs : g.rule_sets) {
    for (const SententialForm& alt : rs.alternatives) {
      for (const Symbol& sym : alt) {
        if (sym.is_terminal()) chars.insert(sym.text.begin(), sym.text.end());
      }
    }
  }
  return chars;
}

/// Every string over `chars` of length <= max_len, shortest first.
inline std::vector<std::string> all_strings(const std::set<char>& chars, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::size_t level_begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (char c : chars) out.push_back(out[i] + c);
    }
    level_begin = level_end;
  }
  return out;
}

// ---- exhaustive left-most derivation enumeration ---------------------------

struct Derivation {
  std::vector<std::pair<std::size_t, std::size_t>> choices; // (rule set, alt) in order
  std::set<Production> productions;
};

struct DerivationSet {
  std::vector<Derivation> found;
  bool exhausted = false; // hit a cap; the enumeration may be incomplete
};

namespace detail {

constexpr std::size_t kInf = static_cast<std::size_t>(-1);

inline std::vector<std::size_t> min_lengths(const Grammar& g) {
  std::vector<std::size_t> min_len(g.rule_sets.size(), kInf);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
      for (const SententialForm& alt : g.rule_sets[r].alternatives) {
        std::size_t total = 0;
        bool feasible = true;
        for (const Symbol& sym : alt) {
          if (sym.is_terminal()) {
            total += sym.text.size();
            continue;
          }
          std::size_t nt = 0;
          while (nt < g.rule_sets.size() && g.rule_sets[nt].lhs != sym.text) ++nt;
          if (nt == g.rule_sets.size() || min_len[nt] == kInf) {
            feasible = false;
            break;
          }
          total += min_len[nt];
        }
        if (feasible && total < min_len[r]) {
          min_len[r] = total;
          changed = true;
        }
      }
    }
  }
  return min_len;
}

struct Enumerator {
  const Grammar& g;
  std::string_view target;
  std::vector<std::size_t> min_len;
  std::vector<Derivation> found;
  std::size_t max_derivations;
  std::size_t steps = 0;
  std::size_t max_steps;
  std::vector<std::pair<std::size_t, std::size_t>> choices;
  std::vector<Production> used;
  std::size_t depth = 0;
  bool capped = false;
  static constexpr std::size_t kMaxDepth = 600;    // recursion guard
  static constexpr std::size_t kMaxFormLen = 64;   // sentential form guard

  std::size_t rule_of(const std::string& name) const {
    for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
      if (g.rule_sets[r].lhs == name) return r;
    }
    return kInf;
  }

  std::size_t lower_bound_len(const std::vector<Symbol>& form) const {
    std::size_t total = 0;
    for (const Symbol& sym : form) {
      if (sym.is_terminal()) {
        total += sym.text.size();
      } else {
        std::size_t r = rule_of(sym.text);
        if (r == kInf || min_len[r] == kInf) return kInf;
        total += min_len[r];
      }
    }
    return total;
  }

  void walk(std::size_t pos, std::vector<Symbol> form) {
    if (found.size() >= max_derivations || ++steps > max_steps || depth > kMaxDepth ||
        form.size() > kMaxFormLen) {
      capped = true;
      return;
    }

    // Consume the terminal prefix of the sentential form.
    std::size_t i = 0;
    while (i < form.size() && form[i].is_terminal()) {
      const std::string& t = form[i].text;
      if (target.compare(pos, t.size(), t) != 0) return;
      pos += t.size();
      ++i;
    }
    if (i == form.size()) {
      if (pos == target.size()) {
        found.push_back(Derivation{choices, {used.begin(), used.end()}});
      }
      return;
    }
    std::vector<Symbol> rest(form.begin() + i + 1, form.end());
    std::size_t r = rule_of(form[i].text);
    if (r == kInf) return;

    for (std::size_t a = 0; a < g.rule_sets[r].alternatives.size(); ++a) {
      const SententialForm& alt = g.rule_sets[r].alternatives[a];
      std::vector<Symbol> next(alt.begin(), alt.end());
      next.insert(next.end(), rest.begin(), rest.end());
      std::size_t lb = lower_bound_len(next);
      if (lb == kInf || pos + lb > target.size()) continue;
      choices.emplace_back(r, a);
      used.push_back(Production{g.rule_sets[r].lhs, alt});
      ++depth;
      walk(pos, next);
      --depth;
      used.pop_back();
      choices.pop_back();
      if (found.size() >= max_derivations || steps > max_steps) return;
    }
  }
};

} // namespace detail

/// All left-most derivations of `target`, capped; alternatives are explored
/// in index order, so the first entry is the lexicographically smallest
/// choice sequence. Check `exhausted` before trusting completeness: cyclic
/// grammars can overrun the caps.
inline DerivationSet enumerate_leftmost_derivations(const Grammar& g, std::string_view target,
                                                    std::size_t max_derivations = 64,
                                                    std::size_t max_steps = 2'000'000) {
  detail::Enumerator e{g, target, detail::min_lengths(g), {}, max_derivations, 0, max_steps,
                       {}, {}};
  e.walk(0, {Symbol::nonterminal(g.start)});
  return DerivationSet{std::move(e.found), e.capped};
}

inline std::vector<Derivation> all_leftmost_derivations(const Grammar& g,
                                                        std::string_view target,
                                                        std::size_t max_derivations = 64,
                                                        std::size_t max_steps = 2'000'000) {
  return enumerate_leftmost_derivations(g, target, max_derivations, max_steps).found;
}

// ---- random grammar generation ---------------------------------------------

struct GrammarGenOptions {
  std::size_t max_rule_sets = 4;
  std::size_t max_alternatives = 3;
  std::size_t max_symbols = 3;
  std::size_t max_terminal_len = 2;
  std::string alphabet = "ab";
  bool allow_epsilon = true;
};

/// A structurally valid random grammar: every referenced non-terminal is
/// defined, every rule set has at least one alternative. Recursion (left
/// recursion included) and non-productive rules arise naturally.
inline Grammar random_valid_grammar(graminfer::Rng& rng, const GrammarGenOptions& opt = {}) {
  Grammar g;
  const std::size_t n_rules = rng.uniform_in(1, opt.max_rule_sets);
  std::vector<std::string> names;
  for (std::size_t r = 0; r < n_rules; ++r) names.push_back("n" + std::to_string(r));

  for (std::size_t r = 0; r < n_rules; ++r) {
    RuleSet rs;
    rs.lhs = names[r];
    const std::size_t n_alts = rng.uniform_in(1, opt.max_alternatives);
    for (std::size_t a = 0; a < n_alts; ++a) {
      const std::size_t min_syms = opt.allow_epsilon ? 0 : 1;
      const std::size_t n_syms = rng.uniform_in(min_syms, opt.max_symbols);
      SententialForm alt;
      for (std::size_t s = 0; s < n_syms; ++s) {
        if (rng.coin(0.6)) {
          const std::size_t len = rng.uniform_in(1, opt.max_terminal_len);
          std::string text;
          for (std::size_t c = 0; c < len; ++c) {
            text += opt.alphabet[rng.below(opt.alphabet.size())];
          }
          alt.push_back(Symbol::terminal(std::move(text)));
        } else {
          alt.push_back(Symbol::nonterminal(names[rng.below(names.size())]));
        }
      }
      rs.alternatives.push_back(std::move(alt));
    }
    g.rule_sets.push_back(std::move(rs));
  }
  g.start = g.rule_sets.front().lhs;
  return g;
}

/// Round-trip generator: richer terminal content (spaces, punctuation) and
/// non-terminal names, still one rule set per distinct lhs.
inline Grammar random_printable_grammar(graminfer::Rng& rng) {
  GrammarGenOptions opt;
  opt.max_rule_sets = 6;
  opt.max_alternatives = 4;
  opt.max_symbols = 4;
  opt.max_terminal_len = 5;
  opt.alphabet = "ab01 ,.+-:;=#~@$%^&!/\\'`<>()[]{}|*?";
  Grammar g = random_valid_grammar(rng, opt);
  // Vary the non-terminal names beyond the generator's n<i> scheme.
  static const char* kNameSuffix[] = {"", "_x", "-y", "2"};
  for (RuleSet& rs : g.rule_sets) {
    std::string fresh = rs.lhs + kNameSuffix[rng.below(4)];
    for (RuleSet& other : g.rule_sets) {
      for (SententialForm& alt : other.alternatives) {
        for (Symbol& sym : alt) {
          if (sym.is_nonterminal() && sym.text == rs.lhs) sym.text = fresh;
        }
      }
    }
    rs.lhs = fresh;
  }
  g.start = g.rule_sets.front().lhs;
  return g;
}

} // namespace oracle

#endif
