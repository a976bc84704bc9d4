#ifndef GRAMINFER_GRAMMAR_HPP
#define GRAMINFER_GRAMMAR_HPP

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace graminfer {

enum class SymbolKind { NonTerminal, Terminal };

/// One symbol of a sentential form. Non-terminal text is the name without
/// angle brackets; terminal text is the literal exactly as written between
/// double quotes (it may be empty or contain spaces, never a double quote).
struct Symbol {
  SymbolKind kind = SymbolKind::Terminal;
  std::string text;

  static Symbol nonterminal(std::string name) {
    return Symbol{SymbolKind::NonTerminal, std::move(name)};
  }
  static Symbol terminal(std::string literal) {
    return Symbol{SymbolKind::Terminal, std::move(literal)};
  }

  bool is_terminal() const { return kind == SymbolKind::Terminal; }
  bool is_nonterminal() const { return kind == SymbolKind::NonTerminal; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// A sentential form: element of (V ∪ Σ)*. Empty means epsilon.
using SententialForm = std::vector<Symbol>;

/// A single production: lhs non-terminal plus one right-hand side.
struct Production {
  std::string lhs;
  SententialForm rhs;

  friend bool operator==(const Production&, const Production&) = default;
  friend auto operator<=>(const Production&, const Production&) = default;
};

/// All productions sharing one left-hand side, in the order written.
struct RuleSet {
  std::string lhs;
  std::vector<SententialForm> alternatives;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// A BNF grammar: rule sets in source order plus the start symbol.
/// Equality is structural (same order, same alternatives, same symbols).
struct Grammar {
  std::vector<RuleSet> rule_sets;
  std::string start;

  bool empty() const { return rule_sets.empty(); }
  const RuleSet* find_rule_set(std::string_view lhs) const;

  friend bool operator==(const Grammar&, const Grammar&) = default;
};

/// True iff the grammar has at least one rule set, every non-terminal
/// referenced in any right-hand side has a rule set of its own, every rule
/// set carries at least one alternative, and the start symbol has a rule
/// set. Total predicate; syntax well-formedness is the text layer's job.
bool is_valid(const Grammar& g);

/// Number of rule sets, i.e. |R| (= number of distinct non-terminals for a
/// normalized grammar).
std::size_t nonterminal_count(const Grammar& g);

/// Total number of (lhs, alternative) pairs across all rule sets, i.e. |Π|.
std::size_t production_count(const Grammar& g);

/// All non-terminal names: rule-set lhs plus non-terminals in any rhs (V).
std::set<std::string> nonterminal_names(const Grammar& g);

/// All terminal literals appearing in any rhs (Σ).
std::set<std::string> terminal_literals(const Grammar& g);

/// Π flattened in rule-set order, alternatives in written order.
std::vector<Production> productions(const Grammar& g);

/// Merges rule sets that share an lhs into the earliest occurrence
/// (alternatives concatenated in order, exact duplicates introduced by the
/// merge dropped). A grammar whose lhs are already distinct is returned
/// unchanged, duplicate alternatives within a single rule set included.
Grammar normalized(Grammar g);

} // namespace graminfer

#endif
