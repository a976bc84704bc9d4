#ifndef GRAMINFER_BNF_TEXT_HPP
#define GRAMINFER_BNF_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graminfer/grammar.hpp"

namespace graminfer {

enum class DiagnosticCode {
  InvalidRule,
  MissingDefinitionOperator,
  LackOfAlternatives,
  UnterminatedTerminal,
  UnsupportedSymbol,
  UnwrappedNonTerminal,
  MisplacedBracket,
  MissingAlternativeSeparator,
};

std::string_view to_string(DiagnosticCode code);

/// A structured, human-readable BNF syntax error. The message states what is
/// wrong; the hints suggest fixes in wording an LLM can act on.
struct Diagnostic {
  int line = 1; // 1-based
  DiagnosticCode code = DiagnosticCode::InvalidRule;
  std::string message;
  std::vector<std::string> hints;

  std::string render() const;
};

/// Renders a diagnostic list as the feedback block sent back to an LLM.
std::string render_feedback(const std::vector<Diagnostic>& diagnostics);

/// Outcome of parse_bnf. Exactly one of grammar / diagnostics is meaningful:
/// a grammar on success, at least one diagnostic on failure.
struct ParseResult {
  std::optional<Grammar> grammar;
  std::vector<Diagnostic> diagnostics;
  /// Source line of the first occurrence of each rule set, aligned with
  /// grammar->rule_sets. Empty on failure.
  std::vector<int> rule_set_lines;

  bool ok() const { return grammar.has_value(); }
};

/// Parses BNF text into a Grammar. One rule set per line, continuation lines
/// start with '|'; the start symbol is the first rule set's lhs; rule sets
/// sharing an lhs are merged in order of appearance. EBNF constructs
/// (quantifiers, character classes, grouping) are rejected. Total: never
/// throws on malformed input, every failure comes back as diagnostics.
ParseResult parse_bnf(std::string_view text);

/// Canonical serialization: one rule set per line,
/// `<lhs> ::= alt | alt`, terminals double-quoted, non-terminals in angle
/// brackets, single spaces between symbols, an epsilon alternative printed
/// as "". No trailing newline. parse_bnf(print_bnf(g)) equals normalized(g).
std::string print_bnf(const Grammar& g);

/// Extraction of grammar text from a raw LLM response.
struct FenceExtraction {
  std::string text;        // trimmed fence interior (or whole response)
  bool fenced = false;     // a triple-backtick fence was present
  bool empty_fence = false; // fence present but nothing inside (an error)
};

/// Returns the interior of the first triple-backtick fence, trimmed, with a
/// leading language tag line (e.g. "bnf") dropped. When no fence exists the
/// whole trimmed response is returned with fenced = false.
FenceExtraction extract_fenced_grammar(std::string_view llm_response);

/// Diagnostics for a grammar that parsed but fails is_valid (dangling
/// non-terminal references). Lines come from rule_set_lines as produced by
/// parse_bnf. Used by the feedback loop, which stops only on fully valid
/// grammars.
std::vector<Diagnostic> invalidity_diagnostics(
    const Grammar& g, const std::vector<int>& rule_set_lines);

} // namespace graminfer

#endif
