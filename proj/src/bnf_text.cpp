#include "graminfer/bnf_text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace graminfer {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> invalid_rule_hints() {
  return {
      "This error is likely due to not satisfying one of the following requirements:",
      "1. A rule MUST start with a non-terminal definition;",
      "2. A non-terminal symbol MUST be in angle brackets, e.g. <non-terminal>;",
      "3. A non-terminal definition must be followed by '::=' to indicate the start of the right-hand side;",
  };
}

Diagnostic make_invalid_rule(int line, std::string message) {
  return Diagnostic{line, DiagnosticCode::InvalidRule, std::move(message),
                    invalid_rule_hints()};
}

Diagnostic make_lack_of_alternatives(int line) {
  return Diagnostic{
      line, DiagnosticCode::LackOfAlternatives,
      "Lack of alternatives on the right-hand side.",
      {"This error is likely due to the reason that the right-hand side is not defined after '::='."}};
}

Diagnostic make_empty_alternative(int line) {
  return Diagnostic{
      line, DiagnosticCode::LackOfAlternatives,
      "Empty alternative next to a '|' separator.",
      {"Every '|' MUST separate two sentential forms;",
       "Write \"\" (an empty terminal) if an epsilon alternative is intended;"}};
}

Diagnostic make_unterminated_terminal(int line) {
  return Diagnostic{
      line, DiagnosticCode::UnterminatedTerminal,
      "Unterminated terminal literal.",
      {"Each terminal symbol MUST be quoted with double quotes, e.g. \"a\";",
       "Do NOT escape double quotes in terminal symbols; a double quote always closes the terminal;"}};
}

Diagnostic make_unsupported(int line, std::string what) {
  return Diagnostic{
      line, DiagnosticCode::UnsupportedSymbol,
      "Unsupported symbol " + what + ".",
      {"Only the standard BNF notation is supported;",
       "Quantifiers like '*', '+', '?' and character classes like '[a-z]' are NOT standard BNF; expand them into explicit production rules;"}};
}

Diagnostic make_misplaced_bracket(int line, std::string what) {
  return Diagnostic{
      line, DiagnosticCode::MisplacedBracket,
      "Misplaced bracket " + what + ".",
      {"Round and square brackets cannot group symbols in standard BNF;",
       "Angle brackets may only wrap a single non-terminal name, e.g. <expr>;"}};
}

Diagnostic make_unwrapped(int line, std::string word) {
  return Diagnostic{
      line, DiagnosticCode::UnwrappedNonTerminal,
      "Bare symbol '" + word + "' is neither a quoted terminal nor a bracketed non-terminal.",
      {"A non-terminal symbol MUST be in angle brackets, e.g. <non-terminal>;",
       "A terminal symbol MUST be quoted with double quotes, e.g. \"" + word + "\";"}};
}

Diagnostic make_missing_operator(int line) {
  return Diagnostic{
      line, DiagnosticCode::MissingDefinitionOperator,
      "Missing '::=' after the non-terminal definition.",
      {"A non-terminal definition must be followed by '::=' to indicate the start of the right-hand side;"}};
}

Diagnostic make_missing_separator(int line) {
  return Diagnostic{
      line, DiagnosticCode::MissingAlternativeSeparator,
      "Sentential form continues without a '|' separator.",
      {"Alternatives MUST be separated by '|';",
       "A continuation line MUST start with '|';"}};
}

// Looks like a character class interior: [a-z], [0-9A-F], [abc], ...
bool looks_like_char_class(std::string_view interior) {
  if (interior.empty()) return false;
  bool has_dash = false;
  for (char c : interior) {
    if (c == '-') {
      has_dash = true;
      continue;
    }
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '^' && c != '_') return false;
  }
  return has_dash || interior.size() <= 8;
}

struct PendingRuleSet {
  std::string lhs;
  std::vector<SententialForm> alternatives;
  int line = 1;
};

class LineParser {
public:
  LineParser(std::string_view segment, int line, std::vector<Diagnostic>& diags)
      : seg_(segment), line_(line), diags_(&diags) {}

  // Parses a '|'-separated alternative list. Returns the alternatives; on any
  // diagnostic the line's content is discarded by the caller.
  std::vector<SententialForm> parse_alternatives() {
    std::vector<SententialForm> alternatives;
    SententialForm current;
    bool current_has_tokens = false;
    bool saw_anything = false;

    auto flush = [&](bool at_separator) {
      if (!current_has_tokens) {
        if (at_separator || saw_anything) diags_->push_back(make_empty_alternative(line_));
        else diags_->push_back(make_lack_of_alternatives(line_));
        return;
      }
      alternatives.push_back(std::move(current));
      current.clear();
      current_has_tokens = false;
    };

    while (pos_ < seg_.size()) {
      char c = seg_[pos_];
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      saw_anything = true;
      if (c == '|') {
        flush(true);
        ++pos_;
        continue;
      }
      if (c == '"') {
        std::size_t close = seg_.find('"', pos_ + 1);
        if (close == std::string_view::npos) {
          diags_->push_back(make_unterminated_terminal(line_));
          return {};
        }
        std::string literal(seg_.substr(pos_ + 1, close - pos_ - 1));
        // An empty terminal is the identity; it only marks an epsilon
        // alternative. Keep the token count so `""` alone yields epsilon.
        if (!literal.empty()) current.push_back(Symbol::terminal(std::move(literal)));
        current_has_tokens = true;
        pos_ = close + 1;
        continue;
      }
      if (c == '<') {
        std::size_t close = seg_.find('>', pos_ + 1);
        if (close == std::string_view::npos) {
          diags_->push_back(make_misplaced_bracket(line_, "'<' with no closing '>'"));
          return {};
        }
        std::string name(seg_.substr(pos_ + 1, close - pos_ - 1));
        if (name.empty() || name.find('<') != std::string::npos) {
          diags_->push_back(make_misplaced_bracket(line_, "'<>' with no non-terminal name"));
          return {};
        }
        current.push_back(Symbol::nonterminal(std::move(name)));
        current_has_tokens = true;
        pos_ = close + 1;
        continue;
      }
      if (c == '*' || c == '+' || c == '?') {
        diags_->push_back(make_unsupported(line_, std::string("'") + c + "' (quantifier)"));
        return {};
      }
      if (c == '{' || c == '}') {
        diags_->push_back(make_unsupported(line_, std::string("'") + c + "' (EBNF repetition)"));
        return {};
      }
      if (c == '[') {
        std::size_t close = seg_.find(']', pos_ + 1);
        if (close != std::string_view::npos &&
            looks_like_char_class(seg_.substr(pos_ + 1, close - pos_ - 1))) {
          diags_->push_back(make_unsupported(
              line_, "'[" + std::string(seg_.substr(pos_ + 1, close - pos_ - 1)) + "]' (character class)"));
        } else {
          diags_->push_back(make_misplaced_bracket(line_, "'['"));
        }
        return {};
      }
      if (c == ']' || c == '(' || c == ')' || c == '>') {
        diags_->push_back(make_misplaced_bracket(line_, std::string("'") + c + "'"));
        return {};
      }
      if (seg_.substr(pos_).starts_with("::=")) {
        diags_->push_back(make_invalid_rule(
            line_, "Unexpected second '::=' on the same line; each rule MUST start on a new line."));
        return {};
      }
      // Bare word: neither quoted nor bracketed.
      std::size_t end = pos_;
      while (end < seg_.size() && !is_space(seg_[end]) &&
             std::string_view("<>\"|*+?[](){}").find(seg_[end]) == std::string_view::npos) {
        ++end;
      }
      diags_->push_back(make_unwrapped(line_, std::string(seg_.substr(pos_, end - pos_))));
      return {};
    }

    flush(false);
    return alternatives;
  }

private:
  std::string_view seg_;
  std::size_t pos_ = 0;
  int line_;
  std::vector<Diagnostic>* diags_;
};

} // namespace

std::string_view to_string(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::InvalidRule: return "invalid_rule";
    case DiagnosticCode::MissingDefinitionOperator: return "missing_definition_operator";
    case DiagnosticCode::LackOfAlternatives: return "lack_of_alternatives";
    case DiagnosticCode::UnterminatedTerminal: return "unterminated_terminal";
    case DiagnosticCode::UnsupportedSymbol: return "unsupported_symbol";
    case DiagnosticCode::UnwrappedNonTerminal: return "unwrapped_non_terminal";
    case DiagnosticCode::MisplacedBracket: return "misplaced_bracket";
    case DiagnosticCode::MissingAlternativeSeparator: return "missing_alternative_separator";
  }
  return "unknown";
}

std::string Diagnostic::render() const {
  std::string out = "Line " + std::to_string(line) + ": " + message;
  for (const std::string& hint : hints) {
    out += '\n';
    out += hint;
  }
  return out;
}

std::string render_feedback(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (std::size_t i = 0; i < diagnostics.size(); ++i) {
    if (i > 0) out += '\n';
    out += diagnostics[i].render();
  }
  return out;
}

ParseResult parse_bnf(std::string_view text) {
  ParseResult result;
  std::vector<Diagnostic>& diags = result.diagnostics;
  std::vector<PendingRuleSet> pending;

  int line_no = 0;
  std::size_t offset = 0;
  while (offset <= text.size()) {
    std::size_t newline = text.find('\n', offset);
    std::string_view line = (newline == std::string_view::npos)
                                ? text.substr(offset)
                                : text.substr(offset, newline - offset);
    offset = (newline == std::string_view::npos) ? text.size() + 1 : newline + 1;
    ++line_no;
    if (newline == std::string_view::npos && line.empty() && line_no > 1) break;

    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue; // blank line
    std::string_view body = line.substr(first);

    if (body.front() == '|') {
      // Continuation of the previous rule set's alternative list.
      if (pending.empty()) {
        diags.push_back(make_invalid_rule(
            line_no, "A continuation line appears before any rule definition."));
        continue;
      }
      LineParser parser(body.substr(1), line_no, diags);
      std::size_t before = diags.size();
      auto alts = parser.parse_alternatives();
      if (diags.size() == before) {
        for (SententialForm& alt : alts) pending.back().alternatives.push_back(std::move(alt));
      }
      continue;
    }

    if (body.front() == '<') {
      std::size_t close = body.find('>');
      if (close == std::string_view::npos) {
        diags.push_back(make_misplaced_bracket(line_no, "'<' with no closing '>'"));
        continue;
      }
      std::string name(body.substr(1, close - 1));
      if (name.empty() || name.find('<') != std::string::npos) {
        diags.push_back(make_misplaced_bracket(line_no, "'<>' with no non-terminal name"));
        continue;
      }
      std::size_t rest = close + 1;
      while (rest < body.size() && is_space(body[rest])) ++rest;
      if (!body.substr(rest).starts_with("::=")) {
        diags.push_back(make_missing_operator(line_no));
        continue;
      }
      LineParser parser(body.substr(rest + 3), line_no, diags);
      std::size_t before = diags.size();
      auto alts = parser.parse_alternatives();
      if (diags.size() == before) {
        pending.push_back(PendingRuleSet{std::move(name), std::move(alts), line_no});
      }
      continue;
    }

    if (body.front() == '"') {
      // A sentential form with no rule head: most likely a continuation that
      // lost its '|' separator.
      if (!pending.empty()) diags.push_back(make_missing_separator(line_no));
      else diags.push_back(make_invalid_rule(line_no, "A rule must begin with a non-terminal definition."));
      continue;
    }

    if (body.find("::=") != std::string_view::npos) {
      std::size_t end = 0;
      while (end < body.size() && !is_space(body[end]) && body[end] != ':') ++end;
      if (end == 0) {
        diags.push_back(make_invalid_rule(line_no, "A rule must begin with a non-terminal definition."));
        continue;
      }
      diags.push_back(Diagnostic{
          line_no, DiagnosticCode::UnwrappedNonTerminal,
          "Left-hand side '" + std::string(body.substr(0, end)) + "' is not wrapped in angle brackets.",
          {"A non-terminal symbol MUST be in angle brackets, e.g. <non-terminal>;"}});
      continue;
    }

    diags.push_back(make_invalid_rule(line_no, "The line is not a production rule."));
  }

  if (pending.empty() && diags.empty()) {
    diags.push_back(make_invalid_rule(1, "The input contains no production rules."));
  }
  if (!diags.empty()) return result;

  Grammar g;
  std::vector<int> lines;
  std::unordered_map<std::string, std::size_t> index_of;
  for (PendingRuleSet& rs : pending) {
    auto it = index_of.find(rs.lhs);
    if (it == index_of.end()) {
      index_of.emplace(rs.lhs, g.rule_sets.size());
      g.rule_sets.push_back(RuleSet{std::move(rs.lhs), std::move(rs.alternatives)});
      lines.push_back(rs.line);
      continue;
    }
    RuleSet& target = g.rule_sets[it->second];
    for (SententialForm& alt : rs.alternatives) {
      bool duplicate = std::find(target.alternatives.begin(), target.alternatives.end(),
                                 alt) != target.alternatives.end();
      if (!duplicate) target.alternatives.push_back(std::move(alt));
    }
  }
  g.start = g.rule_sets.front().lhs;
  result.grammar = std::move(g);
  result.rule_set_lines = std::move(lines);
  return result;
}

std::string print_bnf(const Grammar& g) {
  std::string out;
  for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
    const RuleSet& rs = g.rule_sets[r];
    if (r > 0) out += '\n';
    out += '<';
    out += rs.lhs;
    out += "> ::= ";
    for (std::size_t a = 0; a < rs.alternatives.size(); ++a) {
      if (a > 0) out += " | ";
      const SententialForm& alt = rs.alternatives[a];
      if (alt.empty()) {
        out += "\"\"";
        continue;
      }
      for (std::size_t s = 0; s < alt.size(); ++s) {
        if (s > 0) out += ' ';
        const Symbol& sym = alt[s];
        if (sym.is_terminal()) {
          out += '"';
          out += sym.text;
          out += '"';
        } else {
          out += '<';
          out += sym.text;
          out += '>';
        }
      }
    }
  }
  return out;
}

FenceExtraction extract_fenced_grammar(std::string_view llm_response) {
  FenceExtraction out;
  std::size_t open = llm_response.find("```");
  if (open == std::string_view::npos) {
    out.text = std::string(trim_view(llm_response));
    return out;
  }
  out.fenced = true;
  std::size_t start = open + 3;
  std::size_t close = llm_response.find("```", start);
  std::string_view interior = (close == std::string_view::npos)
                                  ? llm_response.substr(start)
                                  : llm_response.substr(start, close - start);
  // Drop a language tag such as "bnf" on the fence's first line.
  std::size_t nl = interior.find('\n');
  if (nl != std::string_view::npos) {
    std::string_view tag = trim_view(interior.substr(0, nl));
    bool all_alpha = !tag.empty() && tag.size() <= 10 &&
                     std::all_of(tag.begin(), tag.end(), [](char c) {
                       return std::isalpha(static_cast<unsigned char>(c));
                     });
    if (all_alpha) interior = interior.substr(nl + 1);
  }
  out.text = std::string(trim_view(interior));
  out.empty_fence = out.text.empty();
  return out;
}

std::vector<Diagnostic> invalidity_diagnostics(const Grammar& g,
                                               const std::vector<int>& rule_set_lines) {
  std::vector<Diagnostic> diags;
  std::unordered_set<std::string_view> defined;
  for (const RuleSet& rs : g.rule_sets) defined.insert(rs.lhs);

  std::unordered_set<std::string> reported;
  for (std::size_t r = 0; r < g.rule_sets.size(); ++r) {
    int line = r < rule_set_lines.size() ? rule_set_lines[r] : 1;
    for (const SententialForm& alt : g.rule_sets[r].alternatives) {
      for (const Symbol& sym : alt) {
        if (!sym.is_nonterminal() || defined.contains(sym.text)) continue;
        if (!reported.insert(sym.text).second) continue;
        diags.push_back(Diagnostic{
            line, DiagnosticCode::LackOfAlternatives,
            "Non-terminal <" + sym.text + "> is used but has no production rule.",
            {"Every non-terminal symbol MUST have at least one rule in its corresponding rule set;",
             "Add a rule like <" + sym.text + "> ::= ... or remove the reference;"}});
      }
    }
  }
  if (!g.rule_sets.empty() && !defined.contains(g.start)) {
    diags.push_back(Diagnostic{
        1, DiagnosticCode::LackOfAlternatives,
        "Start symbol <" + g.start + "> has no production rule.",
        {"The entry point MUST be the non-terminal symbol in the first production rule;"}});
  }
  return diags;
}

} // namespace graminfer
