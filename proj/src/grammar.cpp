#include "graminfer/grammar.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace graminfer {

const RuleSet* Grammar::find_rule_set(std::string_view lhs) const {
  for (const RuleSet& rs : rule_sets) {
    if (rs.lhs == lhs) return &rs;
  }
  return nullptr;
}

bool is_valid(const Grammar& g) {
  if (g.rule_sets.empty()) return false;

  std::unordered_set<std::string_view> defined;
  for (const RuleSet& rs : g.rule_sets) {
    if (rs.alternatives.empty()) return false;
    defined.insert(rs.lhs);
  }
  if (!defined.contains(g.start)) return false;

  for (const RuleSet& rs : g.rule_sets) {
    for (const SententialForm& alt : rs.alternatives) {
      for (const Symbol& sym : alt) {
        if (sym.is_nonterminal() && !defined.contains(sym.text)) return false;
      }
    }
  }
  return true;
}

std::size_t nonterminal_count(const Grammar& g) { return g.rule_sets.size(); }

std::size_t production_count(const Grammar& g) {
  std::size_t n = 0;
  for (const RuleSet& rs : g.rule_sets) n += rs.alternatives.size();
  return n;
}

std::set<std::string> nonterminal_names(const Grammar& g) {
  std::set<std::string> names;
  for (const RuleSet& rs : g.rule_sets) {
    names.insert(rs.lhs);
    for (const SententialForm& alt : rs.alternatives) {
      for (const Symbol& sym : alt) {
        if (sym.is_nonterminal()) names.insert(sym.text);
      }
    }
  }
  return names;
}

std::set<std::string> terminal_literals(const Grammar& g) {
  std::set<std::string> literals;
  for (const RuleSet& rs : g.rule_sets) {
    for (const SententialForm& alt : rs.alternatives) {
      for (const Symbol& sym : alt) {
        if (sym.is_terminal()) literals.insert(sym.text);
      }
    }
  }
  return literals;
}

std::vector<Production> productions(const Grammar& g) {
  std::vector<Production> out;
  for (const RuleSet& rs : g.rule_sets) {
    for (const SententialForm& alt : rs.alternatives) {
      out.push_back(Production{rs.lhs, alt});
    }
  }
  return out;
}

Grammar normalized(Grammar g) {
  bool has_dup = false;
  {
    std::unordered_set<std::string_view> seen;
    for (const RuleSet& rs : g.rule_sets) {
      if (!seen.insert(rs.lhs).second) {
        has_dup = true;
        break;
      }
    }
  }
  if (!has_dup) return g;

  std::vector<RuleSet> merged;
  std::unordered_map<std::string, std::size_t> index_of;
  for (RuleSet& rs : g.rule_sets) {
    auto it = index_of.find(rs.lhs);
    if (it == index_of.end()) {
      index_of.emplace(rs.lhs, merged.size());
      merged.push_back(std::move(rs));
      continue;
    }
    RuleSet& target = merged[it->second];
    for (SententialForm& alt : rs.alternatives) {
      bool duplicate = std::find(target.alternatives.begin(),
                                 target.alternatives.end(),
                                 alt) != target.alternatives.end();
      if (!duplicate) target.alternatives.push_back(std::move(alt));
    }
  }
  g.rule_sets = std::move(merged);
  return g;
}

} // namespace graminfer
