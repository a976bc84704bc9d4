#include "graminfer/challenge_store.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

#include "graminfer/bnf_text.hpp"

namespace graminfer {

using nlohmann::json;

namespace {

bool disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  for (const std::string& s : b) {
    if (sa.contains(s)) return false;
  }
  return true;
}

std::vector<std::string> string_list(const json& value) {
  std::vector<std::string> out;
  for (const auto& item : value) out.push_back(item.get<std::string>());
  return out;
}

} // namespace

LoadResult load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  LoadResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](std::string message) {
      result.errors.push_back(LoadError{line_no, std::move(message)});
    };

    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      fail("record is not a JSON object");
      continue;
    }
    if (!record.contains("id") || !record["id"].is_string()) {
      fail("missing string field 'id'");
      continue;
    }
    Challenge c;
    c.id = record["id"].get<std::string>();
    if (c.id.empty()) {
      fail("field 'id' is empty");
      continue;
    }
    if (!seen_ids.insert(c.id).second) {
      fail("duplicate id '" + c.id + "'");
      continue;
    }
    if (!record.contains("k") || !record["k"].is_number_integer()) {
      fail("record '" + c.id + "': missing integer field 'k'");
      continue;
    }
    c.declared_nonterminals = record["k"].get<int>();
    if (c.declared_nonterminals < 1 || c.declared_nonterminals > 9) {
      fail("record '" + c.id + "': k must be in 1..9");
      continue;
    }
    if (!record.contains("grammar") || !record["grammar"].is_string()) {
      fail("record '" + c.id + "': missing string field 'grammar'");
      continue;
    }
    c.grammar_text = record["grammar"].get<std::string>();

    bool fields_ok = true;
    for (const char* side : {"positives", "negatives"}) {
      if (!record.contains(side) || !record[side].is_array() ||
          record[side].size() != kExamplesPerSide ||
          !std::all_of(record[side].begin(), record[side].end(),
                       [](const json& v) { return v.is_string(); })) {
        fail("record '" + c.id + "': field '" + side + "' must be an array of exactly " +
             std::to_string(kExamplesPerSide) + " strings");
        fields_ok = false;
      }
    }
    if (!fields_ok) continue;
    c.positives = string_list(record["positives"]);
    c.negatives = string_list(record["negatives"]);
    if (!disjoint(c.positives, c.negatives)) {
      fail("record '" + c.id + "': positives and negatives overlap");
      continue;
    }
    result.challenges.push_back(std::move(c));
  }
  return result;
}

std::string dataset_to_jsonl(const std::vector<Challenge>& challenges) {
  std::string out;
  for (const Challenge& c : challenges) {
    json record = {
        {"id", c.id},
        {"k", c.declared_nonterminals},
        {"grammar", c.grammar_text},
        {"positives", c.positives},
        {"negatives", c.negatives},
    };
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<Challenge>& challenges) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << dataset_to_jsonl(challenges);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::InvalidReference: return "invalid_reference";
    case ViolationKind::PositiveRejected: return "positive_rejected";
    case ViolationKind::NegativeAccepted: return "negative_accepted";
    case ViolationKind::NonterminalMismatch: return "nonterminal_mismatch";
  }
  return "unknown";
}

std::string ValidationReport::render() const {
  if (violations.empty()) return "dataset is clean\n";
  std::string out;
  for (const Violation& v : violations) {
    out += "challenge ";
    out += v.challenge_id;
    out += ": ";
    out += to_string(v.kind);
    out += ": ";
    out += v.detail;
    out += '\n';
  }
  return out;
}

ValidationReport validate_dataset(const std::vector<Challenge>& challenges,
                                  const RecognizerLimits& limits) {
  ValidationReport report;
  for (const Challenge& c : challenges) {
    auto flag = [&](ViolationKind kind, std::string detail) {
      report.violations.push_back(Violation{c.id, kind, std::move(detail)});
    };

    ParseResult parsed = parse_bnf(c.grammar_text);
    if (!parsed.ok()) {
      std::string detail = "reference grammar does not parse";
      if (!parsed.diagnostics.empty()) {
        detail += ": " + parsed.diagnostics.front().message;
      }
      flag(ViolationKind::InvalidReference, std::move(detail));
      continue;
    }
    const Grammar& reference = *parsed.grammar;
    if (!is_valid(reference)) {
      flag(ViolationKind::InvalidReference, "reference grammar is not valid");
      continue;
    }
    if (static_cast<std::size_t>(c.declared_nonterminals) != nonterminal_count(reference)) {
      flag(ViolationKind::NonterminalMismatch,
           "declared k = " + std::to_string(c.declared_nonterminals) + " but |R| = " +
               std::to_string(nonterminal_count(reference)));
    }
    for (const std::string& p : c.positives) {
      Membership m = membership(reference, p, limits);
      if (m != Membership::Accepted) {
        std::string detail = "positive \"" + p + "\" is rejected by the reference";
        if (m == Membership::ResourceLimit) detail += " (resource limit hit)";
        flag(ViolationKind::PositiveRejected, std::move(detail));
      }
    }
    for (const std::string& n : c.negatives) {
      if (membership(reference, n, limits) == Membership::Accepted) {
        flag(ViolationKind::NegativeAccepted,
             "negative \"" + n + "\" is accepted by the reference");
      }
    }
  }
  return report;
}

std::string queue_to_jsonl(const std::vector<QueueItem>& queue) {
  std::string out;
  for (const QueueItem& item : queue) {
    json record = {
        {"item", item.item},
        {"violations", item.violations},
        {"raw_output", item.raw_output},
    };
    out += record.dump();
    out += '\n';
  }
  return out;
}

namespace {

// Blank-line separated blocks, per the dataset prompts' output contract.
std::vector<std::string> split_blocks(std::string_view text) {
  std::vector<std::string> blocks;
  std::string current;
  std::size_t offset = 0;
  auto flush = [&]() {
    if (!current.empty()) blocks.push_back(std::move(current));
    current.clear();
  };
  while (offset <= text.size()) {
    std::size_t newline = text.find('\n', offset);
    std::string_view line = (newline == std::string_view::npos)
                                ? text.substr(offset)
                                : text.substr(offset, newline - offset);
    offset = (newline == std::string_view::npos) ? text.size() + 1 : newline + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      flush();
      continue;
    }
    if (!current.empty()) current += '\n';
    current += line;
  }
  flush();
  return blocks;
}

struct GrammarCheck {
  bool ok = false;
  std::string canonical;
  std::vector<std::string> violations;
};

GrammarCheck check_reference_grammar(const std::string& text, int k) {
  GrammarCheck out;
  ParseResult parsed = parse_bnf(text);
  if (!parsed.ok()) {
    for (const Diagnostic& d : parsed.diagnostics) out.violations.push_back(d.render());
    return out;
  }
  if (!is_valid(*parsed.grammar)) {
    out.violations.push_back("grammar is not valid: a referenced non-terminal has no rule");
    return out;
  }
  if (nonterminal_count(*parsed.grammar) != static_cast<std::size_t>(k)) {
    out.violations.push_back("grammar has " + std::to_string(nonterminal_count(*parsed.grammar)) +
                             " rule sets, expected " + std::to_string(k));
    return out;
  }
  out.ok = true;
  out.canonical = print_bnf(*parsed.grammar);
  return out;
}

} // namespace

ConstructOutcome construct_dataset(const ConstructConfig& config, Gateway& gateway,
                                   const RecognizerLimits& limits) {
  ConstructOutcome outcome;
  std::unordered_set<std::string> seen_canonical;
  std::vector<std::pair<int, std::string>> accepted; // (k, canonical text)

  ChatRequest request;
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.model_id = config.model_id;

  for (int k = config.k_min; k <= config.k_max; ++k) {
    request.prompt = render_grammar_generation_prompt(k, config.grammars_per_k);
    Completion completion = gateway.complete(request, "dataset_grammars");
    if (!completion.ok()) {
      outcome.queue.push_back(QueueItem{
          "grammar generation for k=" + std::to_string(k), {completion.error}, ""});
      continue;
    }
    std::vector<std::string> blocks = split_blocks(completion.text);
    for (std::string& block : blocks) {
      ++outcome.grammars_attempted;
      GrammarCheck check = check_reference_grammar(block, k);
      if (check.ok && seen_canonical.contains(check.canonical)) {
        // One re-prompt for a duplicate, then the queue.
        request.prompt = render_grammar_generation_prompt(k, 1);
        Completion retry = gateway.complete(request, "dataset_grammars");
        if (!retry.ok()) {
          outcome.queue.push_back(QueueItem{block, {"duplicate grammar; re-prompt failed: " +
                                                    retry.error}, completion.text});
          continue;
        }
        std::vector<std::string> retry_blocks = split_blocks(retry.text);
        check = retry_blocks.empty() ? GrammarCheck{}
                                     : check_reference_grammar(retry_blocks.front(), k);
        if (!check.ok || seen_canonical.contains(check.canonical)) {
          outcome.queue.push_back(QueueItem{
              block, {"duplicate grammar; re-prompt did not yield a fresh valid grammar"},
              retry.text});
          continue;
        }
        block = retry_blocks.front();
      }
      if (!check.ok) {
        outcome.queue.push_back(QueueItem{block, check.violations, completion.text});
        continue;
      }
      seen_canonical.insert(check.canonical);
      accepted.emplace_back(k, check.canonical);
    }
  }

  for (std::size_t gi = 0; gi < accepted.size(); ++gi) {
    const auto& [k, canonical] = accepted[gi];
    for (int ci = 0; ci < config.challenges_per_grammar; ++ci) {
      ++outcome.challenges_attempted;
      Challenge challenge;
      challenge.id = "k" + std::to_string(k) + "-g" + std::to_string(gi) + "-c" +
                     std::to_string(ci);
      challenge.grammar_text = canonical;
      challenge.declared_nonterminals = k;

      request.prompt = render_positive_examples_prompt(config.examples_per_side, canonical);
      Completion pos = gateway.complete(request, "dataset_positives");
      request.prompt = render_negative_examples_prompt(config.examples_per_side, canonical);
      Completion neg = gateway.complete(request, "dataset_negatives");
      if (!pos.ok() || !neg.ok()) {
        outcome.queue.push_back(QueueItem{
            challenge.id, {pos.ok() ? neg.error : pos.error}, pos.text + "\n---\n" + neg.text});
        continue;
      }
      challenge.positives = split_blocks(pos.text);
      challenge.negatives = split_blocks(neg.text);
      const std::string raw = pos.text + "\n---\n" + neg.text;

      std::vector<std::string> violations;
      if (challenge.positives.size() != static_cast<std::size_t>(config.examples_per_side)) {
        violations.push_back("expected " + std::to_string(config.examples_per_side) +
                             " positive examples, got " +
                             std::to_string(challenge.positives.size()));
      }
      if (challenge.negatives.size() != static_cast<std::size_t>(config.examples_per_side)) {
        violations.push_back("expected " + std::to_string(config.examples_per_side) +
                             " negative examples, got " +
                             std::to_string(challenge.negatives.size()));
      }
      if (violations.empty()) {
        ValidationReport report = validate_dataset({challenge}, limits);
        for (const Violation& v : report.violations) {
          violations.push_back(std::string(to_string(v.kind)) + ": " + v.detail);
        }
      }
      if (!violations.empty()) {
        outcome.queue.push_back(QueueItem{challenge.id, std::move(violations), raw});
        continue;
      }
      outcome.draft.push_back(std::move(challenge));
    }
  }
  return outcome;
}

} // namespace graminfer
