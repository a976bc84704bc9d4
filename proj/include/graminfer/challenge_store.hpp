#ifndef GRAMINFER_CHALLENGE_STORE_HPP
#define GRAMINFER_CHALLENGE_STORE_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "graminfer/grammar.hpp"
#include "graminfer/llm_gateway.hpp"
#include "graminfer/recognizer.hpp"

namespace graminfer {

/// One dataset entry: a reference grammar with three positive and three
/// negative example strings, plus the declared non-terminal count bucket.
struct Challenge {
  std::string id;
  std::string grammar_text; // canonical BNF, one rule set per line
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  int declared_nonterminals = 0;
};

constexpr std::size_t kExamplesPerSide = 3;

struct LoadError {
  std::size_t record = 0; // 1-based line number in the dataset file
  std::string message;
};

struct LoadResult {
  std::vector<Challenge> challenges;
  std::vector<LoadError> errors;

  bool ok() const { return errors.empty(); }
};

/// Reads the line-delimited dataset format: one JSON object per line with
/// fields {id, k, grammar, positives[3], negatives[3]}. Structural checks
/// only (presence, counts, duplicate ids, disjoint example sets); semantic
/// validation is validate_dataset. Malformed records are reported, never
/// skipped silently. Throws std::runtime_error when the file cannot be read.
LoadResult load_dataset(const std::string& path);

/// Serializes challenges into the same format.
void save_dataset(const std::string& path, const std::vector<Challenge>& challenges);
std::string dataset_to_jsonl(const std::vector<Challenge>& challenges);

enum class ViolationKind {
  InvalidReference,       // reference fails to parse or is not valid
  PositiveRejected,       // a positive example is outside the language
  NegativeAccepted,       // a negative example is inside the language
  NonterminalMismatch,    // declared k differs from the parsed |R|
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::string challenge_id;
  ViolationKind kind = ViolationKind::InvalidReference;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool clean() const { return violations.empty(); }
  std::string render() const;
};

/// Checks every challenge: the reference parses and is valid, every positive
/// is accepted, every negative rejected, and the declared non-terminal count
/// matches the parsed grammar. Deterministic and pure.
ValidationReport validate_dataset(const std::vector<Challenge>& challenges,
                                  const RecognizerLimits& limits = {});

/// LLM-assisted dataset construction.
struct ConstructConfig {
  int k_min = 1;
  int k_max = 9;
  int grammars_per_k = 10;
  int challenges_per_grammar = 6;
  int examples_per_side = 3;
  double temperature = 0.7;
  int max_tokens = 2000;
  std::string model_id;
};

/// An item the machine checks rejected; humans correct these out of band.
struct QueueItem {
  std::string item;                  // grammar text or challenge id
  std::vector<std::string> violations;
  std::string raw_output;            // the LLM response that produced it
};

struct ConstructOutcome {
  std::vector<Challenge> draft;      // every entry passes validate_dataset
  std::vector<QueueItem> queue;
  std::size_t grammars_attempted = 0;
  std::size_t challenges_attempted = 0;
};

std::string queue_to_jsonl(const std::vector<QueueItem>& queue);

/// Runs the grammar-generation prompt per k, then the positive/negative
/// example prompts per accepted grammar; machine-checks everything and
/// splits the output into a draft dataset and a correction queue. Duplicate
/// grammars (canonical-text equality) get one re-prompt before queueing.
/// Gateway errors are recorded per item and the pipeline continues.
ConstructOutcome construct_dataset(const ConstructConfig& config, Gateway& gateway,
                                   const RecognizerLimits& limits = {});

} // namespace graminfer

#endif
