#ifndef GRAMINFER_EVOLUTION_HPP
#define GRAMINFER_EVOLUTION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graminfer/bnf_text.hpp"
#include "graminfer/grammar.hpp"
#include "graminfer/llm_gateway.hpp"
#include "graminfer/recognizer.hpp"
#include "graminfer/rng.hpp"
#include "graminfer/run_log.hpp"

namespace graminfer {

struct GaConfig {
  int population_size = 10;     // k
  int generations = 5;          // g
  double crossover_rate = 0.7;  // rho
  double mutation_rate = 0.3;   // mu
  double space_insert_prob = 0.1;
  double local_vs_llm_prob = 0.5;
  int max_fitness = 6;          // |P| + |N|; recomputed per run
  std::uint64_t rng_seed = 0;
  double llm_temperature = 0.7;
  int llm_max_tokens = 2000;
  std::string llm_model_id;
};

/// A scored member of the population. fitness is -1 exactly when the text
/// failed to parse or the grammar is not valid.
struct Candidate {
  std::string source_text;
  std::optional<Grammar> grammar;
  int fitness = -1;
  std::vector<Diagnostic> diagnostics; // parse diagnostics when parsing failed
  std::string gateway_error;           // non-empty when the producing call failed
};

/// Score of a grammar text: -1 for anything that does not parse into a valid
/// grammar, otherwise accepted positives plus rejected negatives. A
/// recognizer cap hit counts the string as rejected.
int fitness(std::string_view candidate_text, const std::vector<std::string>& positives,
            const std::vector<std::string>& negatives, const RecognizerLimits& limits = {});

/// Same scoring applied to an already-built grammar value.
int fitness_of(const Grammar& g, const std::vector<std::string>& positives,
               const std::vector<std::string>& negatives, const RecognizerLimits& limits = {});

/// Builds a scored Candidate from grammar text (parse, validate, score).
Candidate make_candidate(std::string source_text, const std::vector<std::string>& positives,
                         const std::vector<std::string>& negatives,
                         const RecognizerLimits& limits = {});

/// The floor(k/2) highest-fitness candidates in decreasing fitness order,
/// ties broken by lower population index.
std::vector<Candidate> select(const std::vector<Candidate>& population);

/// The splice at point w (1-based): the first w-1 rule sets of a followed by
/// rule sets w.. of b, start symbol taken from a, then lhs-merge
/// normalization. Requires 1 <= w <= min(|R_a|, |R_b|).
Grammar splice_rule_sets(const Grammar& a, const Grammar& b, std::size_t w);

struct CrossoverOutcome {
  Grammar grammar;
  bool passthrough = false; // a parent was returned unchanged
};

/// Empty-handling first (both empty: uniform pick; one empty: the other),
/// then the rho coin decides between the splice and returning one parent
/// uniformly at random. Candidates without a parsed grammar count as empty.
CrossoverOutcome crossover(const Candidate& a, const Candidate& b, double rho, Rng& rng);

/// Uniformly permutes the symbols of every alternative in rule set
/// rule_set_index (0-based). Throws std::out_of_range for a bad index.
Grammar shuffle_rule_set(Grammar g, std::size_t rule_set_index, Rng& rng);

/// For each alternative of rule set rule_set_index, independently with
/// probability p: draws an insertion count uniform on 0..|alt| and inserts
/// that many single-space terminals, each before or after a uniformly chosen
/// symbol. Throws std::out_of_range for a bad index.
Grammar space_insert(Grammar g, std::size_t rule_set_index, double p, Rng& rng);

struct MutationResult {
  Candidate candidate;
  Operator op = Operator::LlmMutation;
};

/// Grammars without rule sets always take the LLM path; otherwise a fair
/// coin picks local mutation (shuffle then space insertion on one uniformly
/// chosen rule set) or the LLM mutation prompt. Gateway failures come back
/// as a fitness -1 candidate carrying the error; the caller's loop continues.
MutationResult mutate(const Grammar& g, const std::vector<std::string>& positives,
                      const std::vector<std::string>& negatives, const GaConfig& config,
                      Rng& rng, Gateway& gateway, const RecognizerLimits& limits = {});

struct HygenarResult {
  Candidate best;
  RunLog log;
  int generations_built = 0; // init counts as generation 0
  std::size_t llm_calls = 0;
};

/// The full generational loop: an LLM-initialized population with early exit
/// on a perfect score, then per generation scoring, best tracking,
/// top-half selection and crossover/mutation refill. Deterministic given the
/// seed and a scripted gateway.
HygenarResult run_hygenar(const std::vector<std::string>& positives,
                          const std::vector<std::string>& negatives, const GaConfig& config,
                          Gateway& gateway, const RecognizerLimits& limits = {});

} // namespace graminfer

#endif
