#ifndef GRAMINFER_BASELINES_HPP
#define GRAMINFER_BASELINES_HPP

#include <string>
#include <vector>

#include "graminfer/evolution.hpp"
#include "graminfer/llm_gateway.hpp"
#include "graminfer/recognizer.hpp"
#include "graminfer/run_log.hpp"

namespace graminfer {

struct DpConfig {
  double temperature = 0.0;
  int max_tokens = 2000;
  std::string model_id;
};

struct OpfConfig {
  int max_turns = 5;
  double temperature = 0.3;
  int max_tokens = 2000;
  std::string model_id;
};

struct BaselineResult {
  Candidate candidate;
  RunLog log;
  std::size_t llm_calls = 0;
};

/// Direct prompting: one rendered prompt, one completion, fence extraction,
/// parse, score. Always exactly one gateway call.
BaselineResult run_dp(const std::vector<std::string>& positives,
                      const std::vector<std::string>& negatives, Gateway& gateway,
                      const DpConfig& config = {}, const RecognizerLimits& limits = {});

/// Parser-feedback refinement: the first turn uses the direct prompt, every
/// later turn re-sends the previous grammar with the parser's diagnostics.
/// Stops as soon as a turn produces a syntactically valid grammar (semantic
/// quality is not the stop condition) or after max_turns. Gateway errors end
/// the loop with the best candidate so far.
BaselineResult run_opf(const std::vector<std::string>& positives,
                       const std::vector<std::string>& negatives, const OpfConfig& config,
                       Gateway& gateway, const RecognizerLimits& limits = {});

} // namespace graminfer

#endif
