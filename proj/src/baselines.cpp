#include "graminfer/baselines.hpp"

namespace graminfer {

namespace {

Candidate scored_from_completion(const Completion& completion,
                                 const std::vector<std::string>& positives,
                                 const std::vector<std::string>& negatives,
                                 const RecognizerLimits& limits) {
  if (!completion.ok()) {
    Candidate c;
    c.fitness = -1;
    c.gateway_error = completion.error;
    return c;
  }
  FenceExtraction extracted = extract_fenced_grammar(completion.text);
  return make_candidate(std::move(extracted.text), positives, negatives, limits);
}

} // namespace

BaselineResult run_dp(const std::vector<std::string>& positives,
                      const std::vector<std::string>& negatives, Gateway& gateway,
                      const DpConfig& config, const RecognizerLimits& limits) {
  BaselineResult result;

  ChatRequest request;
  request.prompt = render_dp_prompt(positives, negatives);
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.model_id = config.model_id;

  Completion completion = gateway.complete(request, "dp");
  result.candidate = scored_from_completion(completion, positives, negatives, limits);
  result.log.add(LogEntry{0, 0, Operator::Dp, result.candidate.fitness,
                          result.candidate.source_text, result.candidate.gateway_error});
  result.llm_calls = 1;
  return result;
}

BaselineResult run_opf(const std::vector<std::string>& positives,
                       const std::vector<std::string>& negatives, const OpfConfig& config,
                       Gateway& gateway, const RecognizerLimits& limits) {
  BaselineResult result;

  ChatRequest request;
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.model_id = config.model_id;

  Candidate current;
  bool have_candidate = false;
  std::vector<Diagnostic> feedback;

  for (int turn = 1; turn <= config.max_turns; ++turn) {
    std::string_view template_id;
    if (turn == 1) {
      request.prompt = render_dp_prompt(positives, negatives);
      template_id = "dp";
    } else {
      request.prompt = render_opf_feedback_prompt(positives, negatives,
                                                  current.source_text, feedback);
      template_id = "opf_feedback";
    }

    Completion completion = gateway.complete(request, template_id);
    ++result.llm_calls;
    if (!completion.ok()) {
      // Keep the best candidate seen so far; an error candidate only when the
      // very first call already failed.
      if (!have_candidate) {
        current.fitness = -1;
        current.gateway_error = completion.error;
        result.log.add(LogEntry{0, turn - 1, turn == 1 ? Operator::Dp : Operator::OpfFeedback,
                                -1, "", completion.error});
      }
      break;
    }

    FenceExtraction extracted = extract_fenced_grammar(completion.text);
    ParseResult parsed = parse_bnf(extracted.text);

    current = Candidate{};
    current.source_text = std::move(extracted.text);
    have_candidate = true;

    bool valid = false;
    if (!parsed.ok()) {
      feedback = parsed.diagnostics;
      current.diagnostics = std::move(parsed.diagnostics);
    } else {
      feedback = invalidity_diagnostics(*parsed.grammar, parsed.rule_set_lines);
      current.grammar = std::move(parsed.grammar);
      valid = feedback.empty();
      if (!valid) current.diagnostics = feedback;
    }
    current.fitness = current.grammar.has_value()
                          ? fitness_of(*current.grammar, positives, negatives, limits)
                          : -1;

    result.log.add(LogEntry{0, turn - 1, turn == 1 ? Operator::Dp : Operator::OpfFeedback,
                            current.fitness, current.source_text, ""});
    if (valid) break; // the stop condition is syntactic validity
  }

  result.candidate = std::move(current);
  return result;
}

} // namespace graminfer
