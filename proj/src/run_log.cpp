#include "graminfer/run_log.hpp"

#include "json.hpp"

namespace graminfer {

std::string_view to_string(Operator op) {
  switch (op) {
    case Operator::Init: return "init";
    case Operator::Crossover: return "crossover";
    case Operator::LocalMutation: return "local_mutation";
    case Operator::LlmMutation: return "llm_mutation";
    case Operator::ParentPassthrough: return "parent_passthrough";
    case Operator::Dp: return "dp";
    case Operator::OpfFeedback: return "opf_feedback";
  }
  return "unknown";
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const LogEntry& e : entries) {
    nlohmann::json record = {
        {"generation", e.generation},
        {"slot", e.slot},
        {"operator", std::string(to_string(e.op))},
        {"fitness", e.fitness},
        {"grammar_text", e.grammar_text},
    };
    if (!e.error.empty()) record["error"] = e.error;
    out += record.dump();
    out += '\n';
  }
  return out;
}

} // namespace graminfer
