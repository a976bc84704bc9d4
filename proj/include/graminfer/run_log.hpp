#ifndef GRAMINFER_RUN_LOG_HPP
#define GRAMINFER_RUN_LOG_HPP

#include <string>
#include <string_view>
#include <vector>

namespace graminfer {

/// Which step produced a candidate.
enum class Operator {
  Init,
  Crossover,
  LocalMutation,
  LlmMutation,
  ParentPassthrough,
  Dp,
  OpfFeedback,
};

std::string_view to_string(Operator op);

/// One candidate event of a run, serialized as a line-delimited record
/// stream: {generation, slot, operator, fitness, grammar_text} plus an error
/// field when a gateway call failed.
struct LogEntry {
  int generation = 0;
  int slot = 0;
  Operator op = Operator::Init;
  int fitness = -1;
  std::string grammar_text;
  std::string error; // empty unless the producing gateway call failed
};

struct RunLog {
  std::vector<LogEntry> entries;

  void add(LogEntry entry) { entries.push_back(std::move(entry)); }
  std::string to_jsonl() const;
};

} // namespace graminfer

#endif
