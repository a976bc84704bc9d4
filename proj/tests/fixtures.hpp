#ifndef GRAMINFER_TESTS_FIXTURES_HPP
#define GRAMINFER_TESTS_FIXTURES_HPP

// Shared fixtures: the function-call grammar and its overfit counterpart
// used across the metric and search tests, plus small test helpers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <unistd.h>
#include <vector>

#include "graminfer/bnf_text.hpp"
#include "graminfer/grammar.hpp"
#include "graminfer/llm_gateway.hpp"

namespace fixtures {

/// Function-call grammar: <func>(<args>) with letter names and single
/// letter-or-digit arguments.
inline std::string funcall_grammar_text() {
  std::string char_alts;
  for (char c = 'a'; c <= 'z'; ++c) {
    if (!char_alts.empty()) char_alts += " | ";
    char_alts += std::string("\"") + c + "\"";
  }
  std::string digit_alts;
  for (char c = '0'; c <= '9'; ++c) {
    if (!digit_alts.empty()) digit_alts += " | ";
    digit_alts += std::string("\"") + c + "\"";
  }
  return "<stmt> ::= <func> \"(\" <args> \")\"\n"
         "<args> ::= <expr> | <expr> \",\" <args>\n"
         "<expr> ::= <char> | <number>\n"
         "<func> ::= <char> <func> | <char>\n"
         "<char> ::= " + char_alts + "\n"
         "<number> ::= " + digit_alts;
}

inline graminfer::Grammar funcall_grammar() {
  return *graminfer::parse_bnf(funcall_grammar_text()).grammar;
}

inline std::vector<std::string> funcall_positives() {
  return {"add(1,2,3)", "merge(x,y)", "fibonacci(9)"};
}

inline std::vector<std::string> funcall_negatives() {
  return {"add(1,2,3", "merge(x;y)", "12+3"};
}

/// The memorizing solution: one alternative per positive example.
inline std::string overfit_grammar_text() {
  return "<stmt> ::= \"add(1,2,3)\" | \"merge(x,y)\" | \"fibonacci(9)\"";
}

inline graminfer::Grammar overfit_grammar() {
  return *graminfer::parse_bnf(overfit_grammar_text()).grammar;
}

inline std::string fenced(const std::string& grammar_text) {
  return "```\n" + grammar_text + "\n```";
}

/// Scripted backend that also records every prompt it saw.
class RecordingBackend : public graminfer::Backend {
public:
  explicit RecordingBackend(std::vector<std::string> responses)
      : inner_(graminfer::ScriptedMockBackend::from_responses(std::move(responses))) {}

  graminfer::Completion complete(const graminfer::ChatRequest& request) override {
    {
      std::lock_guard lock(mutex_);
      prompts_.push_back(request.prompt);
      requests_.push_back(request);
    }
    return inner_->complete(request);
  }

  const std::vector<std::string>& prompts() const { return prompts_; }
  const std::vector<graminfer::ChatRequest>& requests() const { return requests_; }

private:
  std::shared_ptr<graminfer::ScriptedMockBackend> inner_;
  std::mutex mutex_;
  std::vector<std::string> prompts_;
  std::vector<graminfer::ChatRequest> requests_;
};

/// Unique scratch directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mutex mutex;
  static int counter = 0;
  std::lock_guard lock(mutex);
  auto dir = std::filesystem::temp_directory_path() /
             ("graminfer_" + tag + "_" + std::to_string(++counter) + "_" +
              std::to_string(static_cast<long long>(::getpid())));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

} // namespace fixtures

#endif
