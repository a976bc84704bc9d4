#ifndef GRAMINFER_LLM_GATEWAY_HPP
#define GRAMINFER_LLM_GATEWAY_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graminfer/bnf_text.hpp"

namespace graminfer {

struct ChatRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 2000;
  std::string model_id;
};

struct Usage {
  std::size_t prompt_chars = 0;
  std::size_t response_chars = 0;
  long long latency_ms = 0;
};

struct Completion {
  std::string text;
  std::string error; // empty on success
  Usage usage;

  bool ok() const { return error.empty(); }
};

/// Chat-completion backend interface: one prompt in, one response out.
class Backend {
public:
  virtual ~Backend() = default;
  virtual Completion complete(const ChatRequest& request) = 0;
};

/// One scripted response. An empty key matches any prompt; a non-empty key
/// matches prompts containing it as a substring. Entries are consumed in
/// order; running out of matching entries is an error, never repetition.
struct MockEntry {
  std::string key;
  std::string response;
};

class ScriptedMockBackend : public Backend {
public:
  explicit ScriptedMockBackend(std::vector<MockEntry> entries);
  static std::shared_ptr<ScriptedMockBackend> from_responses(std::vector<std::string> responses);
  /// Loads a JSONL script: one {"response": ...} or {"key":..., "response":...}
  /// object per line. Throws std::runtime_error on malformed input.
  static std::shared_ptr<ScriptedMockBackend> from_file(const std::string& path);

  Completion complete(const ChatRequest& request) override;
  std::size_t calls() const;

private:
  mutable std::mutex mutex_;
  std::vector<MockEntry> entries_;
  std::vector<bool> consumed_;
  std::size_t calls_ = 0;
};

/// OpenAI-style chat-completion endpoint reached over HTTP. The bearer token
/// is read from the named environment variable at call time and never stored
/// on disk. Transient transport failures are retried with backoff.
struct HttpBackendConfig {
  std::string base_url;                    // e.g. http://localhost:8089
  std::string path = "/v1/chat/completions";
  std::string token_env;                   // env var holding the token; may be empty
  int max_retries = 3;
  int retry_backoff_ms = 250;
  int max_in_flight = 4;
  int timeout_seconds = 120;
};

class HttpChatBackend : public Backend {
public:
  explicit HttpChatBackend(HttpBackendConfig config);
  ~HttpChatBackend() override;
  Completion complete(const ChatRequest& request) override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Funnels every call through one place: counts calls and, when configured,
/// appends one JSONL record per call ({timestamp, template_id, prompt,
/// response, latency_ms}) to the artifact log for post-hoc debugging.
class Gateway {
public:
  explicit Gateway(std::shared_ptr<Backend> backend,
                   std::optional<std::string> artifact_log_path = std::nullopt);

  Completion complete(const ChatRequest& request, std::string_view template_id);
  std::size_t calls() const;

private:
  std::shared_ptr<Backend> backend_;
  std::optional<std::string> artifact_log_path_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

// ---- Prompt templates ----------------------------------------------------
// Rendering is pure and byte-deterministic; examples are substituted one per
// line into the section blocks.

/// Direct grammar-generation prompt from positive/negative examples.
std::string render_dp_prompt(const std::vector<std::string>& positives,
                             const std::vector<std::string>& negatives);

/// Retry prompt carrying the previous grammar and the parser's feedback.
std::string render_opf_feedback_prompt(const std::vector<std::string>& positives,
                                       const std::vector<std::string>& negatives,
                                       std::string_view grammar_text,
                                       const std::vector<Diagnostic>& diagnostics);

/// Small-modification prompt used by the LLM-driven mutation.
std::string render_mutation_prompt(std::string_view grammar_text,
                                   const std::vector<std::string>& positives,
                                   const std::vector<std::string>& negatives);

/// Dataset construction: n reference grammars of exactly k lines each.
std::string render_grammar_generation_prompt(int k, int n);

/// Dataset construction: m positive examples for a reference grammar.
std::string render_positive_examples_prompt(int m, std::string_view reference_grammar);

/// Dataset construction: m negative examples for a reference grammar.
std::string render_negative_examples_prompt(int m, std::string_view reference_grammar);

} // namespace graminfer

#endif
