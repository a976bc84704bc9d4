#include "graminfer/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace graminfer {

using nlohmann::json;

// ---- Scripted mock ---------------------------------------------------------

ScriptedMockBackend::ScriptedMockBackend(std::vector<MockEntry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

std::shared_ptr<ScriptedMockBackend> ScriptedMockBackend::from_responses(
    std::vector<std::string> responses) {
  std::vector<MockEntry> entries;
  entries.reserve(responses.size());
  for (std::string& r : responses) entries.push_back(MockEntry{"", std::move(r)});
  return std::make_shared<ScriptedMockBackend>(std::move(entries));
}

std::shared_ptr<ScriptedMockBackend> ScriptedMockBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock script: " + path);
  std::vector<MockEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("response")) {
      throw std::runtime_error("malformed mock script line " + std::to_string(line_no) +
                               " in " + path);
    }
    MockEntry entry;
    entry.response = record.at("response").get<std::string>();
    if (record.contains("key")) entry.key = record.at("key").get<std::string>();
    entries.push_back(std::move(entry));
  }
  return std::make_shared<ScriptedMockBackend>(std::move(entries));
}

Completion ScriptedMockBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  ++calls_;
  Completion out;
  out.usage.prompt_chars = request.prompt.size();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (consumed_[i]) continue;
    if (!entries_[i].key.empty() &&
        request.prompt.find(entries_[i].key) == std::string::npos) {
      continue;
    }
    consumed_[i] = true;
    out.text = entries_[i].response;
    out.usage.response_chars = out.text.size();
    return out;
  }
  out.error = "mock script exhausted: no unconsumed entry matches the prompt";
  return out;
}

std::size_t ScriptedMockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// ---- HTTP backend ----------------------------------------------------------

struct HttpChatBackend::Impl {
  HttpBackendConfig config;
  std::counting_semaphore<64> in_flight;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)),
        in_flight(std::max(1, std::min(64, config.max_in_flight))) {}
};

HttpChatBackend::HttpChatBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpChatBackend::~HttpChatBackend() = default;

Completion HttpChatBackend::complete(const ChatRequest& request) {
  Completion out;
  out.usage.prompt_chars = request.prompt.size();

  json payload = {
      {"model", request.model_id},
      {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  const std::string body = payload.dump();

  std::string token;
  if (!impl_->config.token_env.empty()) {
    const char* value = std::getenv(impl_->config.token_env.c_str());
    if (value == nullptr) {
      out.error = "auth token environment variable is not set: " + impl_->config.token_env;
      return out;
    }
    token = value;
  }

  impl_->in_flight.acquire();
  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 0; attempt <= impl_->config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(impl_->config.retry_backoff_ms * attempt));
    }
    httplib::Client client(impl_->config.base_url);
    client.set_read_timeout(impl_->config.timeout_seconds, 0);
    client.set_connection_timeout(impl_->config.timeout_seconds, 0);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    auto res = client.Post(impl_->config.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue; // transient; retry
    }
    if (res->status == 401 || res->status == 403) {
      last_error = "auth error: HTTP " + std::to_string(res->status);
      break; // retrying cannot help
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "server error: HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      last_error = "unexpected HTTP status " + std::to_string(res->status);
      break;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      last_error = "response is not valid JSON";
      break;
    }
    try {
      out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      last_error = "response carries no message content";
      break;
    }
    last_error.clear();
    break;
  }
  impl_->in_flight.release();

  out.usage.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
  if (!last_error.empty()) {
    out.error = last_error;
    return out;
  }
  if (out.text.empty()) {
    out.error = "backend returned an empty response";
    return out;
  }
  out.usage.response_chars = out.text.size();
  return out;
}

// ---- Gateway ---------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend,
                 std::optional<std::string> artifact_log_path)
    : backend_(std::move(backend)), artifact_log_path_(std::move(artifact_log_path)) {}

Completion Gateway::complete(const ChatRequest& request, std::string_view template_id) {
  Completion result = backend_->complete(request);
  std::lock_guard lock(mutex_);
  ++calls_;
  if (artifact_log_path_.has_value()) {
    json record = {
        {"timestamp",
         std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()},
        {"template_id", std::string(template_id)},
        {"prompt", request.prompt},
        {"response", result.text},
        {"latency_ms", result.usage.latency_ms},
    };
    if (!result.ok()) record["error"] = result.error;
    std::ofstream out(*artifact_log_path_, std::ios::app);
    out << record.dump() << '\n';
  }
  return result;
}

std::size_t Gateway::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// ---- Prompt templates ------------------------------------------------------

namespace {

// The seven requirements shared by the direct and feedback prompts.
constexpr std::string_view kGenerationHeader =
    "Given a set of positive and negative examples, generate the Backus–Naur Form (BNF) grammar that accepts all positive examples and rejects all negative examples.\n"
    "1. Only generate the standard BNF grammar;\n"
    "2. The generated BNF grammar MUST accept all positive examples and reject all negative examples;\n"
    "3. Each terminal symbol MUST be quoted with double quotes and MUST NOT escape double quotes or pipeline in terminal symbols;\n"
    "4. Pay special attention to whether spaces, line breaks, or other special symbols are required between each symbol, and if so, these need to be explicitly specified, e.g. <term> ::= \"1\" \"+\" \"2\" can handle \"1+2\" but not \"1 + 2\" while <term> ::= \"1\" \" \" \"+\" \" \" \"2\" can handle \"1 + 2\" but not \"1+2\";\n"
    "5. The entry point of the generated BNF grammar MUST be the non-terminal symbol in the first production rule;\n"
    "6. Only the generated BNF should be wrapped in a pair of triple backtick;\n"
    "7. Do NOT output any additional texts, comments, or explanations.\n";

std::string example_block(const std::vector<std::string>& positives,
                          const std::vector<std::string>& negatives) {
  std::string out = "===Positive Examples===\n";
  for (const std::string& p : positives) {
    out += p;
    out += '\n';
  }
  out += "===Negative Examples===\n";
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    out += negatives[i];
    if (i + 1 < negatives.size()) out += '\n';
  }
  return out;
}

} // namespace

std::string render_dp_prompt(const std::vector<std::string>& positives,
                             const std::vector<std::string>& negatives) {
  std::string out(kGenerationHeader);
  out += '\n';
  out += example_block(positives, negatives);
  return out;
}

std::string render_opf_feedback_prompt(const std::vector<std::string>& positives,
                                       const std::vector<std::string>& negatives,
                                       std::string_view grammar_text,
                                       const std::vector<Diagnostic>& diagnostics) {
  std::string out(kGenerationHeader);
  out += '\n';
  out += example_block(positives, negatives);
  out += "\n\n===Generated BNF===\n";
  out += grammar_text;
  out += "\n\n===Feedback===\n";
  out += "The generated BNF grammar has incorrect syntax and please consider fixing it by referring to the feedback.\n";
  out += "Here is the feedback from the BNF parser:\n";
  out += render_feedback(diagnostics);
  return out;
}

std::string render_mutation_prompt(std::string_view grammar_text,
                                   const std::vector<std::string>& positives,
                                   const std::vector<std::string>& negatives) {
  std::string out =
      "Modify the following BNF grammar slightly to improve its acceptance of the positive examples and rejection of the negative examples.\n"
      "\n"
      "===BNF Grammar===\n";
  out += grammar_text;
  out += "\n\n";
  out += example_block(positives, negatives);
  out += "\n\nOnly output the modified BNF grammar wrapped in triple backticks.";
  return out;
}

std::string render_grammar_generation_prompt(int k, int n) {
  std::string out =
      "Generate a list of random standard Backus-Naur Form (BNF) grammar with the following constraints:\n"
      "1. Each generated BNF grammar MUST be SELF-CONTAINED and VALID, which means it should be able to recognize a valid string;\n"
      "2. Each generated BNF grammar MUST have exactly " + std::to_string(k) + " lines;\n"
      "3. Each generated BNF grammar MUST be unique;\n"
      "4. Each generated BNF grammar MUST be separated by a newline in addition to the linebreak;\n"
      "5. For each generated BNF grammar, the entry point MUST be at the first line;\n"
      "6. Only generate " + std::to_string(n) + " BNF grammars;\n"
      "7. Only output BNF grammars WITHOUT any additional text or code block, like \"```\".";
  return out;
}

namespace {

std::string example_generation_prompt(std::string_view kind_line, int m,
                                      std::string_view extra_item,
                                      std::string_view sample_lines,
                                      std::string_view reference_grammar) {
  std::string out = "Generate a list of ";
  out += kind_line;
  out += " examples with the following constraints:\n"
         "1. Each example MUST be separated by a newline in addition to the linebreak;\n"
         "2. Only output examples WITHOUT any additional text or code block, like \"```\";\n"
         "3. Only output " + std::to_string(m) + " examples;\n"
         "4. Each example MUST be generated based on the given BNF grammar;\n";
  out += extra_item;
  out += "\n\nFor example, given the following BNF grammar:\n"
         "<term> ::=  \"0\" | \"1\" | \"2\"\n"
         "you should output ";
  out += kind_line;
  out += " examples like:\n";
  out += sample_lines;
  out += "\nThen, the given BNF grammar is:\n";
  out += reference_grammar;
  return out;
}

} // namespace

std::string render_positive_examples_prompt(int m, std::string_view reference_grammar) {
  return example_generation_prompt(
      "positive", m,
      "5. Pay attention to whether the whitespaces are allowed between symbols.",
      "0\n\n1\n\n2\n", reference_grammar);
}

std::string render_negative_examples_prompt(int m, std::string_view reference_grammar) {
  return example_generation_prompt(
      "negative", m,
      "5. Each example should be greatly related to the given BNF grammar, but ensure it is NOT a valid string for the given BNF grammar.",
      "6\n\n*\n\n9\n", reference_grammar);
}

} // namespace graminfer
