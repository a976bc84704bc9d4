#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "graminfer/baselines.hpp"
#include "graminfer/bnf_text.hpp"
#include "graminfer/challenge_store.hpp"
#include "graminfer/evolution.hpp"
#include "graminfer/llm_gateway.hpp"
#include "graminfer/metrics.hpp"
#include "graminfer/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace graminfer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1; // semantic failure / violations found
constexpr int kExitUsage = 2;   // usage or configuration error

struct CommonOptions {
  std::string backend = "mock"; // mock | http
  std::string script_path;
  std::string endpoint;
  std::string model;
  std::string token_env;
  double temperature = -1.0; // negative: use the method default
  int max_tokens = 2000;
  std::uint64_t seed = 0;
  int population = 10;
  int generations = 5;
  double crossover_rate = 0.7;
  double mutation_rate = 0.3;
  int max_turns = 5;
  int parallel = 1;
  std::string out_dir;
  std::string method = "dp";
};

void add_backend_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--backend", opts.backend, "LLM backend: mock or http")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--script", opts.script_path,
                  "mock backend script (JSONL, one {\"response\":...} per line)");
  cmd->add_option("--endpoint", opts.endpoint, "http backend base URL");
  cmd->add_option("--model", opts.model, "model id sent to the http backend");
  cmd->add_option("--token-env", opts.token_env,
                  "environment variable holding the bearer token");
  cmd->add_option("--temperature", opts.temperature, "sampling temperature override");
  cmd->add_option("--max-tokens", opts.max_tokens, "completion token budget")
      ->capture_default_str();
}

void add_search_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--population", opts.population, "population size")->capture_default_str();
  cmd->add_option("--generations", opts.generations, "number of generations")
      ->capture_default_str();
  cmd->add_option("--crossover-rate", opts.crossover_rate, "crossover probability")
      ->capture_default_str();
  cmd->add_option("--mutation-rate", opts.mutation_rate, "mutation probability")
      ->capture_default_str();
  cmd->add_option("--max-turns", opts.max_turns, "feedback turns for the opf method")
      ->capture_default_str();
}

std::shared_ptr<Backend> make_backend(const CommonOptions& opts, std::string& error) {
  if (opts.backend == "mock") {
    if (opts.script_path.empty()) {
      error = "--backend mock requires --script";
      return nullptr;
    }
    try {
      return ScriptedMockBackend::from_file(opts.script_path);
    } catch (const std::exception& e) {
      error = e.what();
      return nullptr;
    }
  }
  if (opts.endpoint.empty()) {
    error = "--backend http requires --endpoint";
    return nullptr;
  }
  HttpBackendConfig config;
  config.base_url = opts.endpoint;
  config.token_env = opts.token_env;
  return std::make_shared<HttpChatBackend>(config);
}

double method_temperature(const CommonOptions& opts) {
  if (opts.temperature >= 0.0) return opts.temperature;
  if (opts.method == "hygenar") return 0.7;
  if (opts.method == "opf") return 0.3;
  return 0.0;
}

GaConfig ga_config(const CommonOptions& opts) {
  GaConfig cfg;
  cfg.population_size = opts.population;
  cfg.generations = opts.generations;
  cfg.crossover_rate = opts.crossover_rate;
  cfg.mutation_rate = opts.mutation_rate;
  cfg.rng_seed = opts.seed;
  cfg.llm_temperature = method_temperature(opts);
  cfg.llm_max_tokens = opts.max_tokens;
  cfg.llm_model_id = opts.model;
  return cfg;
}

struct MethodOutput {
  Candidate candidate;
  RunLog log;
  std::size_t llm_calls = 0;
};

MethodOutput run_method(const CommonOptions& opts, const std::vector<std::string>& positives,
                        const std::vector<std::string>& negatives, Gateway& gateway,
                        std::uint64_t run_seed) {
  MethodOutput out;
  if (opts.method == "dp") {
    DpConfig cfg{method_temperature(opts), opts.max_tokens, opts.model};
    BaselineResult r = run_dp(positives, negatives, gateway, cfg);
    out.candidate = std::move(r.candidate);
    out.log = std::move(r.log);
    out.llm_calls = r.llm_calls;
  } else if (opts.method == "opf") {
    OpfConfig cfg{opts.max_turns, method_temperature(opts), opts.max_tokens, opts.model};
    BaselineResult r = run_opf(positives, negatives, cfg, gateway);
    out.candidate = std::move(r.candidate);
    out.log = std::move(r.log);
    out.llm_calls = r.llm_calls;
  } else {
    GaConfig cfg = ga_config(opts);
    cfg.rng_seed = run_seed;
    HygenarResult r = run_hygenar(positives, negatives, cfg, gateway);
    out.candidate = std::move(r.best);
    out.log = std::move(r.log);
    out.llm_calls = r.llm_calls;
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path, std::string& error) {
  std::ifstream in(path);
  if (!in) {
    error = "cannot open file: " + path;
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(buffer.str())));
  return hex;
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// ---- solve -----------------------------------------------------------------

struct SolveOptions {
  CommonOptions common;
  std::string positives_file;
  std::string negatives_file;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
};

int cmd_solve(SolveOptions& opts) {
  std::string error;
  if (!opts.positives_file.empty()) {
    auto lines = read_lines(opts.positives_file, error);
    if (!error.empty()) {
      std::cerr << error << '\n';
      return kExitUsage;
    }
    opts.positives.insert(opts.positives.end(), lines.begin(), lines.end());
  }
  if (!opts.negatives_file.empty()) {
    auto lines = read_lines(opts.negatives_file, error);
    if (!error.empty()) {
      std::cerr << error << '\n';
      return kExitUsage;
    }
    opts.negatives.insert(opts.negatives.end(), lines.begin(), lines.end());
  }
  if (opts.positives.empty() || opts.negatives.empty()) {
    std::cerr << "solve needs at least one positive and one negative example\n";
    return kExitUsage;
  }

  auto backend = make_backend(opts.common, error);
  if (!backend) {
    std::cerr << error << '\n';
    return kExitUsage;
  }
  std::optional<std::string> artifact_log;
  if (!opts.common.out_dir.empty()) {
    fs::create_directories(opts.common.out_dir);
    artifact_log = (fs::path(opts.common.out_dir) / "llm_calls.jsonl").string();
  }
  Gateway gateway(backend, artifact_log);

  MethodOutput output = run_method(opts.common, opts.positives, opts.negatives, gateway,
                                   opts.common.seed);
  const Candidate& candidate = output.candidate;
  const int max_fitness = static_cast<int>(opts.positives.size() + opts.negatives.size());

  std::cout << "method: " << opts.common.method << '\n';
  std::cout << "llm calls: " << output.llm_calls << '\n';
  std::cout << "fitness: " << candidate.fitness << " / " << max_fitness << '\n';
  if (!candidate.gateway_error.empty()) {
    std::cout << "gateway error: " << candidate.gateway_error << '\n';
  }
  std::cout << "grammar:\n";
  if (candidate.grammar.has_value()) {
    std::cout << print_bnf(*candidate.grammar) << '\n';
  } else {
    std::cout << (candidate.source_text.empty() ? "(none)" : candidate.source_text) << '\n';
    for (const Diagnostic& d : candidate.diagnostics) std::cout << d.render() << '\n';
  }

  std::cout << "\nstring verdicts:\n";
  auto verdict = [&](const std::string& s) -> std::string {
    if (!candidate.grammar.has_value() || !is_valid(*candidate.grammar)) return "reject";
    switch (membership(*candidate.grammar, s)) {
      case Membership::Accepted: return "accept";
      case Membership::Rejected: return "reject";
      case Membership::ResourceLimit: return "reject (resource limit)";
    }
    return "reject";
  };
  for (const std::string& p : opts.positives) {
    std::cout << "  + \"" << p << "\" -> " << verdict(p) << '\n';
  }
  for (const std::string& n : opts.negatives) {
    std::cout << "  - \"" << n << "\" -> " << verdict(n) << '\n';
  }

  if (!opts.common.out_dir.empty()) {
    write_text(fs::path(opts.common.out_dir) / "solve_log.jsonl", output.log.to_jsonl());
  }
  return candidate.fitness == max_fitness ? kExitOk : kExitFailure;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateOptions {
  CommonOptions common;
  std::string dataset_path;
};

struct ChallengeOutcome {
  ScoredResult scored;
  Candidate candidate;
  RunLog log;
  std::size_t llm_calls = 0;
};

int cmd_evaluate(EvaluateOptions& opts) {
  const long long started = now_ms();
  LoadResult loaded;
  try {
    loaded = load_dataset(opts.dataset_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  if (!loaded.ok()) {
    for (const LoadError& e : loaded.errors) {
      std::cerr << "record " << e.record << ": " << e.message << '\n';
    }
    return kExitFailure;
  }
  ValidationReport validation = validate_dataset(loaded.challenges);
  if (!validation.clean()) {
    std::cerr << validation.render();
    return kExitFailure;
  }

  std::string error;
  auto backend = make_backend(opts.common, error);
  if (!backend) {
    std::cerr << error << '\n';
    return kExitUsage;
  }
  fs::create_directories(opts.common.out_dir);
  fs::create_directories(fs::path(opts.common.out_dir) / "logs");
  Gateway gateway(backend, (fs::path(opts.common.out_dir) / "llm_calls.jsonl").string());

  const std::vector<Challenge>& challenges = loaded.challenges;
  std::vector<ChallengeOutcome> outcomes(challenges.size());
  std::atomic<std::size_t> cursor{0};
  const int workers = std::max(1, opts.common.parallel);

  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= challenges.size()) return;
      const Challenge& challenge = challenges[i];
      MethodOutput output = run_method(opts.common, challenge.positives, challenge.negatives,
                                       gateway, mix_seed(opts.common.seed, challenge.id));
      ChallengeResult result;
      result.reference = *parse_bnf(challenge.grammar_text).grammar;
      result.positives = challenge.positives;
      result.negatives = challenge.negatives;
      result.candidate_text = output.candidate.source_text;
      result.candidate = output.candidate.grammar;

      ChallengeOutcome& outcome = outcomes[i];
      outcome.scored = score_result(result);
      outcome.candidate = std::move(output.candidate);
      outcome.log = std::move(output.log);
      outcome.llm_calls = output.llm_calls;
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Per-challenge results, in dataset order (byte-stable for a fixed seed).
  std::string results_jsonl;
  std::vector<ScoredResult> scored;
  scored.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ChallengeOutcome& o = outcomes[i];
    scored.push_back(o.scored);
    json record = {
        {"id", challenges[i].id},
        {"method", opts.common.method},
        {"fitness", o.candidate.fitness},
        {"sx", o.scored.sx},
        {"se", o.scored.se},
        {"llm_calls", o.llm_calls},
        {"candidate", o.candidate.source_text},
        {"diff", nullptr},
        {"overfit", nullptr},
        {"overgen", nullptr},
        {"tu", nullptr},
    };
    if (o.scored.quality.has_value()) {
      record["diff"] = o.scored.quality->diff;
      record["overfit"] = o.scored.quality->overfit;
      record["overgen"] = o.scored.quality->overgen;
      record["tu"] = o.scored.quality->tu;
    }
    results_jsonl += record.dump();
    results_jsonl += '\n';
    write_text(fs::path(opts.common.out_dir) / "logs" / (challenges[i].id + ".jsonl"),
               o.log.to_jsonl());
  }
  write_text(fs::path(opts.common.out_dir) / "results.jsonl", results_jsonl);

  auto all = aggregate_scored(scored, Grouping::None);
  auto by_c = aggregate_scored(scored, Grouping::ByNonterminals);
  auto by_p = aggregate_scored(scored, Grouping::ByProductions);
  std::vector<MetricReport> table = std::move(all);
  table.insert(table.end(), by_c.begin() + 1, by_c.end());
  table.insert(table.end(), by_p.begin() + 1, by_p.end());
  std::cout << format_report_table(table);
  write_text(fs::path(opts.common.out_dir) / "aggregates.jsonl", reports_to_jsonl(table));

  json manifest = {
      {"command", "evaluate"},
      {"method", opts.common.method},
      {"backend", opts.common.backend},
      {"endpoint", opts.common.endpoint},
      {"model", opts.common.model},
      {"temperature", method_temperature(opts.common)},
      {"max_tokens", opts.common.max_tokens},
      {"seed", opts.common.seed},
      {"population", opts.common.population},
      {"generations", opts.common.generations},
      {"crossover_rate", opts.common.crossover_rate},
      {"mutation_rate", opts.common.mutation_rate},
      {"max_turns", opts.common.max_turns},
      {"parallel", opts.common.parallel},
      {"dataset", {{"path", opts.dataset_path}, {"digest", file_digest(opts.dataset_path)}}},
      {"out_dir", opts.common.out_dir},
      {"started_at_ms", started},
      {"finished_at_ms", now_ms()},
  };
  write_text(fs::path(opts.common.out_dir) / "manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

// ---- validate ----------------------------------------------------------------

int cmd_validate(const std::string& dataset_path) {
  LoadResult loaded;
  try {
    loaded = load_dataset(dataset_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  bool clean = loaded.ok();
  for (const LoadError& e : loaded.errors) {
    std::cout << "record " << e.record << ": " << e.message << '\n';
  }
  ValidationReport report = validate_dataset(loaded.challenges);
  std::cout << report.render();
  clean = clean && report.clean();
  return clean ? kExitOk : kExitFailure;
}

// ---- construct ----------------------------------------------------------------

struct ConstructOptions {
  CommonOptions common;
  ConstructConfig config;
};

int cmd_construct(ConstructOptions& opts) {
  std::string error;
  auto backend = make_backend(opts.common, error);
  if (!backend) {
    std::cerr << error << '\n';
    return kExitUsage;
  }
  fs::create_directories(opts.common.out_dir);
  Gateway gateway(backend, (fs::path(opts.common.out_dir) / "llm_calls.jsonl").string());

  opts.config.model_id = opts.common.model;
  opts.config.max_tokens = opts.common.max_tokens;
  if (opts.common.temperature >= 0.0) opts.config.temperature = opts.common.temperature;

  ConstructOutcome outcome = construct_dataset(opts.config, gateway);
  save_dataset((fs::path(opts.common.out_dir) / "draft_dataset.jsonl").string(), outcome.draft);
  write_text(fs::path(opts.common.out_dir) / "correction_queue.jsonl",
             queue_to_jsonl(outcome.queue));

  std::cout << "grammars attempted: " << outcome.grammars_attempted << '\n';
  std::cout << "challenges attempted: " << outcome.challenges_attempted << '\n';
  std::cout << "draft challenges: " << outcome.draft.size() << '\n';
  std::cout << "correction queue: " << outcome.queue.size() << '\n';
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"grammar inference toolkit: infer BNF grammars from examples"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file; keys live in a [subcommand] section");

  SolveOptions solve_opts;
  CLI::App* solve = app.add_subcommand("solve", "solve one challenge");
  solve->add_option("--method", solve_opts.common.method, "dp, opf, or hygenar")
      ->check(CLI::IsMember({"dp", "opf", "hygenar"}))
      ->capture_default_str();
  solve->add_option("--positives-file", solve_opts.positives_file,
                    "positive examples, one per line");
  solve->add_option("--negatives-file", solve_opts.negatives_file,
                    "negative examples, one per line");
  solve->add_option("--positive", solve_opts.positives, "inline positive example");
  solve->add_option("--negative", solve_opts.negatives, "inline negative example");
  solve->add_option("--out-dir", solve_opts.common.out_dir, "directory for run artifacts");
  add_backend_options(solve, solve_opts.common);
  add_search_options(solve, solve_opts.common);

  EvaluateOptions eval_opts;
  eval_opts.common.out_dir = "out";
  CLI::App* evaluate = app.add_subcommand("evaluate", "run a method over a dataset");
  evaluate->add_option("--dataset", eval_opts.dataset_path, "dataset JSONL file")->required();
  evaluate->add_option("--method", eval_opts.common.method, "dp, opf, or hygenar")
      ->check(CLI::IsMember({"dp", "opf", "hygenar"}))
      ->capture_default_str();
  evaluate->add_option("--out-dir", eval_opts.common.out_dir, "directory for run artifacts")
      ->capture_default_str();
  evaluate->add_option("--parallel", eval_opts.common.parallel,
                       "concurrent challenges (default 1 for reproducibility)")
      ->capture_default_str();
  add_backend_options(evaluate, eval_opts.common);
  add_search_options(evaluate, eval_opts.common);

  std::string validate_dataset_path;
  CLI::App* validate = app.add_subcommand("validate", "check a dataset");
  validate->add_option("--dataset", validate_dataset_path, "dataset JSONL file")->required();

  ConstructOptions construct_opts;
  construct_opts.common.out_dir = "out";
  CLI::App* construct = app.add_subcommand("construct", "build a draft dataset with an LLM");
  construct->add_option("--k-min", construct_opts.config.k_min, "smallest non-terminal count")
      ->capture_default_str();
  construct->add_option("--k-max", construct_opts.config.k_max, "largest non-terminal count")
      ->capture_default_str();
  construct->add_option("--grammars-per-k", construct_opts.config.grammars_per_k,
                        "reference grammars per k")
      ->capture_default_str();
  construct->add_option("--challenges-per-grammar", construct_opts.config.challenges_per_grammar,
                        "challenges per reference grammar")
      ->capture_default_str();
  construct->add_option("--examples", construct_opts.config.examples_per_side,
                        "examples per side of a challenge")
      ->capture_default_str();
  construct->add_option("--out-dir", construct_opts.common.out_dir,
                        "directory for the draft dataset and the correction queue")
      ->capture_default_str();
  add_backend_options(construct, construct_opts.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (evaluate->parsed()) return cmd_evaluate(eval_opts);
    if (validate->parsed()) return cmd_validate(validate_dataset_path);
    if (construct->parsed()) return cmd_construct(construct_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
