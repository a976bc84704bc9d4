#include "graminfer/evolution.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace graminfer {

int fitness_of(const Grammar& g, const std::vector<std::string>& positives,
               const std::vector<std::string>& negatives, const RecognizerLimits& limits) {
  if (!is_valid(g)) return -1;
  int score = 0;
  for (const std::string& p : positives) {
    if (membership(g, p, limits) == Membership::Accepted) ++score;
  }
  for (const std::string& n : negatives) {
    if (membership(g, n, limits) != Membership::Accepted) ++score;
  }
  return score;
}

Candidate make_candidate(std::string source_text, const std::vector<std::string>& positives,
                         const std::vector<std::string>& negatives,
                         const RecognizerLimits& limits) {
  Candidate c;
  c.source_text = std::move(source_text);
  ParseResult parsed = parse_bnf(c.source_text);
  if (!parsed.ok()) {
    c.diagnostics = std::move(parsed.diagnostics);
    c.fitness = -1;
    return c;
  }
  c.grammar = std::move(parsed.grammar);
  c.fitness = fitness_of(*c.grammar, positives, negatives, limits);
  return c;
}

int fitness(std::string_view candidate_text, const std::vector<std::string>& positives,
            const std::vector<std::string>& negatives, const RecognizerLimits& limits) {
  return make_candidate(std::string(candidate_text), positives, negatives, limits).fitness;
}

std::vector<Candidate> select(const std::vector<Candidate>& population) {
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return population[a].fitness > population[b].fitness;
  });
  std::vector<Candidate> survivors;
  survivors.reserve(population.size() / 2);
  for (std::size_t i = 0; i < population.size() / 2; ++i) {
    survivors.push_back(population[order[i]]);
  }
  return survivors;
}

Grammar splice_rule_sets(const Grammar& a, const Grammar& b, std::size_t w) {
  if (w < 1 || w > std::min(a.rule_sets.size(), b.rule_sets.size())) {
    throw std::out_of_range("splice point outside 1..min(|R_a|, |R_b|)");
  }
  Grammar out;
  out.start = a.start;
  out.rule_sets.assign(a.rule_sets.begin(), a.rule_sets.begin() + (w - 1));
  out.rule_sets.insert(out.rule_sets.end(), b.rule_sets.begin() + (w - 1), b.rule_sets.end());
  return normalized(std::move(out));
}

CrossoverOutcome crossover(const Candidate& a, const Candidate& b, double rho, Rng& rng) {
  static const Grammar kEmpty;
  const Grammar& ga = a.grammar.has_value() ? *a.grammar : kEmpty;
  const Grammar& gb = b.grammar.has_value() ? *b.grammar : kEmpty;

  if (ga.empty() && gb.empty()) {
    return CrossoverOutcome{rng.below(2) == 0 ? ga : gb, true};
  }
  if (ga.empty()) return CrossoverOutcome{gb, true};
  if (gb.empty()) return CrossoverOutcome{ga, true};

  if (!rng.coin(rho)) {
    return CrossoverOutcome{rng.below(2) == 0 ? ga : gb, true};
  }
  const std::size_t w = rng.uniform_in(1, std::min(ga.rule_sets.size(), gb.rule_sets.size()));
  return CrossoverOutcome{splice_rule_sets(ga, gb, w), false};
}

Grammar shuffle_rule_set(Grammar g, std::size_t rule_set_index, Rng& rng) {
  if (rule_set_index >= g.rule_sets.size()) {
    throw std::out_of_range("rule set index out of range");
  }
  for (SententialForm& alt : g.rule_sets[rule_set_index].alternatives) {
    rng.shuffle(alt);
  }
  return g;
}

Grammar space_insert(Grammar g, std::size_t rule_set_index, double p, Rng& rng) {
  if (rule_set_index >= g.rule_sets.size()) {
    throw std::out_of_range("rule set index out of range");
  }
  for (SententialForm& alt : g.rule_sets[rule_set_index].alternatives) {
    if (!rng.coin(p)) continue;
    const std::size_t insertions = rng.below(alt.size() + 1); // Uniform{0..|alt|}
    for (std::size_t i = 0; i < insertions; ++i) {
      if (alt.empty()) break;
      const std::size_t at = rng.below(alt.size());
      const bool after = rng.below(2) == 1;
      alt.insert(alt.begin() + (at + (after ? 1 : 0)), Symbol::terminal(" "));
    }
  }
  return g;
}

namespace {

Candidate candidate_from_grammar(Grammar g, const std::vector<std::string>& positives,
                                 const std::vector<std::string>& negatives,
                                 const RecognizerLimits& limits) {
  Candidate c;
  c.source_text = print_bnf(g);
  c.fitness = fitness_of(g, positives, negatives, limits);
  c.grammar = std::move(g);
  return c;
}

Candidate candidate_from_completion(const Completion& completion,
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

MutationResult mutate(const Grammar& g, const std::vector<std::string>& positives,
                      const std::vector<std::string>& negatives, const GaConfig& config,
                      Rng& rng, Gateway& gateway, const RecognizerLimits& limits) {
  const bool force_llm = g.rule_sets.empty();
  if (!force_llm && rng.coin(config.local_vs_llm_prob)) {
    const std::size_t index = rng.below(g.rule_sets.size());
    Grammar mutated = shuffle_rule_set(g, index, rng);
    mutated = space_insert(std::move(mutated), index, config.space_insert_prob, rng);
    return MutationResult{
        candidate_from_grammar(std::move(mutated), positives, negatives, limits),
        Operator::LocalMutation};
  }

  ChatRequest request;
  request.prompt = render_mutation_prompt(print_bnf(g), positives, negatives);
  request.temperature = config.llm_temperature;
  request.max_tokens = config.llm_max_tokens;
  request.model_id = config.llm_model_id;
  Completion completion = gateway.complete(request, "mutation");
  return MutationResult{candidate_from_completion(completion, positives, negatives, limits),
                        Operator::LlmMutation};
}

HygenarResult run_hygenar(const std::vector<std::string>& positives,
                          const std::vector<std::string>& negatives, const GaConfig& config,
                          Gateway& gateway, const RecognizerLimits& limits) {
  GaConfig cfg = config;
  cfg.max_fitness = static_cast<int>(positives.size() + negatives.size());

  HygenarResult run;
  Rng rng(cfg.rng_seed);
  std::vector<Candidate> population;
  population.reserve(static_cast<std::size_t>(cfg.population_size));
  std::optional<Candidate> best;
  std::size_t llm_calls = 0; // local count; the gateway may be shared

  auto finish = [&](int generations_built) {
    run.generations_built = generations_built;
    run.llm_calls = llm_calls;
    if (!best.has_value()) {
      // Degenerate runs (every call failed, or zero generations): fall back
      // to the best-scored member of the raw population.
      for (const Candidate& c : population) {
        if (!best.has_value() || c.fitness > best->fitness) best = c;
      }
      if (!best.has_value()) best = Candidate{};
    }
    run.best = std::move(*best);
    return std::move(run);
  };

  ChatRequest init_request;
  init_request.prompt = render_dp_prompt(positives, negatives);
  init_request.temperature = cfg.llm_temperature;
  init_request.max_tokens = cfg.llm_max_tokens;
  init_request.model_id = cfg.llm_model_id;

  for (int slot = 0; slot < cfg.population_size; ++slot) {
    Completion completion = gateway.complete(init_request, "dp");
    ++llm_calls;
    Candidate c = candidate_from_completion(completion, positives, negatives, limits);
    run.log.add(LogEntry{0, slot, Operator::Init, c.fitness, c.source_text, c.gateway_error});
    if (c.fitness == cfg.max_fitness) {
      best = std::move(c);
      return finish(0);
    }
    population.push_back(std::move(c));
  }

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    for (const Candidate& c : population) {
      if (!best.has_value() || c.fitness > best->fitness) best = c;
    }
    if (best.has_value() && best->fitness == cfg.max_fitness) {
      return finish(gen - 1);
    }

    std::vector<Candidate> selected = select(population);
    std::vector<Candidate> next;
    next.reserve(static_cast<std::size_t>(cfg.population_size));
    int slot = 0;
    while (static_cast<int>(next.size()) < cfg.population_size) {
      const Candidate& parent_a = selected[rng.below(selected.size())];
      const Candidate& parent_b = selected[rng.below(selected.size())];
      CrossoverOutcome crossed = crossover(parent_a, parent_b, cfg.crossover_rate, rng);
      Operator op = crossed.passthrough ? Operator::ParentPassthrough : Operator::Crossover;

      Candidate c;
      if (rng.coin(cfg.mutation_rate)) {
        MutationResult mutated =
            mutate(crossed.grammar, positives, negatives, cfg, rng, gateway, limits);
        c = std::move(mutated.candidate);
        op = mutated.op;
        if (op == Operator::LlmMutation) ++llm_calls;
      } else {
        c = candidate_from_grammar(std::move(crossed.grammar), positives, negatives, limits);
      }
      run.log.add(LogEntry{gen, slot, op, c.fitness, c.source_text, c.gateway_error});
      next.push_back(std::move(c));
      ++slot;
    }
    population = std::move(next);
    run.generations_built = gen;
  }

  return finish(run.generations_built);
}

} // namespace graminfer
