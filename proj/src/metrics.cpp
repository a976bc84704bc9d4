#include "graminfer/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace graminfer {

int syntax_correct(const ChallengeResult& result) {
  return result.candidate.has_value() && is_valid(*result.candidate) ? 1 : 0;
}

int semantics_correct(const ChallengeResult& result, const RecognizerLimits& limits) {
  if (!syntax_correct(result)) return 0;
  const Grammar& candidate = *result.candidate;
  for (const std::string& p : result.positives) {
    if (membership(candidate, p, limits) != Membership::Accepted) return 0;
  }
  for (const std::string& n : result.negatives) {
    if (membership(candidate, n, limits) == Membership::Accepted) return 0;
  }
  return 1;
}

std::optional<QualityMetrics> quality_metrics(const ChallengeResult& result,
                                              const RecognizerLimits& limits) {
  if (!semantics_correct(result, limits)) return std::nullopt;

  auto reference_used = used_rules_for_examples(result.reference, result.positives, limits);
  auto candidate_used = used_rules_for_examples(*result.candidate, result.positives, limits);

  QualityMetrics q;
  const long long ref_used = static_cast<long long>(reference_used.size());
  const long long cand_used = static_cast<long long>(candidate_used.size());
  q.diff = ref_used - cand_used;
  // Strict half-threshold comparisons, kept exact by doubling both sides.
  q.overfit = (2 * q.diff > ref_used) ? 1 : 0;
  q.overgen = (2 * q.diff < -ref_used) ? 1 : 0;
  q.tu = static_cast<double>(cand_used) /
         static_cast<double>(production_count(*result.candidate));
  return q;
}

ScoredResult score_result(const ChallengeResult& result, const RecognizerLimits& limits) {
  ScoredResult s;
  s.sx = syntax_correct(result);
  s.se = semantics_correct(result, limits);
  if (s.se) s.quality = quality_metrics(result, limits);
  s.reference_rule_sets = nonterminal_count(result.reference);
  s.reference_productions = production_count(result.reference);
  return s;
}

namespace {

MetricReport report_for(std::string key, const std::vector<const ScoredResult*>& group) {
  MetricReport r;
  r.group_key = std::move(key);
  r.challenge_count = group.size();
  if (group.empty()) return r;

  std::size_t sx_sum = 0;
  std::size_t se_sum = 0;
  double diff_sum = 0.0;
  std::size_t of_sum = 0;
  std::size_t og_sum = 0;
  double tu_sum = 0.0;
  for (const ScoredResult* s : group) {
    sx_sum += static_cast<std::size_t>(s->sx);
    se_sum += static_cast<std::size_t>(s->se);
    if (s->quality.has_value()) {
      ++r.solved_count;
      diff_sum += static_cast<double>(s->quality->diff);
      of_sum += static_cast<std::size_t>(s->quality->overfit);
      og_sum += static_cast<std::size_t>(s->quality->overgen);
      tu_sum += s->quality->tu;
    }
  }
  const double n = static_cast<double>(group.size());
  r.sx = static_cast<double>(sx_sum) / n;
  r.se = static_cast<double>(se_sum) / n;
  if (r.solved_count > 0) {
    const double k = static_cast<double>(r.solved_count);
    r.diff_avg = diff_sum / k;
    r.of_pct = static_cast<double>(of_sum) / k;
    r.og_pct = static_cast<double>(og_sum) / k;
    r.tu_avg = tu_sum / k;
  }
  return r;
}

int c_bucket(std::size_t rule_sets) {
  if (rule_sets >= 1 && rule_sets <= 3) return 0;
  if (rule_sets >= 4 && rule_sets <= 6) return 1;
  if (rule_sets >= 7 && rule_sets <= 9) return 2;
  return -1;
}

int p_bucket(std::size_t productions) {
  if (productions >= 1 && productions <= 6) return 0;
  if (productions >= 7 && productions <= 15) return 1;
  if (productions >= 16) return 2;
  return -1;
}

} // namespace

std::vector<MetricReport> aggregate_scored(const std::vector<ScoredResult>& scored,
                                           Grouping grouping) {
  std::vector<const ScoredResult*> all;
  all.reserve(scored.size());
  for (const ScoredResult& s : scored) all.push_back(&s);

  std::vector<MetricReport> reports;
  reports.push_back(report_for("All", all));
  if (grouping == Grouping::None) return reports;

  const bool by_c = grouping == Grouping::ByNonterminals;
  std::vector<std::vector<const ScoredResult*>> buckets(3);
  for (const ScoredResult& s : scored) {
    int b = by_c ? c_bucket(s.reference_rule_sets) : p_bucket(s.reference_productions);
    if (b >= 0) buckets[static_cast<std::size_t>(b)].push_back(&s);
  }
  for (int b = 0; b < 3; ++b) {
    std::string key = (by_c ? "C" : "P") + std::to_string(b + 1);
    reports.push_back(report_for(std::move(key), buckets[static_cast<std::size_t>(b)]));
  }
  return reports;
}

std::vector<MetricReport> aggregate(const std::vector<ChallengeResult>& results,
                                    Grouping grouping, const RecognizerLimits& limits) {
  std::vector<ScoredResult> scored;
  scored.reserve(results.size());
  for (const ChallengeResult& r : results) scored.push_back(score_result(r, limits));
  return aggregate_scored(scored, grouping);
}

namespace {

std::string cell_pct(const std::optional<double>& v) {
  if (!v.has_value()) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

std::string cell_diff(const std::optional<double>& v) {
  if (!v.has_value()) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

void pad(std::string& out, const std::string& cell, std::size_t width) {
  if (cell.size() < width) out.append(width - cell.size(), ' ');
  out += cell;
}

} // namespace

std::string format_report_table(const std::vector<MetricReport>& reports) {
  static constexpr std::size_t kW = 9;
  std::string out = "Group  Challenges  Solved";
  for (const char* col : {"SX", "SE", "Diff", "OF", "OG", "TU"}) {
    pad(out, col, kW);
  }
  out += '\n';
  for (const MetricReport& r : reports) {
    std::string line = r.group_key;
    line.append(line.size() < 5 ? 5 - line.size() : 0, ' ');
    pad(line, std::to_string(r.challenge_count), 12);
    pad(line, std::to_string(r.solved_count), 8);
    pad(line, cell_pct(r.sx), kW);
    pad(line, cell_pct(r.se), kW);
    pad(line, cell_diff(r.diff_avg), kW);
    pad(line, cell_pct(r.of_pct), kW);
    pad(line, cell_pct(r.og_pct), kW);
    pad(line, cell_pct(r.tu_avg), kW);
    out += line;
    out += '\n';
  }
  return out;
}

std::string reports_to_jsonl(const std::vector<MetricReport>& reports) {
  auto value_or_null = [](const std::optional<double>& v) {
    return v.has_value() ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  std::string out;
  for (const MetricReport& r : reports) {
    nlohmann::json record = {
        {"group_key", r.group_key},
        {"challenge_count", r.challenge_count},
        {"solved_count", r.solved_count},
        {"sx", value_or_null(r.sx)},
        {"se", value_or_null(r.se)},
        {"diff_avg", value_or_null(r.diff_avg)},
        {"of_pct", value_or_null(r.of_pct)},
        {"og_pct", value_or_null(r.og_pct)},
        {"tu_avg", value_or_null(r.tu_avg)},
    };
    out += record.dump();
    out += '\n';
  }
  return out;
}

} // namespace graminfer
