#ifndef GRAMINFER_METRICS_HPP
#define GRAMINFER_METRICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "graminfer/grammar.hpp"
#include "graminfer/recognizer.hpp"

namespace graminfer {

/// One challenge paired with a candidate grammar: the unit the metric suite
/// scores.
struct ChallengeResult {
  Grammar reference;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  std::string candidate_text;            // raw output after fence extraction
  std::optional<Grammar> candidate;      // parse outcome; none = parse failed
};

/// Indicator: candidate parsed and is a valid grammar.
int syntax_correct(const ChallengeResult& result);

/// Indicator: syntactically valid, accepts every positive and rejects every
/// negative. A recognizer cap hit on a query counts the string as rejected.
int semantics_correct(const ChallengeResult& result,
                      const RecognizerLimits& limits = {});

/// The four grammar-quality numbers for a solved challenge. diff is the
/// count of derivation rules the reference uses minus the count the
/// candidate uses; overfit/overgen apply the strict half-threshold
/// comparisons; tu is the used-over-total production ratio of the candidate.
struct QualityMetrics {
  long long diff = 0;
  int overfit = 0;
  int overgen = 0;
  double tu = 0.0;
};

/// None unless the challenge is solved (quality metrics apply to solved
/// challenges only).
std::optional<QualityMetrics> quality_metrics(const ChallengeResult& result,
                                              const RecognizerLimits& limits = {});

/// Per-challenge scores computed once so aggregation never re-runs the
/// recognizer.
struct ScoredResult {
  int sx = 0;
  int se = 0;
  std::optional<QualityMetrics> quality;
  std::size_t reference_rule_sets = 0;   // grouping key for C buckets
  std::size_t reference_productions = 0; // grouping key for P buckets
};

ScoredResult score_result(const ChallengeResult& result,
                          const RecognizerLimits& limits = {});

enum class Grouping { None, ByNonterminals, ByProductions };

/// Aggregate over one group of challenges. Quality fields are nullopt (N/A)
/// when no challenge in the group is solved; sx/se are nullopt only for an
/// empty group.
struct MetricReport {
  std::string group_key;                 // "All", "C1".."C3", "P1".."P3"
  std::size_t challenge_count = 0;
  std::size_t solved_count = 0;
  std::optional<double> sx;              // fraction in [0,1]
  std::optional<double> se;              // fraction in [0,1]
  std::optional<double> diff_avg;
  std::optional<double> of_pct;          // fraction in [0,1]
  std::optional<double> og_pct;          // fraction in [0,1]
  std::optional<double> tu_avg;          // fraction in [0,1]
};

/// Buckets: C1 = 1..3 rule sets, C2 = 4..6, C3 = 7..9; P1 = 1..6 reference
/// productions, P2 = 7..15, P3 = 16 and up. The "All" report always comes
/// first.
std::vector<MetricReport> aggregate_scored(const std::vector<ScoredResult>& scored,
                                           Grouping grouping);

std::vector<MetricReport> aggregate(const std::vector<ChallengeResult>& results,
                                    Grouping grouping,
                                    const RecognizerLimits& limits = {});

/// Tabular text rendering: percentages with one decimal, Diff with two,
/// "N/A" for inapplicable cells.
std::string format_report_table(const std::vector<MetricReport>& reports);

/// Machine-readable rendering: one JSON object per line with the report's
/// fields as typed (fractions, not percentages); inapplicable values are
/// null.
std::string reports_to_jsonl(const std::vector<MetricReport>& reports);

} // namespace graminfer

#endif
