#ifndef GRAMINFER_RECOGNIZER_HPP
#define GRAMINFER_RECOGNIZER_HPP

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graminfer/grammar.hpp"

namespace graminfer {

/// Guards against pathological grammars (highly ambiguous candidates can
/// blow up the chart). A cap hit is reported, never silently swallowed.
struct RecognizerLimits {
  std::size_t max_chart_items = 200'000;
  std::size_t max_trace_steps = 1'000'000;
};

enum class Membership { Accepted, Rejected, ResourceLimit };

class ResourceLimitError : public std::runtime_error {
public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a positive example is outside the queried language.
class ExampleNotAccepted : public std::runtime_error {
public:
  ExampleNotAccepted(const std::string& what, std::string example)
      : std::runtime_error(what), example(std::move(example)) {}
  std::string example;
};

/// Exact membership decision for s in L(g). Terminals match as contiguous
/// character runs; epsilon rules, left recursion and ambiguity are all
/// handled. Invalid grammars denote the empty language and reject everything.
Membership membership(const Grammar& g, std::string_view s,
                      const RecognizerLimits& limits = {});

/// Convenience wrapper over membership; throws ResourceLimitError on a cap
/// hit instead of returning the third state.
bool accepts(const Grammar& g, std::string_view s,
             const RecognizerLimits& limits = {});

/// The production rules appearing in one left-most derivation of a string.
struct DerivationTrace {
  std::set<Production> used_productions;
};

/// None when s is not in L(g); otherwise the production set of one left-most
/// derivation chosen deterministically: at every expansion the alternative
/// with the lowest index in its rule set wins, applied left-most first (span
/// splits prefer the shortest feasible span for earlier symbols). Throws
/// ResourceLimitError on a cap hit.
std::optional<DerivationTrace> leftmost_derivation_rules(
    const Grammar& g, std::string_view s, const RecognizerLimits& limits = {});

/// Union of leftmost_derivation_rules over all examples (Π restricted to the
/// rules exercised by the example set). Throws ExampleNotAccepted naming the
/// first example outside L(g).
std::set<Production> used_rules_for_examples(
    const Grammar& g, const std::vector<std::string>& examples,
    const RecognizerLimits& limits = {});

} // namespace graminfer

#endif
