// Synthetic corpora for tests: traces sampled from hand-built guarded
// machines, and unstructured random corpora.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "proofminer/evaluation.hpp"
#include "proofminer/trace.hpp"

namespace proofminer::testing {

struct GtTransition {
  int from = 0;
  std::string method;
  int to = 0;
  /// Empty for zero-parameter steps.
  std::vector<std::string> values;
  /// Parameter value -> indices of the transitions allowed next. Values
  /// not listed leave every outgoing transition of `to` open.
  std::map<std::string, std::vector<int>> next;
};

struct GroundTruth {
  int states = 0;
  std::vector<int> accepting;
  std::vector<GtTransition> transitions;

  bool is_accepting(int s) const;
  std::vector<int> outgoing(int s) const;
  /// Does the machine (with its parameter constraints) generate `trace`?
  bool generates(const Trace& trace) const;
};

/// Five states, eight transitions; the parameter of each step decides which
/// step may follow.
GroundTruth five_state_machine();

/// Same shape with method names prefixed by `prefix` and `vocab` values per
/// parameterized step.
GroundTruth scaled_machine(const std::string& prefix, std::size_t vocab);

/// `count` traces of at most `max_length` events, each ending in an
/// accepting state. Names are "<prefix>t<i>".
std::vector<Trace> sample_traces(const GroundTruth& gt, std::size_t count, std::size_t max_length,
                                 Rng& rng, const std::string& prefix = "");

Corpus sample_corpus(const GroundTruth& gt, std::size_t count, std::size_t max_length,
                     std::uint64_t seed);

/// Traces pooled from four machines with disjoint method names and large
/// parameter vocabularies.
Corpus heterogeneous_corpus(std::size_t count, std::size_t max_length, std::uint64_t seed);

/// Unstructured traces: `methods` method names, small parameter vocabulary,
/// lengths in [1, max_length], some steps combined.
Corpus random_corpus(std::size_t count, std::size_t max_length, std::uint64_t seed,
                     std::size_t methods = 8);

} // namespace proofminer::testing
