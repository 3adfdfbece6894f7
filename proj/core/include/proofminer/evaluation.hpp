// k-fold cross validation with permutation and foreign negative traces.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "proofminer/efsm.hpp"
#include "proofminer/inference.hpp"
#include "proofminer/trace.hpp"

namespace proofminer {

class EvaluationError : public std::runtime_error {
public:
  explicit EvaluationError(const std::string& what, std::optional<std::size_t> fold = std::nullopt)
      : std::runtime_error(fold ? "fold " + std::to_string(*fold) + ": " + what : what), fold_(fold) {}

  std::optional<std::size_t> fold() const noexcept { return fold_; }

private:
  std::optional<std::size_t> fold_;
};

/// Seeded generator with a portable bounded draw, so results do not depend
/// on the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i)
      std::swap(items[i - 1], items[below(i)]);
  }

private:
  std::mt19937_64 engine_;
};

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  /// Trace name to fold index.
  std::map<std::string, std::size_t> assignment;
  /// Trace indices per fold, ascending.
  std::vector<std::vector<std::size_t>> folds;
};

/// Seeded shuffle of the trace indices, then round-robin assignment.
/// Throws EvaluationError if k < 2 or k exceeds the number of traces.
FoldPlan make_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed);

/// Uniform random reordering of the events that differs from the original.
/// Throws EvaluationError when no such reordering exists.
Trace mutate_negative(const Trace& trace, std::uint64_t seed);

/// Alternates permuted traces of `corpus` with verbatim traces of `foreign`
/// until `count` negatives are collected. Candidates the prefix tree of
/// `corpus` accepts are dropped.
std::vector<Trace> build_negatives(const Corpus& corpus, const Corpus& foreign, std::size_t count,
                                   std::uint64_t seed);

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// nullopt marks a zero denominator.
struct Metrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

Metrics metrics(const ConfusionMatrix& m);

struct FoldResult {
  ConfusionMatrix matrix;
  Metrics metrics;
  std::size_t training_traces = 0;
  std::size_t model_states = 0;
};

struct EvalReport {
  std::string data_set;
  std::size_t proofs = 0;
  std::size_t lines = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  WalkMode mode = WalkMode::guarded;
  int merge_threshold = 0;
  std::size_t min_leaf = 1;
  std::size_t negatives = 0;
  std::vector<FoldResult> folds;
  /// Means over the folds where the value is defined.
  Metrics mean;

  std::string to_json() const;
  /// Data Set / Proofs / Lines / Sensitivity / Specificity table.
  std::string to_table() const;
};

/// Infers a model per fold on the other folds' positive traces, then walks
/// the fold's positives and every negative through it.
EvalReport cross_validate(const Corpus& corpus, const std::vector<Trace>& negatives, std::size_t k,
                          std::uint64_t seed, const InferenceConfig& config = {},
                          WalkMode mode = WalkMode::guarded);

} // namespace proofminer
