// Guard-constrained Blue-Fringe state merging over a prefix tree.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "proofminer/efsm.hpp"
#include "proofminer/guard_learner.hpp"
#include "proofminer/trace.hpp"

namespace proofminer {

class InferenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IncompatibleMerge : public InferenceError {
public:
  using InferenceError::InferenceError;
};

struct MergeCandidate {
  StateId red = 0;
  StateId blue = 0;
  int score = 0;

  friend bool operator==(const MergeCandidate&, const MergeCandidate&) = default;
};

struct InferenceConfig {
  /// Minimum score for a merge to be taken.
  int merge_threshold = 0;
  /// Passed to the guard learner.
  std::size_t min_leaf = 1;
  /// Unused by the deterministic algorithm; kept so configs round-trip.
  std::uint64_t seed = 0;
  /// Called with the (uncompacted) model after every committed merge.
  std::function<void(const Efsm&)> on_commit;

  /// `{"mergeThreshold":0,"minLeaf":1}`; every field optional.
  static InferenceConfig from_json(std::string_view json);
  std::string to_json() const;
};

/// Literal consistency count: for every transition t and witness v, with p
/// the majority prediction for (t.label, v), a violation is p != end with no
/// outgoing p from t.target, or p == end with t.target not accepting.
std::size_t check_guard_consistency(const Efsm& model);

/// For every state s and every guard leaf c reached by a witness on an
/// incoming transition of s (plus the start context of the initial state),
/// counts the successors of s (outgoing labels, and end if accepting) that
/// lie outside the class support of c. Zero on any prefix tree.
std::size_t count_unexplained_successors(const Efsm& model);

/// EDSM score of overlaying the subtrees of `a` and `b`: one point per pair
/// of same-labelled transitions folded together. nullopt when the fold would
/// raise either consistency count. Requires a label-deterministic model.
/// Throws std::out_of_range on unknown states and std::invalid_argument if
/// a == b or the model is not label-deterministic.
std::optional<int> score_merge(const Efsm& model, StateId a, StateId b);

/// Merges `b` into `a` and determinizes. Throws IncompatibleMerge when
/// either consistency count would increase.
Efsm merge(const Efsm& model, StateId a, StateId b);

/// Folds same-label targets together until no state has two outgoing
/// transitions with one label. The result is compacted.
Efsm determinize(const Efsm& model);

/// Learns guards, builds the prefix tree of the positive traces and runs
/// Blue-Fringe on it. Throws InferenceError when there is nothing to learn.
Efsm infer(const Corpus& corpus, const InferenceConfig& config = {});

/// Same, with a guard model supplied by the caller.
Efsm infer(const Corpus& corpus, std::shared_ptr<const GuardModel> guards,
           const InferenceConfig& config = {});

} // namespace proofminer
