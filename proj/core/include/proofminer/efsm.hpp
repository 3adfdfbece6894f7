// Extended finite state machines over proof-step labels.
//
// Transitions carry the parameter vectors observed on them (witnesses, with
// the number of training traces that used each one); the data guard of a
// transition is that witness set together with the GuardModel tree of its
// label.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proofminer/guard_learner.hpp"
#include "proofminer/trace.hpp"

namespace proofminer {

using StateId = std::uint32_t;

/// Observed parameter vectors and how many training traces used each.
using WitnessSet = std::map<ParamVector, std::size_t>;

struct Transition {
  StateId source = 0;
  Label label;
  StateId target = 0;
  WitnessSet witnesses;

  friend bool operator==(const Transition&, const Transition&) = default;
};

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Efsm {
public:
  Efsm() : Efsm(1, {}, {}, nullptr) {}

  /// Transitions are canonicalized: sorted by (source, label, target), with
  /// coincident triples merged and their witness counts added. Throws
  /// ModelError on dangling state references.
  Efsm(std::size_t state_count, std::vector<StateId> accepting, std::vector<Transition> transitions,
       std::shared_ptr<const GuardModel> guards, StateId initial = 0);

  std::size_t state_count() const noexcept { return accepting_.size(); }
  StateId initial() const noexcept { return initial_; }
  bool is_accepting(StateId s) const { return accepting_.at(s); }
  std::vector<StateId> accepting_states() const;

  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  /// Indices into transitions(), ordered by (label, target).
  std::span<const std::size_t> outgoing(StateId s) const;
  std::span<const std::size_t> incoming(StateId s) const;

  /// Outgoing transitions of `s` labelled `label`.
  std::vector<std::size_t> find(StateId s, const Label& label) const;

  const GuardModel* guards() const noexcept { return guards_.get(); }
  const std::shared_ptr<const GuardModel>& shared_guards() const noexcept { return guards_; }

  /// No state has two outgoing transitions with the same label.
  bool is_label_deterministic() const;
  /// Every state is reachable from the initial state.
  bool is_connected() const;

  friend bool operator==(const Efsm& a, const Efsm& b);

private:
  void index();

  StateId initial_ = 0;
  std::vector<bool> accepting_;
  std::vector<Transition> transitions_;
  std::shared_ptr<const GuardModel> guards_;
  std::vector<std::size_t> out_offsets_, out_index_;
  std::vector<std::size_t> in_offsets_, in_index_;
};

/// Prefix tree over the positive traces: traces share a path as long as
/// both label and full parameter vector agree. The state reached by each
/// trace is accepting.
Efsm build_pta(const Corpus& corpus, std::shared_ptr<const GuardModel> guards = nullptr);

/// Keeps the states reachable from the initial state and renumbers them in
/// increasing order of their old ids (the initial state becomes 0).
Efsm compact(const Efsm& model);

enum class WalkMode { control_only, guarded };

struct WalkResult {
  enum class Verdict { accepted, rejected };
  enum class Reason { ok, missing_transition, non_accepting_final, guard_violation };

  Verdict verdict = Verdict::rejected;
  Reason reason = Reason::ok;
  std::vector<StateId> path;
  /// Event at which the walk failed; equals the trace length otherwise.
  std::size_t events_walked = 0;

  bool accepted() const noexcept { return verdict == Verdict::accepted; }
  friend bool operator==(const WalkResult&, const WalkResult&) = default;
};

std::string to_string(WalkResult::Reason reason);
std::string to_string(WalkMode mode);
std::optional<WalkMode> parse_walk_mode(std::string_view text);

/// Runs `trace` from the initial state.
///
/// In guarded mode each event must also satisfy its guard: the label that
/// actually follows it (or kEndClass for the last event) has to be among
/// the classes of the guard leaf reached by (label, values). Labels unknown
/// to the guard model are unconstrained.
WalkResult walk(const Efsm& model, const Trace& trace, WalkMode mode);

/// GraphViz digraph. Accepting states are double circles, the initial state
/// has an incoming arrow from an invisible point.
std::string export_dot(const Efsm& model);

std::string export_json(const Efsm& model);
/// Inverse of export_json. Throws ModelError on malformed documents,
/// dangling state references or a guard hash that does not match.
Efsm import_json(std::string_view json);

/// Witnesses ordered by count (descending), then by value.
std::vector<std::pair<ParamVector, std::size_t>> ranked_witnesses(const WitnessSet& witnesses);

} // namespace proofminer
