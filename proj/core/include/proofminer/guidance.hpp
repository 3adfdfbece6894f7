// Interactive walks over an inferred model, building up a proof script.

#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proofminer/efsm.hpp"
#include "proofminer/trace.hpp"

namespace proofminer {

class GuidanceError : public std::runtime_error {
public:
  GuidanceError(const std::string& what, std::vector<std::string> available = {})
      : std::runtime_error(what), available_(std::move(available)) {}

  const std::vector<std::string>& available() const noexcept { return available_; }

private:
  std::vector<std::string> available_;
};

struct Suggestion {
  Label label;
  StateId target = 0;
  /// Witnesses ordered by training frequency, then by value; empty for
  /// zero-parameter labels.
  std::vector<std::pair<ParamVector, std::size_t>> parameter_candidates;
  bool combined_hint = false;
  bool leads_to_accepting = false;
  /// Total witness count of the transition.
  std::size_t weight = 0;
};

struct Options {
  StateId state = 0;
  bool can_finish = false;
  /// By weight (descending), then label.
  std::vector<Suggestion> suggestions;
};

struct StepOutcome {
  StateId state = 0;
  bool accepting = false;
  /// Set when the guard of the step predicts a label the new state cannot take.
  std::optional<std::string> advisory;
};

class GuidanceSession {
public:
  explicit GuidanceSession(std::shared_ptr<const Efsm> model, std::string id = {});

  const std::string& id() const noexcept { return id_; }
  const Efsm& model() const noexcept { return *model_; }
  StateId cursor() const noexcept { return cursor_; }
  bool accepting() const { return model_->is_accepting(cursor_); }
  const std::vector<TraceEvent>& history() const noexcept { return history_; }

  Options options() const;

  /// Throws GuidanceError, listing the labels available at the cursor, if
  /// there is no such transition or the parameters do not fit the label.
  StepOutcome step(const Label& label, const ParamVector& values);

  /// Like step, but a bare method name with no parameters also selects its
  /// zero-parameter label.
  StepOutcome step(const std::string& label, std::vector<std::string> params, bool combined);

  /// Drops the last event. Throws GuidanceError on an empty history.
  void undo();

  std::string render_script() const;

  /// Labels leaving the cursor, sorted.
  std::vector<std::string> available_labels() const;

private:
  StateId replay() const;

  std::shared_ptr<const Efsm> model_;
  std::string id_;
  StateId cursor_ = 0;
  std::vector<TraceEvent> history_;
};

GuidanceSession open_session(std::shared_ptr<const Efsm> model);

/// Loaded models and their open sessions. Sessions idle for longer than the
/// TTL are dropped. Each session is used by one caller at a time.
class SessionManager {
public:
  using Clock = std::chrono::steady_clock;

  explicit SessionManager(std::chrono::seconds ttl = std::chrono::hours(1)) : ttl_(ttl) {}

  std::string add_model(std::shared_ptr<const Efsm> model);
  /// nullptr for unknown ids.
  std::shared_ptr<const Efsm> model(const std::string& id) const;

  /// Throws GuidanceError for an unknown model.
  std::string open(const std::string& model_id);

  /// Runs `f(session)` under the session's lock. Throws GuidanceError for
  /// an unknown or expired session.
  template <typename F>
  auto with_session(const std::string& id, F&& f) {
    auto entry = lookup(id);
    std::lock_guard lock(entry->mutex);
    entry->last_used = Clock::now();
    return f(entry->session);
  }

  /// Removes sessions idle since before `now - ttl`; returns how many.
  std::size_t expire(Clock::time_point now);
  std::size_t session_count() const;

private:
  struct Entry {
    explicit Entry(GuidanceSession s) : session(std::move(s)), last_used(Clock::now()) {}
    std::mutex mutex;
    GuidanceSession session;
    Clock::time_point last_used;
  };

  std::shared_ptr<Entry> lookup(const std::string& id);

  std::chrono::seconds ttl_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Efsm>> models_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_model_ = 1;
  std::size_t next_session_ = 1;
};

} // namespace proofminer
