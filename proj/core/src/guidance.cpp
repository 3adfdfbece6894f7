#include "proofminer/guidance.hpp"

#include <algorithm>

#include "proofminer/guard_learner.hpp"
#include "proofminer/proof_parser.hpp"

namespace proofminer {

GuidanceSession::GuidanceSession(std::shared_ptr<const Efsm> model, std::string id)
    : model_(std::move(model)), id_(std::move(id)) {
  if (!model_)
    throw std::invalid_argument("session needs a model");
  cursor_ = model_->initial();
}

GuidanceSession open_session(std::shared_ptr<const Efsm> model) {
  return GuidanceSession(std::move(model));
}

std::vector<std::string> GuidanceSession::available_labels() const {
  std::vector<std::string> out;
  for (auto i : model_->outgoing(cursor_))
    out.push_back(model_->transitions()[i].label.str());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Options GuidanceSession::options() const {
  Options o;
  o.state = cursor_;
  o.can_finish = model_->is_accepting(cursor_);
  for (auto i : model_->outgoing(cursor_)) {
    const auto& t = model_->transitions()[i];
    Suggestion s;
    s.label = t.label;
    s.target = t.target;
    s.leads_to_accepting = model_->is_accepting(t.target);
    for (const auto& [v, n] : ranked_witnesses(t.witnesses)) {
      s.weight += n;
      s.combined_hint = s.combined_hint || v.combined;
      if (!v.params.empty())
        s.parameter_candidates.emplace_back(v, n);
    }
    o.suggestions.push_back(std::move(s));
  }
  std::stable_sort(o.suggestions.begin(), o.suggestions.end(),
                   [](const Suggestion& a, const Suggestion& b) {
                     if (a.weight != b.weight)
                       return a.weight > b.weight;
                     return a.label < b.label;
                   });
  return o;
}

StepOutcome GuidanceSession::step(const Label& label, const ParamVector& values) {
  if (label.is_zero_param() != values.params.empty())
    throw GuidanceError(label.is_zero_param()
                            ? "label " + label.str() + " takes no parameters"
                            : "label " + label.str() + " needs parameters",
                        available_labels());
  const auto found = model_->find(cursor_, label);
  if (found.empty())
    throw GuidanceError("no transition labelled " + label.str() + " from state " +
                            std::to_string(cursor_),
                        available_labels());
  cursor_ = model_->transitions()[found.front()].target;
  history_.push_back(TraceEvent{label, values});

  StepOutcome out;
  out.state = cursor_;
  out.accepting = model_->is_accepting(cursor_);
  if (const auto* guards = model_->guards()) {
    const auto p = guards->predict(label, values);
    if (p.kind == Prediction::Kind::label && model_->find(cursor_, Label(p.label)).empty())
      out.advisory = "guard expects " + p.label + " next, which this state does not offer";
    else if (p.kind == Prediction::Kind::end && !out.accepting)
      out.advisory = "guard expects the proof to end here, but this state is not accepting";
  }
  return out;
}

StepOutcome GuidanceSession::step(const std::string& label, std::vector<std::string> params,
                                  bool combined) {
  if (!Label::is_valid(label))
    throw GuidanceError("invalid label \"" + label + "\"", available_labels());
  Label chosen(label);
  if (params.empty() && !chosen.is_zero_param()) {
    const auto zero = label + "_0";
    if (Label::is_valid(zero))
      chosen = Label(zero);
  }
  return step(chosen, ParamVector{std::move(params), combined});
}

StateId GuidanceSession::replay() const {
  StateId s = model_->initial();
  for (const auto& e : history_) {
    const auto found = model_->find(s, e.label);
    if (found.empty())
      throw std::logic_error("session history does not replay");
    s = model_->transitions()[found.front()].target;
  }
  return s;
}

void GuidanceSession::undo() {
  if (history_.empty())
    throw GuidanceError("nothing to undo", available_labels());
  history_.pop_back();
  cursor_ = replay();
}

std::string GuidanceSession::render_script() const {
  return proofminer::render_script(history_);
}

std::string SessionManager::add_model(std::shared_ptr<const Efsm> model) {
  if (!model)
    throw std::invalid_argument("null model");
  std::lock_guard lock(mutex_);
  auto id = "m" + std::to_string(next_model_++);
  models_.emplace(id, std::move(model));
  return id;
}

std::shared_ptr<const Efsm> SessionManager::model(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::string SessionManager::open(const std::string& model_id) {
  expire(Clock::now());
  std::lock_guard lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end())
    throw GuidanceError("unknown model " + model_id);
  auto id = "s" + std::to_string(next_session_++);
  sessions_.emplace(id, std::make_shared<Entry>(GuidanceSession(it->second, id)));
  return id;
}

std::shared_ptr<SessionManager::Entry> SessionManager::lookup(const std::string& id) {
  expire(Clock::now());
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw GuidanceError("unknown session " + id);
  return it->second;
}

std::size_t SessionManager::expire(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    auto& entry = *it->second;
    std::unique_lock session_lock(entry.mutex, std::try_to_lock);
    // A session in use is not idle.
    if (session_lock.owns_lock() && now - entry.last_used > ttl_) {
      session_lock.unlock();
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

} // namespace proofminer
