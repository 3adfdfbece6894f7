#include "proofminer/efsm.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

void build_csr(std::size_t n, const std::vector<Transition>& ts, bool by_source,
               std::vector<std::size_t>& offsets, std::vector<std::size_t>& index) {
  offsets.assign(n + 1, 0);
  for (const auto& t : ts)
    ++offsets[(by_source ? t.source : t.target) + 1];
  for (std::size_t i = 0; i < n; ++i)
    offsets[i + 1] += offsets[i];
  index.assign(ts.size(), 0);
  auto fill = offsets;
  for (std::size_t i = 0; i < ts.size(); ++i)
    index[fill[by_source ? ts[i].source : ts[i].target]++] = i;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string witness_text(const ParamVector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.params.size(); ++i) {
    if (i > 0)
      out += ", ";
    out += v.params[i];
  }
  if (v.combined)
    out += out.empty() ? ";" : " ;";
  return out;
}

} // namespace

Efsm::Efsm(std::size_t state_count, std::vector<StateId> accepting,
           std::vector<Transition> transitions, std::shared_ptr<const GuardModel> guards,
           StateId initial)
    : initial_(initial), accepting_(state_count, false), guards_(std::move(guards)) {
  if (state_count == 0)
    throw ModelError("a model needs at least one state");
  if (initial >= state_count)
    throw ModelError("initial state " + std::to_string(initial) + " out of range");
  for (auto s : accepting) {
    if (s >= state_count)
      throw ModelError("accepting state " + std::to_string(s) + " out of range");
    accepting_[s] = true;
  }
  for (const auto& t : transitions) {
    if (t.source >= state_count || t.target >= state_count)
      throw ModelError("transition " + std::to_string(t.source) + " -" + t.label.str() + "-> " +
                       std::to_string(t.target) + " references a missing state");
    if (t.label.empty())
      throw ModelError("transition with empty label");
  }
  std::sort(transitions.begin(), transitions.end(), [](const Transition& a, const Transition& b) {
    return std::tie(a.source, a.label, a.target) < std::tie(b.source, b.label, b.target);
  });
  for (auto& t : transitions) {
    if (!transitions_.empty()) {
      auto& last = transitions_.back();
      if (last.source == t.source && last.label == t.label && last.target == t.target) {
        for (auto& [v, n] : t.witnesses)
          last.witnesses[v] += n;
        continue;
      }
    }
    transitions_.push_back(std::move(t));
  }
  index();
}

void Efsm::index() {
  build_csr(state_count(), transitions_, true, out_offsets_, out_index_);
  build_csr(state_count(), transitions_, false, in_offsets_, in_index_);
}

std::vector<StateId> Efsm::accepting_states() const {
  std::vector<StateId> out;
  for (StateId s = 0; s < accepting_.size(); ++s)
    if (accepting_[s])
      out.push_back(s);
  return out;
}

std::span<const std::size_t> Efsm::outgoing(StateId s) const {
  return std::span(out_index_).subspan(out_offsets_.at(s), out_offsets_.at(s + 1) - out_offsets_[s]);
}

std::span<const std::size_t> Efsm::incoming(StateId s) const {
  return std::span(in_index_).subspan(in_offsets_.at(s), in_offsets_.at(s + 1) - in_offsets_[s]);
}

std::vector<std::size_t> Efsm::find(StateId s, const Label& label) const {
  std::vector<std::size_t> out;
  for (auto i : outgoing(s))
    if (transitions_[i].label == label)
      out.push_back(i);
  return out;
}

bool Efsm::is_label_deterministic() const {
  for (StateId s = 0; s < state_count(); ++s) {
    const auto out = outgoing(s);
    for (std::size_t i = 1; i < out.size(); ++i)
      if (transitions_[out[i]].label == transitions_[out[i - 1]].label)
        return false;
  }
  return true;
}

bool Efsm::is_connected() const {
  std::vector<bool> seen(state_count(), false);
  std::deque<StateId> queue{initial_};
  seen[initial_] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (auto i : outgoing(s)) {
      const auto t = transitions_[i].target;
      if (!seen[t]) {
        seen[t] = true;
        ++count;
        queue.push_back(t);
      }
    }
  }
  return count == state_count();
}

bool operator==(const Efsm& a, const Efsm& b) {
  if (a.initial_ != b.initial_ || a.accepting_ != b.accepting_ || a.transitions_ != b.transitions_)
    return false;
  if (!a.guards_ || !b.guards_)
    return !a.guards_ && !b.guards_;
  return *a.guards_ == *b.guards_;
}

Efsm build_pta(const Corpus& corpus, std::shared_ptr<const GuardModel> guards) {
  std::map<std::tuple<StateId, Label, ParamVector>, StateId> child;
  std::vector<Transition> transitions;
  std::map<std::tuple<StateId, Label, ParamVector>, std::size_t> edge_of;
  std::vector<StateId> accepting;
  StateId next = 1;

  for (const auto& trace : corpus.traces) {
    if (trace.polarity != Polarity::positive)
      continue;
    StateId cur = 0;
    for (const auto& e : trace.events) {
      auto key = std::make_tuple(cur, e.label, e.values);
      auto it = child.find(key);
      if (it == child.end()) {
        it = child.emplace(key, next++).first;
        edge_of.emplace(key, transitions.size());
        transitions.push_back(Transition{cur, e.label, it->second, {}});
      }
      ++transitions[edge_of.at(key)].witnesses[e.values];
      cur = it->second;
    }
    accepting.push_back(cur);
  }
  std::sort(accepting.begin(), accepting.end());
  accepting.erase(std::unique(accepting.begin(), accepting.end()), accepting.end());
  return Efsm(next, std::move(accepting), std::move(transitions), std::move(guards));
}

Efsm compact(const Efsm& model) {
  std::vector<bool> seen(model.state_count(), false);
  std::deque<StateId> queue{model.initial()};
  seen[model.initial()] = true;
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (auto i : model.outgoing(s)) {
      const auto t = model.transitions()[i].target;
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    }
  }
  // The initial state goes first, the rest keep their relative order.
  std::vector<StateId> renum(model.state_count(), 0);
  StateId next = 1;
  for (StateId s = 0; s < model.state_count(); ++s)
    if (seen[s] && s != model.initial())
      renum[s] = next++;
  renum[model.initial()] = 0;

  std::vector<StateId> accepting;
  for (auto s : model.accepting_states())
    if (seen[s])
      accepting.push_back(renum[s]);
  std::vector<Transition> transitions;
  for (const auto& t : model.transitions())
    if (seen[t.source])
      transitions.push_back(Transition{renum[t.source], t.label, renum[t.target], t.witnesses});
  return Efsm(next, std::move(accepting), std::move(transitions), model.shared_guards(), 0);
}

std::string to_string(WalkResult::Reason reason) {
  switch (reason) {
  case WalkResult::Reason::ok:
    return "ok";
  case WalkResult::Reason::missing_transition:
    return "missing-transition";
  case WalkResult::Reason::non_accepting_final:
    return "non-accepting-final";
  case WalkResult::Reason::guard_violation:
    return "guard-violation";
  }
  return "?";
}

std::string to_string(WalkMode mode) {
  return mode == WalkMode::guarded ? "guarded" : "control-only";
}

std::optional<WalkMode> parse_walk_mode(std::string_view text) {
  if (text == "guarded")
    return WalkMode::guarded;
  if (text == "control-only" || text == "control")
    return WalkMode::control_only;
  return std::nullopt;
}

WalkResult walk(const Efsm& model, const Trace& trace, WalkMode mode) {
  WalkResult result;
  StateId cur = model.initial();
  result.path.push_back(cur);
  const GuardModel* guards = mode == WalkMode::guarded ? model.guards() : nullptr;
  const auto& events = trace.events;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto candidates = model.find(cur, e.label);
    if (candidates.empty()) {
      result.reason = WalkResult::Reason::missing_transition;
      result.events_walked = i;
      return result;
    }
    std::size_t chosen = candidates.front();
    if (candidates.size() > 1) {
      for (auto c : candidates) {
        if (model.transitions()[c].witnesses.contains(e.values)) {
          chosen = c;
          break;
        }
      }
    }
    cur = model.transitions()[chosen].target;
    result.path.push_back(cur);

    if (guards) {
      if (const auto* leaf = guards->leaf(e.label, e.values)) {
        const std::string& successor = i + 1 < events.size() ? events[i + 1].label.str() : kEndClass;
        if (!leaf->distribution.contains(successor)) {
          result.reason = WalkResult::Reason::guard_violation;
          result.events_walked = i;
          return result;
        }
      }
    }
  }
  result.events_walked = events.size();
  if (!model.is_accepting(cur)) {
    result.reason = WalkResult::Reason::non_accepting_final;
    return result;
  }
  result.verdict = WalkResult::Verdict::accepted;
  result.reason = WalkResult::Reason::ok;
  return result;
}

std::vector<std::pair<ParamVector, std::size_t>> ranked_witnesses(const WitnessSet& witnesses) {
  std::vector<std::pair<ParamVector, std::size_t>> out(witnesses.begin(), witnesses.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::string export_dot(const Efsm& model) {
  std::string out = "digraph efsm {\n  rankdir=LR;\n  node [shape=circle];\n";
  out += "  __start [shape=point];\n";
  out += "  __start -> s" + std::to_string(model.initial()) + ";\n";
  for (StateId s = 0; s < model.state_count(); ++s) {
    out += "  s" + std::to_string(s);
    out += model.is_accepting(s) ? " [shape=doublecircle];\n" : ";\n";
  }
  for (const auto& t : model.transitions()) {
    std::string label = t.label.str();
    const auto ranked = ranked_witnesses(t.witnesses);
    std::vector<std::string> shown;
    for (const auto& [v, _] : ranked) {
      auto text = witness_text(v);
      if (!text.empty())
        shown.push_back(std::move(text));
    }
    if (!shown.empty()) {
      label += " [";
      for (std::size_t i = 0; i < shown.size() && i < 3; ++i) {
        if (i > 0)
          label += " | ";
        label += shown[i];
      }
      if (shown.size() > 3)
        label += " | \xE2\x80\xA6"; // …
      label += "]";
    }
    out += "  s" + std::to_string(t.source) + " -> s" + std::to_string(t.target) + " [label=\"" +
           dot_escape(label) + "\"];\n";
  }
  out += "}\n";
  return out;
}

std::string export_json(const Efsm& model) {
  ojson doc;
  doc["version"] = 1;
  doc["states"] = model.state_count();
  doc["initial"] = model.initial();
  doc["accepting"] = model.accepting_states();
  doc["transitions"] = ojson::array();
  for (const auto& t : model.transitions()) {
    ojson jt;
    jt["source"] = t.source;
    jt["label"] = t.label.str();
    jt["target"] = t.target;
    jt["witnesses"] = ojson::array();
    for (const auto& [v, n] : t.witnesses) {
      ojson w;
      w["params"] = v.params;
      w["combined"] = v.combined;
      w["count"] = n;
      jt["witnesses"].push_back(std::move(w));
    }
    doc["transitions"].push_back(std::move(jt));
  }
  if (const auto* g = model.guards()) {
    doc["guardHash"] = g->content_hash();
    doc["guards"] = ojson::parse(g->to_json());
  } else {
    doc["guardHash"] = nullptr;
  }
  return doc.dump();
}

Efsm import_json(std::string_view json) {
  ojson doc;
  try {
    doc = ojson::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("version", 0) != 1)
      throw ModelError("unsupported model document version");
    const auto states = doc.at("states").get<std::size_t>();
    const auto initial = doc.at("initial").get<StateId>();
    auto accepting = doc.at("accepting").get<std::vector<StateId>>();
    std::vector<Transition> transitions;
    for (const auto& jt : doc.at("transitions")) {
      Transition t;
      t.source = jt.at("source").get<StateId>();
      t.target = jt.at("target").get<StateId>();
      t.label = Label(jt.at("label").get<std::string>());
      for (const auto& w : jt.at("witnesses")) {
        ParamVector v;
        v.params = w.at("params").get<std::vector<std::string>>();
        v.combined = w.value("combined", false);
        t.witnesses[v] += w.value("count", std::size_t{1});
      }
      transitions.push_back(std::move(t));
    }

    std::shared_ptr<const GuardModel> guards;
    const bool has_hash = doc.contains("guardHash") && !doc["guardHash"].is_null();
    if (doc.contains("guards") && !doc["guards"].is_null()) {
      auto g = std::make_shared<GuardModel>(GuardModel::from_json(doc["guards"].dump()));
      if (!has_hash || doc["guardHash"].get<std::string>() != g->content_hash())
        throw ModelError("guard hash mismatch");
      guards = std::move(g);
    } else if (has_hash) {
      throw ModelError("guardHash given but guard model missing");
    }
    return Efsm(states, std::move(accepting), std::move(transitions), std::move(guards), initial);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  } catch (const TraceError& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ModelError*>(&e))
      throw;
    throw ModelError(e.what());
  }
}

} // namespace proofminer
