#include "proofminer/inference.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

// Guard leaves entering a state, plus the start context of the initial
// state. Each context knows which successors its training data allows.
class ContextTable {
public:
  explicit ContextTable(const GuardModel* guards) : guards_(guards) {
    if (guards_) {
      std::vector<std::string> support;
      for (const auto& [cls, _] : guards_->initial())
        support.push_back(cls);
      supports_.push_back(std::move(support));
    }
  }

  std::optional<int> start() const {
    if (!guards_)
      return std::nullopt;
    return 0;
  }

  std::optional<int> context(const Label& label, const ParamVector& values) {
    if (!guards_)
      return std::nullopt;
    const auto leaf = guards_->leaf_index(label, values);
    if (!leaf)
      return std::nullopt;
    auto key = std::make_pair(label, *leaf);
    auto it = ids_.find(key);
    if (it == ids_.end()) {
      std::vector<std::string> support;
      for (const auto& [cls, _] : guards_->trees().at(label).nodes()[*leaf].distribution)
        support.push_back(cls);
      it = ids_.emplace(key, static_cast<int>(supports_.size())).first;
      supports_.push_back(std::move(support));
    }
    return it->second;
  }

  // Both arguments sorted.
  std::size_t unexplained(const std::vector<int>& contexts,
                          const std::vector<std::string>& successors) const {
    std::size_t n = 0;
    for (int c : contexts) {
      const auto& support = supports_[c];
      for (const auto& s : successors)
        if (!std::binary_search(support.begin(), support.end(), s))
          ++n;
    }
    return n;
  }

private:
  const GuardModel* guards_;
  std::map<std::pair<Label, std::size_t>, int> ids_;
  std::vector<std::vector<std::string>> supports_;
};

template <typename T>
void sorted_union(std::vector<T>& into, const std::vector<T>& from) {
  std::vector<T> out;
  out.reserve(into.size() + from.size());
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
  into = std::move(out);
}

// Label-deterministic working copy of a model. State ids stay fixed; merged
// states are marked dead.
struct Graph {
  std::shared_ptr<const GuardModel> guards;
  ContextTable contexts{nullptr};
  StateId initial = 0;
  std::vector<char> alive;
  std::vector<char> accepting;
  std::vector<std::map<Label, StateId>> out;
  std::vector<std::map<Label, WitnessSet>> witnesses;
  std::vector<std::vector<int>> ctx;
  std::vector<std::size_t> unexplained;

  std::size_t size() const { return alive.size(); }

  std::vector<std::string> successors(const std::map<Label, StateId>& edges, bool acc) const {
    std::vector<std::string> s;
    s.reserve(edges.size() + 1);
    for (const auto& [l, _] : edges)
      s.push_back(l.str());
    if (acc)
      s.push_back(kEndClass);
    std::sort(s.begin(), s.end());
    return s;
  }

  void refresh(StateId s) {
    unexplained[s] = contexts.unexplained(ctx[s], successors(out[s], accepting[s]));
  }
};

// Same-label edges found while reading a nondeterministic model; they still
// have to be folded together.
using PendingPairs = std::vector<std::pair<StateId, StateId>>;

Graph read_model(const Efsm& model, PendingPairs& pending) {
  Graph g;
  g.guards = model.shared_guards();
  g.contexts = ContextTable(g.guards.get());
  const auto n = model.state_count();
  g.initial = model.initial();
  g.alive.assign(n, 1);
  g.accepting.assign(n, 0);
  g.out.resize(n);
  g.witnesses.resize(n);
  g.ctx.resize(n);
  g.unexplained.assign(n, 0);
  for (StateId s = 0; s < n; ++s)
    g.accepting[s] = model.is_accepting(s);
  if (auto start = g.contexts.start())
    g.ctx[g.initial].push_back(*start);

  for (const auto& t : model.transitions()) {
    auto [it, fresh] = g.out[t.source].emplace(t.label, t.target);
    if (!fresh && it->second != t.target)
      pending.emplace_back(it->second, t.target);
    auto& w = g.witnesses[t.source][t.label];
    for (const auto& [v, count] : t.witnesses) {
      w[v] += count;
      if (auto c = g.contexts.context(t.label, v))
        g.ctx[t.target].push_back(*c);
    }
  }
  for (StateId s = 0; s < n; ++s) {
    auto& c = g.ctx[s];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    g.refresh(s);
  }
  return g;
}

Efsm to_efsm(const Graph& g) {
  std::vector<StateId> accepting;
  std::vector<Transition> transitions;
  for (StateId s = 0; s < g.size(); ++s) {
    if (!g.alive[s])
      continue;
    if (g.accepting[s])
      accepting.push_back(s);
    for (const auto& [label, target] : g.out[s]) {
      const auto& w = g.witnesses[s];
      auto it = w.find(label);
      transitions.push_back(Transition{s, label, target, it == w.end() ? WitnessSet{} : it->second});
    }
  }
  return Efsm(g.size(), std::move(accepting), std::move(transitions), g.guards, g.initial);
}

// Union-find overlay on a Graph. The smaller id of two merged states is the
// representative, so the initial state keeps its id.
class Fold {
public:
  explicit Fold(const Graph& g) : g_(g) {}

  StateId find(StateId s) const {
    auto it = parent_.find(s);
    while (it != parent_.end()) {
      s = it->second;
      it = parent_.find(s);
    }
    return s;
  }

  void unite(StateId a, StateId b) {
    std::vector<std::pair<StateId, StateId>> work{{a, b}};
    while (!work.empty()) {
      auto [x, y] = work.back();
      work.pop_back();
      x = find(x);
      y = find(y);
      if (x == y)
        continue;
      const auto rep = std::min(x, y);
      const auto other = std::max(x, y);
      auto merged = edges(rep);
      for (const auto& [label, target] : edges(other)) {
        auto [it, fresh] = merged.emplace(label, target);
        if (!fresh) {
          ++score_;
          work.emplace_back(it->second, target);
        }
      }
      auto mem = take_members(rep);
      auto other_mem = take_members(other);
      mem.insert(mem.end(), other_mem.begin(), other_mem.end());
      members_[rep] = std::move(mem);
      out_[rep] = std::move(merged);
      out_.erase(other);
      parent_[other] = rep;
    }
  }

  int score() const noexcept { return score_; }

  const std::unordered_map<StateId, std::vector<StateId>>& groups() const noexcept {
    return members_;
  }

  const std::map<Label, StateId>& edges(StateId rep) const {
    auto it = out_.find(rep);
    return it == out_.end() ? g_.out[rep] : it->second;
  }

  struct GroupSummary {
    std::vector<int> ctx;
    bool accepting = false;
    std::size_t unexplained = 0;
  };

  GroupSummary summarize(StateId rep, const std::vector<StateId>& members) const {
    GroupSummary s;
    for (auto m : members) {
      sorted_union(s.ctx, g_.ctx[m]);
      s.accepting = s.accepting || g_.accepting[m];
    }
    s.unexplained = g_.contexts.unexplained(s.ctx, g_.successors(edges(rep), s.accepting));
    return s;
  }

  // Change of the unexplained-successor count if this fold were committed.
  long delta_unexplained() const {
    long delta = 0;
    for (const auto& [rep, members] : members_) {
      delta += static_cast<long>(summarize(rep, members).unexplained);
      for (auto m : members)
        delta -= static_cast<long>(g_.unexplained[m]);
    }
    return delta;
  }

private:
  std::vector<StateId> take_members(StateId rep) {
    auto it = members_.find(rep);
    if (it == members_.end())
      return {rep};
    auto m = std::move(it->second);
    members_.erase(it);
    return m;
  }

  const Graph& g_;
  std::unordered_map<StateId, StateId> parent_;
  std::unordered_map<StateId, std::vector<StateId>> members_;
  std::unordered_map<StateId, std::map<Label, StateId>> out_;
  int score_ = 0;
};

void commit(Graph& g, const Fold& fold) {
  std::vector<std::pair<StateId, Fold::GroupSummary>> summaries;
  for (const auto& [rep, members] : fold.groups())
    summaries.emplace_back(rep, fold.summarize(rep, members));

  for (const auto& [rep, members] : fold.groups()) {
    auto edges = fold.edges(rep);
    std::map<Label, WitnessSet> wit;
    for (auto m : members) {
      for (auto& [label, ws] : g.witnesses[m])
        for (const auto& [v, n] : ws)
          wit[label][v] += n;
      if (m != rep) {
        g.alive[m] = 0;
        g.out[m].clear();
        g.witnesses[m].clear();
        g.ctx[m].clear();
        g.unexplained[m] = 0;
        g.accepting[m] = 0;
      }
    }
    g.out[rep] = std::move(edges);
    g.witnesses[rep] = std::move(wit);
  }
  for (auto& [rep, summary] : summaries) {
    g.ctx[rep] = std::move(summary.ctx);
    g.accepting[rep] = summary.accepting;
    g.unexplained[rep] = summary.unexplained;
  }
  for (StateId s = 0; s < g.size(); ++s)
    if (g.alive[s])
      for (auto& [_, target] : g.out[s])
        target = fold.find(target);
}

void fold_pending(Graph& g, const PendingPairs& pending) {
  if (pending.empty())
    return;
  Fold fold(g);
  for (const auto& [a, b] : pending)
    fold.unite(a, b);
  commit(g, fold);
}

void check_state(const Efsm& model, StateId s) {
  if (s >= model.state_count())
    throw std::out_of_range("unknown state " + std::to_string(s));
}

} // namespace

InferenceConfig InferenceConfig::from_json(std::string_view json) {
  ojson doc;
  try {
    doc = ojson::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument("config must be a JSON object");
  InferenceConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "mergeThreshold") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        throw std::invalid_argument("mergeThreshold must be a non-negative integer");
      cfg.merge_threshold = value.get<int>();
    } else if (key == "minLeaf") {
      if (!value.is_number_integer() || value.get<long long>() < 1)
        throw std::invalid_argument("minLeaf must be a positive integer");
      cfg.min_leaf = value.get<std::size_t>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0))
        throw std::invalid_argument("seed must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("unknown config key \"" + key + "\"");
    }
  }
  return cfg;
}

std::string InferenceConfig::to_json() const {
  ojson doc;
  doc["mergeThreshold"] = merge_threshold;
  doc["minLeaf"] = min_leaf;
  doc["seed"] = seed;
  return doc.dump();
}

std::size_t check_guard_consistency(const Efsm& model) {
  const auto* guards = model.guards();
  if (!guards)
    return 0;
  std::size_t violations = 0;
  for (const auto& t : model.transitions()) {
    for (const auto& [v, _] : t.witnesses) {
      const auto p = guards->predict(t.label, v);
      if (p.kind == Prediction::Kind::end) {
        if (!model.is_accepting(t.target))
          ++violations;
      } else if (p.kind == Prediction::Kind::label) {
        if (model.find(t.target, Label(p.label)).empty())
          ++violations;
      }
    }
  }
  return violations;
}

std::size_t count_unexplained_successors(const Efsm& model) {
  ContextTable contexts(model.guards());
  std::vector<std::set<int>> ctx(model.state_count());
  if (auto start = contexts.start())
    ctx[model.initial()].insert(*start);
  for (const auto& t : model.transitions())
    for (const auto& [v, _] : t.witnesses)
      if (auto c = contexts.context(t.label, v))
        ctx[t.target].insert(*c);

  std::size_t n = 0;
  for (StateId s = 0; s < model.state_count(); ++s) {
    std::set<std::string> succ;
    for (auto i : model.outgoing(s))
      succ.insert(model.transitions()[i].label.str());
    if (model.is_accepting(s))
      succ.insert(kEndClass);
    n += contexts.unexplained(std::vector<int>(ctx[s].begin(), ctx[s].end()),
                              std::vector<std::string>(succ.begin(), succ.end()));
  }
  return n;
}

std::optional<int> score_merge(const Efsm& model, StateId a, StateId b) {
  check_state(model, a);
  check_state(model, b);
  if (a == b)
    throw std::invalid_argument("cannot score a state against itself");
  PendingPairs pending;
  const auto g = read_model(model, pending);
  if (!pending.empty())
    throw std::invalid_argument("score_merge needs a label-deterministic model");
  Fold fold(g);
  fold.unite(a, b);
  if (fold.delta_unexplained() > 0)
    return std::nullopt;
  return fold.score();
}

Efsm determinize(const Efsm& model) {
  PendingPairs pending;
  auto g = read_model(model, pending);
  fold_pending(g, pending);
  return compact(to_efsm(g));
}

Efsm merge(const Efsm& model, StateId a, StateId b) {
  check_state(model, a);
  check_state(model, b);
  const auto before = determinize(model);
  PendingPairs pending;
  auto g = read_model(model, pending);
  Fold fold(g);
  for (const auto& [x, y] : pending)
    fold.unite(x, y);
  fold.unite(a, b);
  commit(g, fold);
  auto result = compact(to_efsm(g));
  if (check_guard_consistency(result) > check_guard_consistency(before) ||
      count_unexplained_successors(result) > count_unexplained_successors(before))
    throw IncompatibleMerge("merging " + std::to_string(a) + " and " + std::to_string(b) +
                            " contradicts the guards");
  return result;
}

Efsm infer(const Corpus& corpus, const InferenceConfig& config) {
  const bool any = std::any_of(corpus.traces.begin(), corpus.traces.end(),
                               [](const Trace& t) { return t.polarity == Polarity::positive; });
  if (!any)
    throw InferenceError("corpus has no positive traces");
  auto guards = std::make_shared<const GuardModel>(learn_guards(corpus, config.min_leaf));
  return infer(corpus, std::move(guards), config);
}

Efsm infer(const Corpus& corpus, std::shared_ptr<const GuardModel> guards,
           const InferenceConfig& config) {
  const bool any = std::any_of(corpus.traces.begin(), corpus.traces.end(),
                               [](const Trace& t) { return t.polarity == Polarity::positive; });
  if (!any)
    throw InferenceError("corpus has no positive traces");
  if (config.merge_threshold < 0)
    throw InferenceError("merge threshold must be non-negative");

  PendingPairs pending;
  auto g = read_model(build_pta(corpus, std::move(guards)), pending);
  fold_pending(g, pending);

  std::set<StateId> red{g.initial};
  // A fold only reads the states it groups, so a cached score stays valid
  // until a commit touches one of them.
  std::map<std::pair<StateId, StateId>, std::optional<int>> cache;
  std::unordered_map<StateId, std::vector<std::pair<StateId, StateId>>> readers;

  while (true) {
    std::set<StateId> blue;
    for (auto r : red)
      for (const auto& [_, target] : g.out[r])
        if (!red.contains(target))
          blue.insert(target);
    if (blue.empty())
      break;

    std::optional<MergeCandidate> best;
    std::optional<StateId> promote;
    for (auto b : blue) {
      bool mergeable = false;
      for (auto r : red) {
        auto [it, fresh] = cache.try_emplace({r, b});
        if (fresh) {
          Fold fold(g);
          fold.unite(r, b);
          if (fold.delta_unexplained() <= 0)
            it->second = fold.score();
          for (const auto& [_, members] : fold.groups())
            for (auto m : members)
              readers[m].emplace_back(r, b);
        }
        const auto& score = it->second;
        if (!score || *score < config.merge_threshold)
          continue;
        mergeable = true;
        const MergeCandidate cand{r, b, *score};
        if (!best || cand.score > best->score ||
            (cand.score == best->score &&
             std::tie(cand.red, cand.blue) < std::tie(best->red, best->blue)))
          best = cand;
      }
      if (!mergeable) {
        promote = b;
        break;
      }
    }

    if (promote) {
      red.insert(*promote);
      continue;
    }
    Fold fold(g);
    fold.unite(best->red, best->blue);
    commit(g, fold);
    for (const auto& [_, members] : fold.groups()) {
      for (auto m : members) {
        auto it = readers.find(m);
        if (it == readers.end())
          continue;
        for (const auto& key : it->second)
          cache.erase(key);
        readers.erase(it);
      }
    }
    std::set<StateId> remapped;
    for (auto r : red)
      remapped.insert(fold.find(r));
    red = std::move(remapped);
    if (config.on_commit)
      config.on_commit(to_efsm(g));
  }
  return compact(to_efsm(g));
}

} // namespace proofminer
