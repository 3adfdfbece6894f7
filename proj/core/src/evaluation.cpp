#include "proofminer/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <limits>

#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

bool has_distinct_events(const Trace& t) {
  for (std::size_t i = 1; i < t.events.size(); ++i)
    if (!(t.events[i] == t.events[0]))
      return true;
  return false;
}

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::string format_metric(const std::optional<double>& v) {
  if (!v)
    return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0)
    return std::nullopt;
  return sum / static_cast<double>(n);
}

} // namespace

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0)
    throw std::invalid_argument("Rng::below needs a positive bound");
  // 2^64 mod n; values below it would bias the remainder.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x = engine_();
  while (x < threshold)
    x = engine_();
  return x % n;
}

FoldPlan make_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const auto n = corpus.traces.size();
  if (k < 2)
    throw EvaluationError("k must be at least 2");
  if (k > n)
    throw EvaluationError("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                          " traces of the corpus");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = i % k;
    plan.folds[f].push_back(order[i]);
    plan.assignment[corpus.traces[order[i]].name] = f;
  }
  for (auto& f : plan.folds)
    std::sort(f.begin(), f.end());
  return plan;
}

Trace mutate_negative(const Trace& trace, std::uint64_t seed) {
  if (trace.events.size() < 2)
    throw EvaluationError("trace \"" + trace.name + "\" has fewer than two events");
  if (!has_distinct_events(trace))
    throw EvaluationError("trace \"" + trace.name + "\" has no reordering that differs");
  Rng rng(seed);
  Trace out = trace;
  do {
    out.events = trace.events;
    rng.shuffle(out.events);
  } while (out.events == trace.events);
  out.name = trace.name + "#neg";
  out.polarity = Polarity::negative;
  return out;
}

std::vector<Trace> build_negatives(const Corpus& corpus, const Corpus& foreign, std::size_t count,
                                   std::uint64_t seed) {
  if (count == 0)
    throw EvaluationError("negative count must be at least 1");
  const auto pta = build_pta(corpus);

  std::vector<std::size_t> mutable_traces;
  for (std::size_t i = 0; i < corpus.traces.size(); ++i)
    if (corpus.traces[i].polarity == Polarity::positive && has_distinct_events(corpus.traces[i]))
      mutable_traces.push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> foreign_order;
  for (std::size_t i = 0; i < foreign.traces.size(); ++i)
    if (!foreign.traces[i].events.empty())
      foreign_order.push_back(i);
  rng.shuffle(foreign_order);
  std::size_t next_foreign = 0;

  std::vector<Trace> out;
  const std::size_t max_draws = 10 * count;
  std::size_t draws = 0;
  bool foreign_turn = false;
  while (out.size() < count && draws < max_draws) {
    ++draws;
    const bool use_foreign = foreign_turn && next_foreign < foreign_order.size();
    foreign_turn = !foreign_turn;
    Trace candidate;
    if (use_foreign) {
      candidate = foreign.traces[foreign_order[next_foreign++]];
      candidate.polarity = Polarity::negative;
    } else {
      if (mutable_traces.empty())
        continue;
      const auto& source = corpus.traces[mutable_traces[rng.below(mutable_traces.size())]];
      candidate = mutate_negative(source, rng.next());
    }
    if (walk(pta, candidate, WalkMode::control_only).accepted())
      continue;
    out.push_back(std::move(candidate));
  }
  if (out.size() < count)
    throw EvaluationError("only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                          " negatives after " + std::to_string(draws) + " draws (short by " +
                          std::to_string(count - out.size()) + ")");
  disambiguate_names(out);
  return out;
}

Metrics metrics(const ConfusionMatrix& m) {
  Metrics r;
  if (m.tp + m.fn > 0)
    r.sensitivity = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.tn + m.fp > 0)
    r.specificity = static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  return r;
}

EvalReport cross_validate(const Corpus& corpus, const std::vector<Trace>& negatives, std::size_t k,
                          std::uint64_t seed, const InferenceConfig& config, WalkMode mode) {
  if (negatives.empty())
    throw EvaluationError("no negative traces");
  Corpus positives;
  positives.source = corpus.source;
  positives.lines = corpus.lines;
  for (const auto& t : corpus.traces)
    if (t.polarity == Polarity::positive)
      positives.traces.push_back(t);
  const auto plan = make_folds(positives, k, seed);

  auto run_fold = [&](std::size_t f) {
    Corpus training;
    const auto& held = plan.folds[f];
    for (std::size_t i = 0; i < positives.traces.size(); ++i)
      if (!std::binary_search(held.begin(), held.end(), i))
        training.traces.push_back(positives.traces[i]);
    FoldResult r;
    r.training_traces = training.traces.size();
    Efsm model;
    try {
      model = infer(training, config);
    } catch (const std::exception& e) {
      throw EvaluationError(e.what(), f);
    }
    r.model_states = model.state_count();
    for (auto i : held) {
      if (walk(model, positives.traces[i], mode).accepted())
        ++r.matrix.tp;
      else
        ++r.matrix.fn;
    }
    for (const auto& neg : negatives) {
      if (walk(model, neg, mode).accepted())
        ++r.matrix.fp;
      else
        ++r.matrix.tn;
    }
    r.metrics = metrics(r.matrix);
    return r;
  };

  EvalReport report;
  report.data_set = corpus.source.empty() ? "corpus" : corpus.source;
  report.proofs = positives.traces.size();
  report.lines = corpus.lines;
  report.k = k;
  report.seed = seed;
  report.mode = mode;
  report.merge_threshold = config.merge_threshold;
  report.min_leaf = config.min_leaf;
  report.negatives = negatives.size();

  if (config.on_commit) {
    for (std::size_t f = 0; f < k; ++f)
      report.folds.push_back(run_fold(f));
  } else {
    std::vector<std::future<FoldResult>> jobs;
    for (std::size_t f = 0; f < k; ++f)
      jobs.push_back(std::async(std::launch::async, run_fold, f));
    for (auto& j : jobs)
      report.folds.push_back(j.get());
  }

  std::vector<std::optional<double>> sens, spec;
  for (const auto& f : report.folds) {
    sens.push_back(f.metrics.sensitivity);
    spec.push_back(f.metrics.specificity);
  }
  report.mean.sensitivity = mean_of(sens);
  report.mean.specificity = mean_of(spec);
  return report;
}

std::string EvalReport::to_json() const {
  ojson doc;
  doc["dataSet"] = data_set;
  doc["proofs"] = proofs;
  doc["lines"] = lines;
  doc["k"] = k;
  doc["seed"] = seed;
  doc["mode"] = to_string(mode);
  doc["config"] = {{"mergeThreshold", merge_threshold}, {"minLeaf", min_leaf}};
  doc["negatives"] = negatives;
  doc["folds"] = ojson::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto& f = folds[i];
    ojson jf;
    jf["fold"] = i;
    jf["tp"] = f.matrix.tp;
    jf["tn"] = f.matrix.tn;
    jf["fp"] = f.matrix.fp;
    jf["fn"] = f.matrix.fn;
    jf["sensitivity"] = optional_number(f.metrics.sensitivity);
    jf["specificity"] = optional_number(f.metrics.specificity);
    jf["trainingTraces"] = f.training_traces;
    jf["modelStates"] = f.model_states;
    doc["folds"].push_back(std::move(jf));
  }
  doc["sensitivity"] = optional_number(mean.sensitivity);
  doc["specificity"] = optional_number(mean.specificity);
  return doc.dump(2);
}

std::string EvalReport::to_table() const {
  const std::vector<std::string> head{"Data Set", "Proofs", "Lines", "Sensitivity", "Specificity"};
  const std::vector<std::string> row{data_set, std::to_string(proofs), std::to_string(lines),
                                     format_metric(mean.sensitivity),
                                     format_metric(mean.specificity)};
  std::string out;
  for (int line = 0; line < 2; ++line) {
    const auto& cells = line == 0 ? head : row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto width = std::max(head[c].size(), row[c].size());
      std::string cell = cells[c];
      const std::string pad(width - cell.size(), ' ');
      // First column left-aligned, numbers right-aligned.
      cell = c == 0 ? cell + pad : pad + cell;
      if (c > 0)
        out += "  ";
      out += cell;
    }
    while (!out.empty() && out.back() == ' ')
      out.pop_back();
    out += '\n';
  }
  return out;
}

} // namespace proofminer
