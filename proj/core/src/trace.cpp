#include "proofminer/trace.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

} // namespace

Label::Label(std::string name) : name_(std::move(name)) {
  if (!is_valid(name_))
    throw TraceError("invalid label '" + name_ + "'");
}

bool Label::is_valid(std::string_view name) noexcept {
  if (name.empty())
    return false;
  return std::none_of(name.begin(), name.end(),
                      [](char c) { return is_space(c) || c == '.' || c == ';'; });
}

bool Label::is_zero_param() const noexcept {
  return name_.size() > kZeroParamSuffix.size() && ends_with(name_, kZeroParamSuffix);
}

std::string Label::method() const {
  if (is_zero_param())
    return name_.substr(0, name_.size() - kZeroParamSuffix.size());
  return name_;
}

std::size_t Corpus::event_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : traces)
    n += t.events.size();
  return n;
}

CorpusFormatError::CorpusFormatError(const std::string& what, std::string trace_name,
                                     long trace_index, long event_index)
    : TraceError(what), trace_name_(std::move(trace_name)), trace_index_(trace_index),
      event_index_(event_index) {}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space)
      out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

TraceEvent encode_step(std::string_view method, std::vector<std::string> params,
                       bool combined) {
  if (!Label::is_valid(method))
    throw TraceError("invalid proof method '" + std::string(method) + "'");
  if (ends_with(method, kZeroParamSuffix))
    throw TraceError("proof method '" + std::string(method) + "' clashes with the `_0` suffix");
  for (auto& p : params) {
    p = normalize_whitespace(p);
    if (p.empty())
      throw TraceError("empty parameter for '" + std::string(method) + "'");
  }
  std::string name(method);
  if (params.empty())
    name += kZeroParamSuffix;
  return TraceEvent{Label(std::move(name)), ParamVector{std::move(params), combined}};
}

std::string to_string(Polarity polarity) {
  return polarity == Polarity::positive ? "positive" : "negative";
}

void disambiguate_names(std::vector<Trace>& traces) {
  std::set<std::string> taken;
  for (const auto& t : traces)
    taken.insert(t.name);
  std::set<std::string> seen;
  for (auto& t : traces) {
    if (seen.insert(t.name).second)
      continue;
    for (int n = 2;; ++n) {
      std::string candidate = t.name + "_" + std::to_string(n);
      if (!taken.contains(candidate)) {
        t.name = candidate;
        taken.insert(candidate);
        seen.insert(candidate);
        break;
      }
    }
  }
}

std::string corpus_to_json(const Corpus& corpus) {
  ojson doc;
  doc["version"] = 1;
  if (!corpus.source.empty())
    doc["source"] = corpus.source;
  if (corpus.lines != 0)
    doc["lines"] = corpus.lines;
  doc["traces"] = ojson::array();
  for (const auto& trace : corpus.traces) {
    ojson t;
    t["name"] = trace.name;
    t["polarity"] = to_string(trace.polarity);
    t["events"] = ojson::array();
    for (const auto& e : trace.events) {
      ojson ev;
      ev["label"] = e.label.str();
      ev["params"] = e.values.params;
      ev["combined"] = e.values.combined;
      t["events"].push_back(std::move(ev));
    }
    doc["traces"].push_back(std::move(t));
  }
  return doc.dump();
}

namespace {

void reject_unknown_keys(const ojson& obj, std::initializer_list<std::string_view> known,
                         const std::string& where, const std::string& trace_name,
                         long ti, long ei) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw CorpusFormatError("unknown key '" + key + "' in " + where, trace_name, ti, ei);
  }
}

TraceEvent parse_event(const ojson& ev, const std::string& trace_name, long ti, long ei) {
  auto fail = [&](const std::string& msg) -> CorpusFormatError {
    return CorpusFormatError("trace '" + trace_name + "' event " + std::to_string(ei) + ": " + msg,
                             trace_name, ti, ei);
  };
  if (!ev.is_object())
    throw fail("event is not an object");
  reject_unknown_keys(ev, {"label", "params", "combined"}, "event", trace_name, ti, ei);
  if (!ev.contains("label") || !ev["label"].is_string())
    throw fail("missing string 'label'");
  const auto label = ev["label"].get<std::string>();
  if (!Label::is_valid(label))
    throw fail("invalid label '" + label + "'");

  ParamVector values;
  if (ev.contains("params")) {
    if (!ev["params"].is_array())
      throw fail("'params' is not an array");
    for (const auto& p : ev["params"]) {
      if (!p.is_string())
        throw fail("parameter is not a string");
      auto s = p.get<std::string>();
      if (normalize_whitespace(s).empty())
        throw fail("empty params entry");
      values.params.push_back(std::move(s));
    }
  }
  if (ev.contains("combined")) {
    if (!ev["combined"].is_boolean())
      throw fail("'combined' is not a boolean");
    values.combined = ev["combined"].get<bool>();
  }
  Label l(label);
  if (values.params.empty() != l.is_zero_param())
    throw fail("label '" + label + "' disagrees with its parameter count");
  return TraceEvent{std::move(l), std::move(values)};
}

} // namespace

Corpus corpus_from_json(std::string_view bytes) {
  ojson doc;
  try {
    doc = ojson::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorpusFormatError(std::string("malformed trace document: ") + e.what());
  }
  if (!doc.is_object())
    throw CorpusFormatError("trace document is not an object");
  reject_unknown_keys(doc, {"version", "traces", "source", "lines"}, "trace document", {}, -1, -1);
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw CorpusFormatError("missing integer 'version'");
  if (doc["version"].get<long>() != 1)
    throw CorpusFormatError("unsupported schema version " + doc["version"].dump());
  if (!doc.contains("traces") || !doc["traces"].is_array())
    throw CorpusFormatError("missing array 'traces'");

  Corpus corpus;
  if (doc.contains("source")) {
    if (!doc["source"].is_string())
      throw CorpusFormatError("'source' is not a string");
    corpus.source = doc["source"].get<std::string>();
  }
  if (doc.contains("lines")) {
    if (!doc["lines"].is_number_unsigned())
      throw CorpusFormatError("'lines' is not a non-negative integer");
    corpus.lines = doc["lines"].get<std::size_t>();
  }

  long ti = 0;
  for (const auto& t : doc["traces"]) {
    if (!t.is_object())
      throw CorpusFormatError("trace " + std::to_string(ti) + " is not an object", {}, ti);
    const std::string name =
        t.contains("name") && t["name"].is_string() ? t["name"].get<std::string>() : std::string();
    if (name.empty())
      throw CorpusFormatError("trace " + std::to_string(ti) + ": missing 'name'", {}, ti);
    reject_unknown_keys(t, {"name", "polarity", "events"}, "trace '" + name + "'", name, ti, -1);

    Trace trace;
    trace.name = name;
    if (t.contains("polarity")) {
      const auto& p = t["polarity"];
      if (p == "positive")
        trace.polarity = Polarity::positive;
      else if (p == "negative")
        trace.polarity = Polarity::negative;
      else
        throw CorpusFormatError("trace '" + name + "': bad polarity " + p.dump(), name, ti);
    }
    if (!t.contains("events") || !t["events"].is_array())
      throw CorpusFormatError("trace '" + name + "': missing array 'events'", name, ti);
    long ei = 0;
    for (const auto& ev : t["events"])
      trace.events.push_back(parse_event(ev, name, ti, ei++));
    corpus.traces.push_back(std::move(trace));
    ++ti;
  }
  disambiguate_names(corpus.traces);
  return corpus;
}

} // namespace proofminer
