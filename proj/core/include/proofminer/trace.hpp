// Traces: proofs rendered as sequences of (label, parameter vector) events.

#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace proofminer {

/// Suffix marking a proof step that was applied without parameters.
inline constexpr std::string_view kZeroParamSuffix = "_0";

/// Name of a proof method as it appears on transitions and in guards.
/// Never empty; never contains whitespace, '.' or ';'.
class Label {
public:
  Label() = default;
  explicit Label(std::string name);

  const std::string& str() const noexcept { return name_; }
  bool empty() const noexcept { return name_.empty(); }

  /// True when the label carries the zero-parameter suffix.
  bool is_zero_param() const noexcept;
  /// The proof method without the zero-parameter suffix.
  std::string method() const;

  static bool is_valid(std::string_view name) noexcept;

  friend auto operator<=>(const Label&, const Label&) = default;
  friend bool operator==(const Label&, const Label&) = default;

private:
  std::string name_;
};

struct ParamVector {
  std::vector<std::string> params;
  /// The step is chained to the next one with ';'.
  bool combined = false;

  friend auto operator<=>(const ParamVector&, const ParamVector&) = default;
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct TraceEvent {
  Label label;
  ParamVector values;

  friend auto operator<=>(const TraceEvent&, const TraceEvent&) = default;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class Polarity { positive, negative };

struct Trace {
  std::string name;
  std::vector<TraceEvent> events;
  Polarity polarity = Polarity::positive;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct Corpus {
  std::vector<Trace> traces;
  /// Provenance: file paths, "synthetic", ...
  std::string source;
  /// Source lines the traces were parsed from; 0 when unknown.
  std::size_t lines = 0;

  std::size_t event_count() const noexcept;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

class TraceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Structured failure from corpus_from_json. `trace_index`/`event_index`
/// are -1 when the problem is not tied to a trace or event.
class CorpusFormatError : public TraceError {
public:
  CorpusFormatError(const std::string& what, std::string trace_name = {},
                    long trace_index = -1, long event_index = -1);

  const std::string& trace_name() const noexcept { return trace_name_; }
  long trace_index() const noexcept { return trace_index_; }
  long event_index() const noexcept { return event_index_; }

private:
  std::string trace_name_;
  long trace_index_;
  long event_index_;
};

/// Collapses internal whitespace runs to a single space and trims.
std::string normalize_whitespace(std::string_view text);

/// Turns one proof step into a trace event. A step without parameters gets
/// the `_0` label suffix; parameters are whitespace-normalized.
/// Throws TraceError for methods that are empty, contain whitespace, '.' or
/// ';', or already end in `_0`, and for parameters that are blank.
TraceEvent encode_step(std::string_view method, std::vector<std::string> params,
                       bool combined);

std::string to_string(Polarity polarity);

/// Renames duplicate trace names in place (`name`, `name_2`, `name_3`, ...),
/// keeping the first occurrence untouched.
void disambiguate_names(std::vector<Trace>& traces);

/// Serializes to the version 1 trace document (compact, stable key order).
std::string corpus_to_json(const Corpus& corpus);

/// Parses a version 1 trace document. Throws CorpusFormatError.
Corpus corpus_from_json(std::string_view bytes);

} // namespace proofminer
