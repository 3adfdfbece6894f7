// Lexical-level reader for Coq tactic scripts.
//
// A script is cut into sentences (terminated by a '.' that is followed by
// whitespace or end of input and that sits outside parentheses, brackets,
// strings and comments). Sentences between a theorem-like keyword and
// `Qed.`/`Defined.` form one ScriptBlock; each sentence of a block body is
// split on top-level ';' into sub-steps, and every sub-step becomes one
// TraceEvent.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proofminer/trace.hpp"

namespace proofminer {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line, const std::string& file = {})
      : std::runtime_error((file.empty() ? "" : file + ":") + "line " + std::to_string(line) +
                           ": " + message),
        message_(message), file_(file), line_(line) {}

  const std::string& message() const noexcept { return message_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string message_;
  std::string file_;
  std::size_t line_;
};

struct Diagnostic {
  std::string file;
  std::size_t line = 0;
  std::string message;
};

struct ScriptBlock {
  std::string name;
  std::string statement;
  std::string body;
  /// 1-based line of the opening keyword.
  std::size_t line = 0;
  /// 1-based line where the body starts.
  std::size_t body_line = 0;
};

struct SkippedProof {
  std::string name;
  std::size_t line = 0;
  std::string reason;
};

struct ExtractResult {
  std::vector<ScriptBlock> blocks;
  std::vector<SkippedProof> skipped;
  std::vector<Diagnostic> warnings;
};

/// Replaces (possibly nested) `(* ... *)` comments by spaces, keeping
/// newlines so line numbers survive. Throws ParseError on unbalanced
/// delimiters.
std::string strip_comments(std::string_view script);

ExtractResult extract_blocks(std::string_view script);

/// Parses a '.'-terminated sequence of tactic sentences (a proof body, or a
/// partial script such as "induction l. trivial.").
std::vector<TraceEvent> parse_steps(std::string_view body,
                                    std::vector<Diagnostic>* warnings = nullptr,
                                    std::size_t first_line = 1);

/// Throws TraceError("proof has no steps") when nothing remains.
Trace block_to_trace(const ScriptBlock& block, std::vector<Diagnostic>* warnings = nullptr);

/// `method p1 ... pn` for one event; parameters that would not reparse to
/// themselves are parenthesized.
std::string render_step(const TraceEvent& event);

/// Events joined with "; " after combined events and ". " otherwise, with a
/// final '.'. Empty input renders as the empty string.
std::string render_script(std::span<const TraceEvent> events);

struct ParseSummary {
  std::size_t files = 0;
  std::size_t lines = 0;
  std::size_t proofs = 0;
  std::size_t skipped = 0;
  std::vector<Diagnostic> warnings;
};

/// Reads every file, in order, into one positive corpus. Unreadable files
/// and malformed comments are fatal; individual proofs that fail to convert
/// are skipped and reported in `summary`.
Corpus parse_corpus(std::span<const std::filesystem::path> paths, ParseSummary* summary = nullptr);

/// Same, for in-memory scripts; `origin` names the script in diagnostics.
Corpus parse_script(std::string_view script, const std::string& origin,
                    ParseSummary* summary = nullptr);

} // namespace proofminer
