#include "proofminer/proof_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace proofminer {

namespace {

constexpr std::array kTheoremKeywords{"Lemma",  "Theorem",     "Corollary",
                                      "Fact",   "Remark",      "Proposition"};
constexpr std::array kGlueKeywords{"in", "with", "as", "using", "by"};
constexpr std::array kGlueArrows{"<-", "->", "|-"};
// Tacticals whose argument is another tactic, kept as one untokenized parameter.
constexpr std::array kTacticals{"try", "repeat", "progress", "now", "abstract", "do"};

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

template <std::size_t N>
bool one_of(const std::array<const char*, N>& set, std::string_view word) {
  return std::any_of(set.begin(), set.end(), [&](const char* s) { return word == s; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return s;
}

std::string_view first_word(std::string_view s) {
  s = trim(s);
  std::size_t i = 0;
  while (i < s.size() && !is_space(s[i]))
    ++i;
  return s.substr(0, i);
}

struct Sentence {
  std::string_view text; // without the terminating '.'
  std::size_t begin = 0; // offset of the first non-blank character
  std::size_t end = 0;   // offset just past the terminating '.'
  std::size_t line = 0;
};

struct SplitResult {
  std::vector<Sentence> sentences;
  std::string_view trailing; // unterminated remainder, if any
  std::size_t trailing_line = 0;
};

// Tracks nesting of (), [] and string literals while scanning.
struct NestingScanner {
  int depth = 0;
  bool in_string = false;

  // Returns true when `text[i]` is at top level (outside groups and strings)
  // before consuming it.
  bool step(std::string_view text, std::size_t& i) {
    const char c = text[i];
    if (in_string) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"')
          ++i; // doubled quote escape
        else
          in_string = false;
      }
      return false;
    }
    const bool top = depth == 0;
    if (c == '"')
      in_string = true;
    else if (c == '(' || c == '[')
      ++depth;
    else if ((c == ')' || c == ']') && depth > 0)
      --depth;
    return top;
  }
};

bool is_bullet_char(char c) {
  return c == '-' || c == '+' || c == '*';
}

// Cuts comment-free text into sentences. Bullets and braces at sentence
// starts are structural and dropped.
SplitResult split_sentences(std::string_view text, std::size_t first_line) {
  SplitResult out;
  NestingScanner scan;
  std::size_t line = first_line;
  std::size_t start = std::string_view::npos;
  std::size_t start_line = line;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n')
      ++line;
    if (start == std::string_view::npos) {
      if (is_space(c))
        continue;
      if (c == '{' || c == '}')
        continue;
      if (is_bullet_char(c)) {
        std::size_t j = i;
        while (j < text.size() && text[j] == c)
          ++j;
        if (j == text.size() || is_space(text[j])) {
          i = j - 1;
          continue;
        }
      }
      start = i;
      start_line = line;
    }
    std::size_t k = i;
    const bool top = scan.step(text, k);
    if (k != i) {
      i = k;
      continue;
    }
    if (top && c == '.' && (i + 1 == text.size() || is_space(text[i + 1]))) {
      out.sentences.push_back(
          Sentence{trim(text.substr(start, i - start)), start, i + 1, start_line});
      start = std::string_view::npos;
    }
  }
  if (start != std::string_view::npos) {
    out.trailing = trim(text.substr(start));
    out.trailing_line = start_line;
  }
  return out;
}

// Splits one sentence on top-level ';'.
std::vector<std::string_view> split_substeps(std::string_view sentence) {
  std::vector<std::string_view> parts;
  NestingScanner scan;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    std::size_t k = i;
    const bool top = scan.step(sentence, k);
    if (k != i) {
      i = k;
      continue;
    }
    if (top && sentence[i] == ';') {
      parts.push_back(trim(sentence.substr(begin, i - begin)));
      begin = i + 1;
    }
  }
  parts.push_back(trim(sentence.substr(begin)));
  return parts;
}

// Whitespace-separated tokens; groups and strings stay whole.
std::vector<std::string_view> tokenize(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i]))
      ++i;
    if (i == s.size())
      break;
    const std::size_t begin = i;
    NestingScanner scan;
    while (i < s.size()) {
      std::size_t k = i;
      const bool top = scan.step(s, k);
      if (top && is_space(s[i]) && !scan.in_string)
        break;
      i = k + 1;
    }
    tokens.push_back(s.substr(begin, i - begin));
  }
  return tokens;
}

// True when `s` is a single balanced "( ... )" group.
bool wholly_parenthesized(std::string_view s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    return false;
  NestingScanner scan;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t k = i;
    scan.step(s, k);
    if (k != i) {
      i = k;
      continue;
    }
    if (scan.depth == 0 && !scan.in_string && i + 1 < s.size())
      return false;
  }
  return scan.depth == 0;
}

bool has_top_level_space(std::string_view s) {
  NestingScanner scan;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t k = i;
    const bool top = scan.step(s, k);
    if (k != i) {
      i = k;
      continue;
    }
    if (top && is_space(s[i]))
      return true;
  }
  return false;
}

std::string join_tokens(std::span<const std::string_view> tokens) {
  std::string out;
  for (auto t : tokens) {
    if (!out.empty())
      out.push_back(' ');
    out.append(t);
  }
  return out;
}

struct SplitStep {
  std::string_view method;
  std::vector<std::string> params;
};

SplitStep split_method(std::string_view step) {
  step = trim(step);
  std::size_t i = 0;
  while (i < step.size() && !is_space(step[i]) && step[i] != '(' && step[i] != '[' &&
         step[i] != '"')
    ++i;
  SplitStep out;
  out.method = step.substr(0, i);
  const std::string_view rest = trim(step.substr(i));
  if (rest.empty())
    return out;

  if (one_of(kTacticals, out.method)) {
    out.params.push_back(normalize_whitespace(rest));
    return out;
  }

  const auto tokens = tokenize(rest);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto tok = tokens[t];
    if (one_of(kGlueKeywords, tok)) {
      out.params.push_back(
          normalize_whitespace(join_tokens(std::span(tokens).subspan(t))));
      break;
    }
    if (one_of(kGlueArrows, tok) && t + 1 < tokens.size()) {
      out.params.push_back(normalize_whitespace(join_tokens(std::span(tokens).subspan(t, 2))));
      ++t;
      continue;
    }
    std::string_view p = tok;
    if (wholly_parenthesized(p))
      p = trim(p.substr(1, p.size() - 2));
    out.params.push_back(normalize_whitespace(p.empty() ? tok : p));
  }
  return out;
}

bool is_goal_selector(std::string_view sentence) {
  std::size_t i = 0;
  if (sentence.starts_with("all"))
    i = 3;
  else
    while (i < sentence.size() && std::isdigit(static_cast<unsigned char>(sentence[i])))
      ++i;
  if (i == 0)
    return false;
  while (i < sentence.size() && is_space(sentence[i]))
    ++i;
  return i < sentence.size() && sentence[i] == ':' &&
         (i + 1 == sentence.size() || sentence[i + 1] != '=');
}

std::string theorem_name(std::string_view rest) {
  rest = trim(rest);
  std::size_t i = 0;
  while (i < rest.size() && !is_space(rest[i]) && rest[i] != ':' && rest[i] != '(' &&
         rest[i] != '{')
    ++i;
  return std::string(rest.substr(0, i));
}

} // namespace

std::string strip_comments(std::string_view script) {
  std::string out(script);
  int depth = 0;
  bool in_string = false;
  std::size_t line = 1;
  std::vector<std::size_t> open_lines;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const char c = script[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (depth == 0) {
      if (in_string) {
        if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
        continue;
      }
      if (c == '*' && i + 1 < script.size() && script[i + 1] == ')')
        throw ParseError("unbalanced comment close '*)'", line);
    }
    if (c == '(' && i + 1 < script.size() && script[i + 1] == '*') {
      ++depth;
      open_lines.push_back(line);
      out[i] = out[i + 1] = ' ';
      ++i;
      continue;
    }
    if (depth > 0) {
      if (c == '*' && i + 1 < script.size() && script[i + 1] == ')') {
        --depth;
        open_lines.pop_back();
        out[i] = out[i + 1] = ' ';
        ++i;
        continue;
      }
      out[i] = ' ';
    }
  }
  if (depth > 0)
    throw ParseError("unterminated comment", open_lines.back());
  return out;
}

ExtractResult extract_blocks(std::string_view script) {
  const std::string text = strip_comments(script);
  const auto split = split_sentences(text, 1);

  ExtractResult result;
  bool in_block = false;
  // Line numbers of sentence ends, counted forward once.
  std::size_t counted_to = 0;
  std::size_t counted_line = 1;
  auto line_at = [&](std::size_t offset) {
    counted_line += static_cast<std::size_t>(std::count(text.begin() + static_cast<long>(counted_to),
                                                        text.begin() + static_cast<long>(offset), '\n'));
    counted_to = offset;
    return counted_line;
  };
  ScriptBlock current;
  std::size_t body_begin = 0;

  auto abandon = [&](const std::string& reason) {
    result.skipped.push_back(SkippedProof{current.name, current.line, reason});
    in_block = false;
  };

  for (const auto& s : split.sentences) {
    const auto word = first_word(s.text);
    if (one_of(kTheoremKeywords, word)) {
      if (in_block)
        abandon("proof has no terminator");
      const auto rest = trim(s.text.substr(word.size()));
      current = ScriptBlock{};
      current.name = theorem_name(rest);
      current.statement = std::string(rest);
      current.line = s.line;
      body_begin = s.end;
      current.body_line = line_at(body_begin);
      in_block = true;
      if (current.name.empty())
        abandon("missing proposition name");
      continue;
    }
    if (!in_block) {
      if (word == "Ltac")
        result.warnings.push_back(Diagnostic{{}, s.line, "Ltac definition skipped"});
      continue;
    }
    if (word == "Qed" || word == "Defined") {
      current.body = std::string(trim(std::string_view(text).substr(body_begin, s.begin - body_begin)));
      result.blocks.push_back(std::move(current));
      in_block = false;
    } else if (word == "Admitted" || word == "Abort") {
      abandon("proof ends with " + std::string(word));
    }
  }
  if (in_block)
    abandon("proof has no terminator");
  return result;
}

std::vector<TraceEvent> parse_steps(std::string_view body, std::vector<Diagnostic>* warnings,
                                    std::size_t first_line) {
  const auto split = split_sentences(body, first_line);
  std::vector<Sentence> sentences = split.sentences;
  if (!split.trailing.empty()) {
    if (warnings)
      warnings->push_back(Diagnostic{{}, split.trailing_line, "unterminated final step"});
    sentences.push_back(Sentence{split.trailing, 0, 0, split.trailing_line});
  }

  std::vector<TraceEvent> events;
  for (const auto& s : sentences) {
    const auto word = first_word(s.text);
    if (word == "Proof")
      continue;
    if (word == "Ltac" || is_goal_selector(s.text)) {
      if (warnings)
        warnings->push_back(Diagnostic{{}, s.line, "skipped '" + std::string(s.text) + "'"});
      continue;
    }
    auto parts = split_substeps(s.text);
    std::erase_if(parts, [](std::string_view p) { return p.empty(); });
    for (std::size_t i = 0; i < parts.size(); ++i) {
      auto step = split_method(parts[i]);
      events.push_back(encode_step(step.method, std::move(step.params), i + 1 < parts.size()));
    }
  }
  return events;
}

Trace block_to_trace(const ScriptBlock& block, std::vector<Diagnostic>* warnings) {
  Trace trace;
  trace.name = block.name;
  trace.events = parse_steps(block.body, warnings, block.body_line);
  if (trace.events.empty())
    throw TraceError("proof has no steps");
  return trace;
}

namespace {

bool param_renders_bare(std::string_view p, bool last) {
  const auto words = tokenize(p);
  if (words.empty())
    return false;
  if (one_of(kGlueKeywords, words.front()))
    return last;
  if (one_of(kGlueArrows, words.front()))
    return words.size() == 2;
  if (wholly_parenthesized(p))
    return false;
  return !has_top_level_space(p) && p.find(';') == std::string_view::npos;
}

} // namespace

std::string render_step(const TraceEvent& event) {
  std::string out = event.label.method();
  const auto& params = event.values.params;
  const bool tactical = one_of(kTacticals, out);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(' ');
    if (tactical || param_renders_bare(params[i], i + 1 == params.size())) {
      out += params[i];
    } else {
      out.push_back('(');
      out += params[i];
      out.push_back(')');
    }
  }
  return out;
}

std::string render_script(std::span<const TraceEvent> events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    out += render_step(events[i]);
    if (i + 1 < events.size())
      out += events[i].values.combined ? "; " : ". ";
  }
  if (!events.empty())
    out.push_back('.');
  return out;
}

Corpus parse_script(std::string_view script, const std::string& origin, ParseSummary* summary) {
  Corpus corpus;
  corpus.source = origin;
  corpus.lines = static_cast<std::size_t>(std::count(script.begin(), script.end(), '\n'));
  if (!script.empty() && script.back() != '\n')
    ++corpus.lines;

  auto extracted = extract_blocks(script);
  std::vector<Diagnostic> warnings = std::move(extracted.warnings);
  std::size_t skipped = extracted.skipped.size();
  for (const auto& s : extracted.skipped)
    warnings.push_back(Diagnostic{origin, s.line, "skipped proof '" + s.name + "': " + s.reason});

  for (const auto& block : extracted.blocks) {
    std::vector<Diagnostic> local;
    try {
      corpus.traces.push_back(block_to_trace(block, &local));
    } catch (const TraceError& e) {
      ++skipped;
      local.push_back(Diagnostic{{}, block.line, "skipped proof '" + block.name + "': " + e.what()});
    }
    for (auto& d : local) {
      d.file = origin;
      warnings.push_back(std::move(d));
    }
  }
  disambiguate_names(corpus.traces);

  if (summary) {
    summary->files += 1;
    summary->lines += corpus.lines;
    summary->proofs += corpus.traces.size();
    summary->skipped += skipped;
    for (auto& w : warnings) {
      if (w.file.empty())
        w.file = origin;
      summary->warnings.push_back(std::move(w));
    }
  }
  return corpus;
}

Corpus parse_corpus(std::span<const std::filesystem::path> paths, ParseSummary* summary) {
  Corpus corpus;
  std::string source;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Corpus part;
    try {
      part = parse_script(buf.str(), path.string(), summary);
    } catch (const ParseError& e) {
      throw ParseError(e.message(), e.line(), path.string());
    }
    for (auto& t : part.traces)
      corpus.traces.push_back(std::move(t));
    corpus.lines += part.lines;
    if (!source.empty())
      source += ";";
    source += path.string();
  }
  disambiguate_names(corpus.traces);
  corpus.source = source;
  return corpus;
}

} // namespace proofminer
