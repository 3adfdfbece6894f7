// proofminer: parse proof scripts, infer models, evaluate and explore them.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "proofminer/efsm.hpp"
#include "proofminer/evaluation.hpp"
#include "proofminer/guidance.hpp"
#include "proofminer/http_service.hpp"
#include "proofminer/inference.hpp"
#include "proofminer/proof_parser.hpp"
#include "proofminer/trace.hpp"

namespace fs = std::filesystem;
using namespace proofminer;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kInference = 3, kEvaluation = 4 };

// Failure carrying the exit code it maps to.
struct Failure {
  int code;
  std::string message;
};

std::string read_file(const fs::path& path, int code) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Failure{code, "cannot read " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Failure{kUsage, "cannot write " + path};
  out << text;
}

Corpus load_corpus(const fs::path& path) {
  try {
    return corpus_from_json(read_file(path, kParse));
  } catch (const TraceError& e) {
    throw Failure{kParse, path.string() + ": " + e.what()};
  }
}

Efsm load_model(const fs::path& path) {
  try {
    return import_json(read_file(path, kParse));
  } catch (const ModelError& e) {
    throw Failure{kParse, path.string() + ": " + e.what()};
  }
}

InferenceConfig load_config(const std::string& path) {
  if (path.empty())
    return {};
  try {
    return InferenceConfig::from_json(read_file(path, kUsage));
  } catch (const std::invalid_argument& e) {
    throw Failure{kUsage, path + ": " + e.what()};
  }
}

WalkMode mode_from(const std::string& text) {
  auto m = parse_walk_mode(text);
  if (!m)
    throw Failure{kUsage, "unknown mode \"" + text + "\" (guarded or control-only)"};
  return *m;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("proofminer");
  logger->set_pattern("%^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PROOFMINER_LOG")) {
    const std::string level = env;
    if (level == "error")
      spdlog::set_level(spdlog::level::err);
    else if (level == "debug")
      spdlog::set_level(spdlog::level::debug);
    else if (level != "info")
      spdlog::warn("PROOFMINER_LOG={} not understood; using info", level);
  }
}

struct ParseArgs {
  std::vector<std::string> files;
  std::string output;
};

int run_parse(const ParseArgs& a) {
  std::vector<fs::path> paths(a.files.begin(), a.files.end());
  ParseSummary summary;
  Corpus corpus;
  try {
    corpus = parse_corpus(paths, &summary);
  } catch (const ParseError& e) {
    throw Failure{kParse, e.what()};
  } catch (const std::exception& e) {
    throw Failure{kParse, e.what()};
  }
  for (const auto& w : summary.warnings)
    spdlog::warn("{}:{}: {}", w.file, w.line, w.message);
  spdlog::info("{} proofs from {} files ({} lines), {} skipped", corpus.traces.size(),
               summary.files, summary.lines, summary.skipped);
  write_output(a.output, corpus_to_json(corpus) + "\n");
  return kOk;
}

struct InferArgs {
  std::string input, output, config;
  std::vector<std::string> holdout;
};

int run_infer(const InferArgs& a) {
  auto corpus = load_corpus(a.input);
  const auto config = load_config(a.config);
  for (const auto& name : a.holdout) {
    const auto before = corpus.traces.size();
    std::erase_if(corpus.traces, [&](const Trace& t) { return t.name == name; });
    if (corpus.traces.size() == before)
      throw Failure{kUsage, "no trace named \"" + name + "\" to hold out"};
    spdlog::info("held out {}", name);
  }
  Efsm model;
  try {
    model = infer(corpus, config);
  } catch (const std::exception& e) {
    throw Failure{kInference, e.what()};
  }
  spdlog::info("{} states, {} transitions, {} accepting", model.state_count(),
               model.transitions().size(), model.accepting_states().size());
  write_output(a.output, export_json(model) + "\n");
  return kOk;
}

struct EvalArgs {
  std::string input, foreign, config, mode = "guarded", json, name;
  std::size_t k = 5;
  std::size_t negatives = 30;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  const auto corpus = load_corpus(a.input);
  const auto foreign = a.foreign.empty() ? Corpus{} : load_corpus(a.foreign);
  const auto config = load_config(a.config);
  const auto mode = mode_from(a.mode);
  EvalReport report;
  try {
    const auto negatives = build_negatives(corpus, foreign, a.negatives, a.seed);
    report = cross_validate(corpus, negatives, a.k, a.seed, config, mode);
  } catch (const std::exception& e) {
    throw Failure{kEvaluation, e.what()};
  }
  report.data_set = a.name.empty() ? fs::path(a.input).stem().string() : a.name;
  if (!a.json.empty())
    write_output(a.json, report.to_json() + "\n");
  // JSON on stdout replaces the table.
  if (a.json != "-")
    std::cout << report.to_table();
  return kOk;
}

struct AcceptArgs {
  std::string model, input, mode = "guarded";
};

int run_accept(const AcceptArgs& a) {
  const auto model = load_model(a.model);
  const auto corpus = load_corpus(a.input);
  const auto mode = mode_from(a.mode);
  std::size_t accepted = 0;
  for (const auto& t : corpus.traces) {
    const auto r = walk(model, t, mode);
    accepted += r.accepted();
    std::cout << t.name << '\t' << (r.accepted() ? "accepted" : "rejected");
    if (!r.accepted())
      std::cout << '\t' << to_string(r.reason) << " at event " << r.events_walked;
    std::cout << '\n';
  }
  spdlog::info("{} of {} traces accepted ({})", accepted, corpus.traces.size(), to_string(mode));
  return kOk;
}

struct SuggestArgs {
  std::string model, history;
};

int run_suggest(const SuggestArgs& a) {
  auto model = std::make_shared<const Efsm>(load_model(a.model));
  auto session = open_session(model);
  std::vector<TraceEvent> events;
  try {
    events = parse_steps(a.history);
  } catch (const std::exception& e) {
    throw Failure{kParse, std::string("history: ") + e.what()};
  }
  for (const auto& e : events) {
    try {
      const auto out = session.step(e.label, e.values);
      if (out.advisory)
        spdlog::warn("after {}: {}", render_step(e), *out.advisory);
    } catch (const GuidanceError& err) {
      std::string avail;
      for (const auto& l : err.available())
        avail += (avail.empty() ? "" : ", ") + l;
      throw Failure{kUsage, std::string(err.what()) + " (available: " + avail + ")"};
    }
  }
  const auto o = session.options();
  std::cout << "state " << o.state << (o.can_finish ? " (accepting, can finish)" : "") << '\n';
  for (const auto& s : o.suggestions) {
    std::cout << "  " << s.label.method();
    if (!s.parameter_candidates.empty()) {
      std::cout << "  [";
      for (std::size_t i = 0; i < s.parameter_candidates.size(); ++i) {
        const auto& v = s.parameter_candidates[i].first;
        std::cout << (i ? " | " : "") << render_step(TraceEvent{s.label, v}).substr(s.label.method().size() + 1)
                  << (v.combined ? " ;" : "");
      }
      std::cout << "]";
    } else if (s.combined_hint) {
      std::cout << "  ;";
    }
    if (s.leads_to_accepting)
      std::cout << "  -> accepting";
    std::cout << '\n';
  }
  return kOk;
}

struct ServeArgs {
  std::string model, host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& a) {
  auto model = std::make_shared<const Efsm>(load_model(a.model));
  SessionManager sessions;
  const auto id = sessions.add_model(model);
  GuidanceServer server(sessions);
  spdlog::info("model {} loaded ({} states); listening on {}:{}", id, model->state_count(), a.host,
               a.port);
  if (!server.listen(a.host, a.port))
    throw Failure{kUsage, "cannot listen on " + a.host + ":" + std::to_string(a.port)};
  return kOk;
}

struct ExportArgs {
  std::string model, dot, guards;
};

int run_export(const ExportArgs& a) {
  const auto model = load_model(a.model);
  if (a.dot.empty() && a.guards.empty())
    throw Failure{kUsage, "nothing to export; give --dot and/or --guards"};
  if (!a.dot.empty())
    write_output(a.dot, export_dot(model));
  if (!a.guards.empty()) {
    if (!model.guards())
      throw Failure{kUsage, "model has no guards"};
    write_output(a.guards, model.guards()->rules_text());
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Mine state machines from Coq proof scripts"};
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "Extract proof traces from .v files");
  parse->add_option("files", parse_args.files, "Coq sources")->required()->check(CLI::ExistingFile);
  parse->add_option("-o,--output", parse_args.output, "Trace JSON (default stdout)");

  InferArgs infer_args;
  auto* inf = app.add_subcommand("infer", "Infer a model from traces");
  inf->add_option("-i,--input", infer_args.input, "Trace JSON")->required();
  inf->add_option("-o,--output", infer_args.output, "Model JSON (default stdout)");
  inf->add_option("--config", infer_args.config, "Inference config JSON");
  inf->add_option("--holdout", infer_args.holdout, "Drop the named trace before inference");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "k-fold cross validation");
  eval->add_option("-i,--input", eval_args.input, "Trace JSON")->required();
  eval->add_option("--foreign", eval_args.foreign, "Traces from another theory, used as negatives");
  eval->add_option("-k", eval_args.k, "Folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  eval->add_option("--negatives", eval_args.negatives, "Negative traces")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_args.seed, "Random seed")->capture_default_str();
  eval->add_option("--mode", eval_args.mode, "guarded or control-only")->capture_default_str();
  eval->add_option("--config", eval_args.config, "Inference config JSON");
  eval->add_option("--json", eval_args.json, "Also write the full report as JSON");
  eval->add_option("--name", eval_args.name, "Data set name for the report (default: input file stem)");

  AcceptArgs accept_args;
  auto* accept = app.add_subcommand("accept", "Run traces through a model");
  accept->add_option("-m,--model", accept_args.model, "Model JSON")->required();
  accept->add_option("-i,--input", accept_args.input, "Trace JSON")->required();
  accept->add_option("--mode", accept_args.mode, "guarded or control-only")->capture_default_str();

  SuggestArgs suggest_args;
  auto* suggest = app.add_subcommand("suggest", "List the next steps after a partial proof");
  suggest->add_option("-m,--model", suggest_args.model, "Model JSON")->required();
  suggest->add_option("--history", suggest_args.history, "Steps taken so far, e.g. \"induction l. trivial.\"");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Serve guidance sessions over HTTP");
  serve->add_option("-m,--model", serve_args.model, "Model JSON")->required();
  serve->add_option("--port", serve_args.port, "Port")->capture_default_str();
  serve->add_option("--host", serve_args.host, "Address to bind")->capture_default_str();

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Render a model");
  exp->add_option("-m,--model", export_args.model, "Model JSON")->required();
  exp->add_option("--dot", export_args.dot, "GraphViz output");
  exp->add_option("--guards", export_args.guards, "Guard rules as text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*parse)
      return run_parse(parse_args);
    if (*inf)
      return run_infer(infer_args);
    if (*eval)
      return run_eval(eval_args);
    if (*accept)
      return run_accept(accept_args);
    if (*suggest)
      return run_suggest(suggest_args);
    if (*serve)
      return run_serve(serve_args);
    if (*exp)
      return run_export(export_args);
  } catch (const Failure& f) {
    spdlog::error("{}", f.message);
    return f.code;
  }
  return kUsage;
}
