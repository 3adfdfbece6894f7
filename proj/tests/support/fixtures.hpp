// Paths to and loaders for the bundled Coq fixtures.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "proofminer/efsm.hpp"
#include "proofminer/inference.hpp"
#include "proofminer/proof_parser.hpp"

namespace proofminer::testing {

inline std::filesystem::path data_path(const std::string& file) {
  return std::filesystem::path(PROOFMINER_TEST_DATA) / file;
}

inline Corpus load_fixture(const std::string& file) {
  const std::vector<std::filesystem::path> paths{data_path(file)};
  return parse_corpus(paths);
}

inline Corpus without(Corpus corpus, const std::string& name) {
  std::erase_if(corpus.traces, [&](const Trace& t) { return t.name == name; });
  return corpus;
}

/// Model of the list/nat fixture minus app_nil_l.
inline std::shared_ptr<const Efsm> listnat_model() {
  return std::make_shared<const Efsm>(infer(without(load_fixture("listnat.v"), "app_nil_l")));
}

/// Model of the bool fixture minus negb_orb.
inline std::shared_ptr<const Efsm> bool_model() {
  return std::make_shared<const Efsm>(infer(without(load_fixture("bool.v"), "negb_orb")));
}

} // namespace proofminer::testing
