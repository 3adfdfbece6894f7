// Deterministic corpora for the benchmarks.

#pragma once

#include <random>
#include <string>

#include "proofminer/trace.hpp"

namespace proofminer::bench {

/// Traces over `methods` tactics whose successor depends loosely on the
/// current tactic, so inference has structure to find.
inline Corpus random_corpus(std::size_t count, std::size_t max_len, std::uint64_t seed,
                            std::size_t methods = 8) {
  std::mt19937_64 rng(seed);
  Corpus c;
  c.source = "bench";
  for (std::size_t i = 0; i < count; ++i) {
    Trace t{"p" + std::to_string(i), {}, Polarity::positive};
    std::size_t m = rng() % methods;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t j = 0; j < len; ++j) {
      std::vector<std::string> params;
      if (m % 3 != 0)
        params.push_back("v" + std::to_string(rng() % 4));
      t.events.push_back(encode_step("m" + std::to_string(m), params, rng() % 5 == 0));
      m = (m + 1 + rng() % 2) % methods;
    }
    c.traces.push_back(std::move(t));
  }
  return c;
}

/// Coq script with `lemmas` proofs of `steps` sentences each.
inline std::string coq_script(std::size_t lemmas, std::size_t steps) {
  std::string out = "(* generated *)\nRequire Import List.\n\n";
  for (std::size_t i = 0; i < lemmas; ++i) {
    out += "Lemma l" + std::to_string(i) + " : forall n m : nat, n + m = m + n.\nProof.\n  ";
    for (std::size_t j = 0; j < steps; ++j) {
      switch (j % 5) {
      case 0: out += "induction n. "; break;
      case 1: out += "simpl in H; (* step *) trivial. "; break;
      case 2: out += "rewrite <- (plus_n_Sm m n). "; break;
      case 3: out += "assert (m <= O); try omega. "; break;
      default: out += "auto with arith. "; break;
      }
    }
    out += "\nQed.\n\n";
  }
  return out;
}

} // namespace proofminer::bench
