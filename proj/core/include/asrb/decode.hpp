#pragma once

// Beam search with n-gram non-repetition (NRNS) and length penalty (LP)
// constraints, plus an exhaustive-search oracle for verification.

#include <functional>
#include <vector>

namespace asrb {

struct DecodeParams {
  int beam_size = 5;
  int max_length = 256;
  int nrns = 0;            // no-repeat-ngram-size, 0 = disabled
  double length_penalty = 1.0;
  int eos_id = 0;
};

struct Hypothesis {
  std::vector<int> tokens;  // excludes BOS; ends in EOS unless force-finished
  double sum_logprob = 0.0;
  bool finished = false;
  double score = 0.0;       // finalize_score, set when finished
};

// prefix (generated tokens so far, no BOS) -> log-distribution over the vocab
using StepScorer = std::function<std::vector<double>(const std::vector<int>&)>;

// Sets to -inf the log-probability of any token that would recreate an
// n-gram already present in `tokens`. n = 0 disables the constraint.
std::vector<double> ban_repeated_ngrams(const std::vector<int>& tokens, int n,
                                        std::vector<double> logprobs);

// score = sum_logprob / length^lp; length counts generated tokens incl. EOS.
double finalize_score(double sum_logprob, int length, double lp);

// Standard beam search with 2*beam_size candidate expansion. Returns the
// finished pool sorted by final score descending (deterministic tie-breaks:
// higher sum_logprob, then shorter, then lexicographic).
std::vector<Hypothesis> beam_search(const StepScorer& scorer, const DecodeParams& params);

// Enumerates every legal sequence (NRNS-respecting, EOS-terminated or at
// max_length) and returns the finalize_score argmax. Guarded against search
// spaces above 10^6 sequences.
Hypothesis exhaustive_decode(const StepScorer& scorer, const DecodeParams& params);

}  // namespace asrb
