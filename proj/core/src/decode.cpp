#include "asrb/decode.hpp"

#include "asrb/tensor.hpp"  // ShapeError / ContractError

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace asrb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Lexicographic-with-score ordering used for the final ranking.
bool better_final(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.sum_logprob != b.sum_logprob) return a.sum_logprob > b.sum_logprob;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

// Upper bound on the final score of any continuation of a live hypothesis
// with log-mass `sum` at length `len`, assuming zero additional cost. Future
// per-step log-probabilities are <= 0, so with sum <= 0 the bound is the
// better endpoint of s / l^lp over l in [len+1, max_length].
double optimistic_bound(double sum, int len, const DecodeParams& p) {
  double a = finalize_score(sum, len + 1, p.length_penalty);
  double b = finalize_score(sum, p.max_length, p.length_penalty);
  return std::max(a, b);
}

}  // namespace

std::vector<double> ban_repeated_ngrams(const std::vector<int>& tokens, int n,
                                        std::vector<double> logprobs) {
  int len = static_cast<int>(tokens.size());
  if (n <= 0 || len < n - 1) return logprobs;
  std::set<std::vector<int>> seen;
  for (int i = 0; i + n <= len; ++i)
    seen.insert(std::vector<int>(tokens.begin() + i, tokens.begin() + i + n));
  std::vector<int> cand(tokens.end() - (n - 1), tokens.end());
  cand.push_back(0);
  for (size_t t = 0; t < logprobs.size(); ++t) {
    cand.back() = static_cast<int>(t);
    if (seen.count(cand)) logprobs[t] = kNegInf;
  }
  return logprobs;
}

double finalize_score(double sum_logprob, int length, double lp) {
  return sum_logprob / std::pow(static_cast<double>(length), lp);
}

std::vector<Hypothesis> beam_search(const StepScorer& scorer, const DecodeParams& params) {
  if (params.beam_size < 1 || params.max_length < 1)
    throw ContractError("beam_search: beam_size and max_length must be >= 1");

  struct Candidate {
    double sum;
    std::vector<int> tokens;
  };

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> finished;
  int vocab = -1;

  for (int step = 1; step <= params.max_length && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (const Hypothesis& h : live) {
      std::vector<double> lp = scorer(h.tokens);
      if (vocab < 0) {
        vocab = static_cast<int>(lp.size());
        if (params.eos_id < 0 || params.eos_id >= vocab)
          throw ContractError("beam_search: eos_id " + std::to_string(params.eos_id) +
                              " outside vocab " + std::to_string(vocab));
      } else if (static_cast<int>(lp.size()) != vocab) {
        throw ContractError("beam_search: scorer returned " + std::to_string(lp.size()) +
                            " logprobs, expected " + std::to_string(vocab));
      }
      lp = ban_repeated_ngrams(h.tokens, params.nrns, std::move(lp));
      for (int t = 0; t < vocab; ++t) {
        if (lp[t] == kNegInf) continue;
        Candidate c;
        c.sum = h.sum_logprob + lp[t];
        c.tokens = h.tokens;
        c.tokens.push_back(t);
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.sum != b.sum) return a.sum > b.sum;
      if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
      return a.tokens < b.tokens;
    });
    if (candidates.size() > static_cast<size_t>(2 * params.beam_size))
      candidates.resize(2 * params.beam_size);

    std::vector<Hypothesis> next_live;
    for (Candidate& c : candidates) {
      bool is_eos = c.tokens.back() == params.eos_id;
      if (is_eos || static_cast<int>(c.tokens.size()) == params.max_length) {
        Hypothesis h;
        h.sum_logprob = c.sum;
        h.finished = true;
        h.score = finalize_score(c.sum, static_cast<int>(c.tokens.size()),
                                 params.length_penalty);
        h.tokens = std::move(c.tokens);
        finished.push_back(std::move(h));
      } else if (next_live.size() < static_cast<size_t>(params.beam_size)) {
        Hypothesis h;
        h.sum_logprob = c.sum;
        h.tokens = std::move(c.tokens);
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);

    if (finished.size() >= static_cast<size_t>(params.beam_size) && !live.empty()) {
      std::sort(finished.begin(), finished.end(), better_final);
      double worst_kept = finished[params.beam_size - 1].score;
      double best_possible = kNegInf;
      for (const Hypothesis& h : live)
        best_possible = std::max(best_possible,
                                 optimistic_bound(h.sum_logprob,
                                                  static_cast<int>(h.tokens.size()), params));
      if (worst_kept >= best_possible) break;
    }
  }

  std::sort(finished.begin(), finished.end(), better_final);
  return finished;
}

namespace {

void exhaustive_rec(const StepScorer& scorer, const DecodeParams& p, std::vector<int>& prefix,
                    double sum, Hypothesis& best, bool& have_best) {
  std::vector<double> lp = scorer(prefix);
  lp = ban_repeated_ngrams(prefix, p.nrns, std::move(lp));
  int vocab = static_cast<int>(lp.size());
  for (int t = 0; t < vocab; ++t) {
    if (lp[t] == kNegInf) continue;
    prefix.push_back(t);
    double s = sum + lp[t];
    bool terminal = (t == p.eos_id) || (static_cast<int>(prefix.size()) == p.max_length);
    if (terminal) {
      Hypothesis h;
      h.tokens = prefix;
      h.sum_logprob = s;
      h.finished = true;
      h.score = finalize_score(s, static_cast<int>(prefix.size()), p.length_penalty);
      if (!have_best || better_final(h, best)) {
        best = std::move(h);
        have_best = true;
      }
    } else {
      exhaustive_rec(scorer, p, prefix, s, best, have_best);
    }
    prefix.pop_back();
  }
}

}  // namespace

Hypothesis exhaustive_decode(const StepScorer& scorer, const DecodeParams& params) {
  std::vector<int> empty;
  int vocab = static_cast<int>(scorer(empty).size());
  double space = std::pow(static_cast<double>(vocab), static_cast<double>(params.max_length));
  if (space > 1e6)
    throw ContractError("exhaustive_decode: search space " + std::to_string(space) +
                        " exceeds the 1e6 guard");
  Hypothesis best;
  bool have_best = false;
  std::vector<int> prefix;
  exhaustive_rec(scorer, params, prefix, 0.0, best, have_best);
  if (!have_best) throw ContractError("exhaustive_decode: no legal sequence found");
  return best;
}

}  // namespace asrb
