#pragma once

// WER / IER via minimal-edit-distance alignment with deterministic
// tie-breaking (fewer insertions, then fewer deletions), plus corpus-level
// pooled aggregation.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace asrb {

struct AlignmentCounts {
  long long substitutions = 0;
  long long deletions = 0;
  long long insertions = 0;
  long long ref_len = 0;

  AlignmentCounts& operator+=(const AlignmentCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
};

// Minimal (cost, insertions, deletions) alignment, lexicographically.
template <typename Tok>
AlignmentCounts align(const std::vector<Tok>& ref, const std::vector<Tok>& hyp) {
  size_t n = ref.size(), m = hyp.size();
  struct Cell {
    int cost, ins, del;
    bool operator<(const Cell& o) const {
      if (cost != o.cost) return cost < o.cost;
      if (ins != o.ins) return ins < o.ins;
      return del < o.del;
    }
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {static_cast<int>(j), static_cast<int>(j), 0};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<int>(i), 0, static_cast<int>(i)};
    for (size_t j = 1; j <= m; ++j) {
      int sub_cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      Cell via_diag{prev[j - 1].cost + sub_cost, prev[j - 1].ins, prev[j - 1].del};
      Cell via_del{prev[j].cost + 1, prev[j].ins, prev[j].del + 1};
      Cell via_ins{cur[j - 1].cost + 1, cur[j - 1].ins + 1, cur[j - 1].del};
      cur[j] = std::min(via_diag, std::min(via_del, via_ins));
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[m];
  AlignmentCounts out;
  out.insertions = c.ins;
  out.deletions = c.del;
  out.substitutions = c.cost - c.ins - c.del;
  out.ref_len = static_cast<long long>(n);
  return out;
}

inline double wer(const AlignmentCounts& c) {
  return static_cast<double>(c.substitutions + c.deletions + c.insertions) /
         static_cast<double>(std::max<long long>(c.ref_len, 1));
}

inline double ier(const AlignmentCounts& c) {
  return static_cast<double>(c.insertions) /
         static_cast<double>(std::max<long long>(c.ref_len, 1));
}

inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

// Counts are pooled over pairs before division (standard corpus WER).
template <typename Tok>
AlignmentCounts corpus_counts(const std::vector<std::pair<std::vector<Tok>, std::vector<Tok>>>& pairs) {
  AlignmentCounts total;
  for (const auto& [ref, hyp] : pairs) total += align(ref, hyp);
  return total;
}

// "NAME\tWER% (IER%)\tS D I N", WER/IER as percentages with 2 decimals.
std::string format_report_line(const std::string& name, const AlignmentCounts& c);

}  // namespace asrb
