#include "asrb/metrics.hpp"

#include <cstdio>

namespace asrb {

std::string format_report_line(const std::string& name, const AlignmentCounts& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s\t%.2f%% (%.2f%%)\t%lld %lld %lld %lld", name.c_str(),
                100.0 * wer(c), 100.0 * ier(c), c.substitutions, c.deletions, c.insertions,
                c.ref_len);
  return std::string(buf);
}

}  // namespace asrb
