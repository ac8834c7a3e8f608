#pragma once

// CLI entry point (also used directly by tests). Exit codes: 0 success,
// 1 usage error, 2 data/runtime error.

#include "asrb/layers.hpp"
#include "asrb/model.hpp"

#include <map>
#include <string>

namespace asrb {

int cli_run(int argc, const char* const* argv);

// key=value config files used for model/run manifests.
void write_kv(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_kv(const std::string& path);

std::map<std::string, std::string> dims_to_kv(const BridgeDims& d, const std::string& scheme,
                                              uint32_t seed);
BridgeDims dims_from_kv(const std::map<std::string, std::string>& kv, std::string* scheme,
                        uint32_t* seed);

}  // namespace asrb
