#pragma once

// Checkpoint file format (bit-exact round trip):
//   magic "ASRB", format version u32, count u32, then per parameter:
//   name length u16, name bytes, dtype tag u8 (0 = f32), rank u8,
//   dims (u32 each), raw little-endian values.

#include "asrb/tensor.hpp"

#include <string>
#include <vector>

namespace asrb {

struct ParamBlob {
  std::string name;
  uint8_t dtype = 0;  // 0 = f32
  std::vector<uint32_t> dims;
  std::vector<float> value;

  size_t element_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

void save_checkpoint(const std::string& path, const std::vector<Param<float>*>& params);
void save_checkpoint_blobs(const std::string& path, const std::vector<ParamBlob>& blobs);
std::vector<ParamBlob> load_checkpoint(const std::string& path);

// Copies blob values into the matching params; any name/shape difference
// raises a ContractError describing the full diff.
void apply_checkpoint(const std::vector<ParamBlob>& blobs,
                      const std::vector<Param<float>*>& params);

// Elementwise arithmetic mean across checkpoints with identical layouts.
std::vector<ParamBlob> average_checkpoints(const std::vector<std::string>& paths);

}  // namespace asrb
