#include "asrb/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace asrb {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'R', 'B'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));  // little-endian host
  os.write(b, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  char b[sizeof(T)];
  is.read(b, sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<Param<float>*>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractError("save_checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  put_le<uint32_t>(os, kVersion);
  put_le<uint32_t>(os, static_cast<uint32_t>(params.size()));
  for (const Param<float>* p : params) {
    put_le<uint16_t>(os, static_cast<uint16_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_le<uint8_t>(os, 0);  // f32
    put_le<uint8_t>(os, 2);  // rank
    put_le<uint32_t>(os, static_cast<uint32_t>(p->rows));
    put_le<uint32_t>(os, static_cast<uint32_t>(p->cols));
    os.write(reinterpret_cast<const char*>(p->value.data()),
             static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!os) throw ContractError("save_checkpoint: write failed for " + path);
}

void save_checkpoint_blobs(const std::string& path, const std::vector<ParamBlob>& blobs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractError("save_checkpoint_blobs: cannot open " + path);
  os.write(kMagic, 4);
  put_le<uint32_t>(os, kVersion);
  put_le<uint32_t>(os, static_cast<uint32_t>(blobs.size()));
  for (const ParamBlob& b : blobs) {
    put_le<uint16_t>(os, static_cast<uint16_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    put_le<uint8_t>(os, b.dtype);
    put_le<uint8_t>(os, static_cast<uint8_t>(b.dims.size()));
    for (uint32_t d : b.dims) put_le<uint32_t>(os, d);
    os.write(reinterpret_cast<const char*>(b.value.data()),
             static_cast<std::streamsize>(b.value.size() * sizeof(float)));
  }
  if (!os) throw ContractError("save_checkpoint_blobs: write failed for " + path);
}

std::vector<ParamBlob> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContractError("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ContractError("load_checkpoint: bad magic in " + path);
  uint32_t version = get_le<uint32_t>(is);
  if (version != kVersion)
    throw ContractError("load_checkpoint: unsupported version " + std::to_string(version));
  uint32_t count = get_le<uint32_t>(is);
  std::vector<ParamBlob> blobs;
  blobs.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    ParamBlob b;
    uint16_t name_len = get_le<uint16_t>(is);
    b.name.resize(name_len);
    is.read(b.name.data(), name_len);
    b.dtype = get_le<uint8_t>(is);
    if (b.dtype != 0)
      throw ContractError("load_checkpoint: unknown dtype tag " + std::to_string(b.dtype));
    uint8_t rank = get_le<uint8_t>(is);
    for (uint8_t d = 0; d < rank; ++d) b.dims.push_back(get_le<uint32_t>(is));
    b.value.resize(b.element_count());
    is.read(reinterpret_cast<char*>(b.value.data()),
            static_cast<std::streamsize>(b.value.size() * sizeof(float)));
    if (!is) throw ContractError("load_checkpoint: truncated file " + path);
    blobs.push_back(std::move(b));
  }
  return blobs;
}

void apply_checkpoint(const std::vector<ParamBlob>& blobs,
                      const std::vector<Param<float>*>& params) {
  std::ostringstream diff;
  if (blobs.size() != params.size())
    diff << "parameter count " << blobs.size() << " vs " << params.size() << "; ";
  size_t n = std::min(blobs.size(), params.size());
  for (size_t i = 0; i < n; ++i) {
    const ParamBlob& b = blobs[i];
    const Param<float>& p = *params[i];
    if (b.name != p.name) diff << "name[" << i << "] '" << b.name << "' vs '" << p.name << "'; ";
    if (b.dims.size() != 2 || static_cast<int>(b.dims[0]) != p.rows ||
        static_cast<int>(b.dims[1]) != p.cols)
      diff << "shape[" << i << "] mismatch for '" << p.name << "'; ";
  }
  std::string d = diff.str();
  if (!d.empty()) throw ContractError("apply_checkpoint: " + d);
  for (size_t i = 0; i < n; ++i) params[i]->value = blobs[i].value;
}

std::vector<ParamBlob> average_checkpoints(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ContractError("average_checkpoints: no checkpoints given");
  std::vector<ParamBlob> acc = load_checkpoint(paths[0]);
  std::vector<std::vector<double>> sums(acc.size());
  for (size_t i = 0; i < acc.size(); ++i)
    sums[i].assign(acc[i].value.begin(), acc[i].value.end());
  for (size_t k = 1; k < paths.size(); ++k) {
    std::vector<ParamBlob> next = load_checkpoint(paths[k]);
    std::ostringstream diff;
    if (next.size() != acc.size())
      diff << "parameter count " << next.size() << " vs " << acc.size() << "; ";
    for (size_t i = 0; i < std::min(next.size(), acc.size()); ++i) {
      if (next[i].name != acc[i].name)
        diff << "name[" << i << "] '" << next[i].name << "' vs '" << acc[i].name << "'; ";
      else if (next[i].dims != acc[i].dims)
        diff << "shape mismatch for '" << acc[i].name << "'; ";
    }
    std::string d = diff.str();
    if (!d.empty())
      throw ContractError("average_checkpoints: " + paths[k] + ": " + d);
    for (size_t i = 0; i < acc.size(); ++i)
      for (size_t j = 0; j < sums[i].size(); ++j) sums[i][j] += next[i].value[j];
  }
  double inv = 1.0 / paths.size();
  for (size_t i = 0; i < acc.size(); ++i)
    for (size_t j = 0; j < sums[i].size(); ++j)
      acc[i].value[j] = static_cast<float>(sums[i][j] * inv);
  return acc;
}

}  // namespace asrb
