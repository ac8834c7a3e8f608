#include "asrb/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace asrb {

namespace {

namespace fs = std::filesystem;

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0] | (b[1] << 8) | (b[2] << 16) |
                               (static_cast<uint32_t>(b[3]) << 24));
}

int16_t quantize(float s) {
  double v = static_cast<double>(s) * 32768.0;
  double r = (v >= 0) ? std::floor(v + 0.5) : std::ceil(v - 0.5);  // half away from zero
  return static_cast<int16_t>(std::clamp(r, -32768.0, 32767.0));
}

}  // namespace

void write_wav(const std::string& path, const Waveform& w) {
  if (w.samples.empty()) throw DataError("write_wav: empty waveform");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_wav: cannot open " + path);
  uint32_t data_bytes = static_cast<uint32_t>(w.samples.size()) * 2;
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<uint32_t>(w.sample_rate));
  put_u32(os, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16(os, 2);                                          // block align
  put_u16(os, 16);                                         // bits per sample
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (float s : w.samples) {
    int16_t q = quantize(s);
    put_u16(os, static_cast<uint16_t>(q));
  }
  if (!os) throw DataError("write_wav: write failed for " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_wav: cannot open " + path);
  char id[5] = {0};
  is.read(id, 4);
  if (!is || std::strncmp(id, "RIFF", 4) != 0)
    throw DataError("read_wav: bad chunk id '" + std::string(id) + "' at offset 0 in " + path);
  get_u32(is);  // riff size
  is.read(id, 4);
  if (!is || std::strncmp(id, "WAVE", 4) != 0)
    throw DataError("read_wav: bad format id at offset 8 in " + path);

  Waveform w;
  bool have_fmt = false;
  while (is.read(id, 4)) {
    uint32_t chunk_size = get_u32(is);
    auto chunk_start = is.tellg();
    if (std::strncmp(id, "fmt ", 4) == 0) {
      uint16_t fmt = get_u16(is);
      uint16_t channels = get_u16(is);
      uint32_t rate = get_u32(is);
      get_u32(is);  // byte rate
      get_u16(is);  // block align
      uint16_t bits = get_u16(is);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw DataError("read_wav: unsupported encoding in 'fmt ' chunk (need PCM16 mono): " +
                        path);
      w.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::strncmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError("read_wav: 'data' before 'fmt ' in " + path);
      size_t count = chunk_size / 2;
      w.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        if (!is)
          throw DataError("read_wav: truncated 'data' chunk at offset " +
                          std::to_string(static_cast<long long>(is.tellg())) + " in " + path);
        int16_t q = static_cast<int16_t>(get_u16(is));
        w.samples[i] = static_cast<float>(q) / 32768.0f;
      }
      if (!is) throw DataError("read_wav: truncated 'data' chunk in " + path);
      return w;
    }
    is.seekg(static_cast<std::streamoff>(chunk_start) + chunk_size, std::ios::beg);
  }
  throw DataError("read_wav: no 'data' chunk in " + path);
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os) throw DataError("write_manifest: cannot open " + path);
  os << "#name=" << m.name << "\tseed=" << m.seed << "\n";
  for (const auto& u : m.utterances) {
    char dur[32];
    std::snprintf(dur, sizeof(dur), "%.6f", u.duration_s);
    os << u.audio_path << "\t" << u.text << "\t" << dur << "\n";
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("read_manifest: cannot open " + path);
  Manifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      size_t name_pos = line.find("name=");
      size_t seed_pos = line.find("seed=");
      if (name_pos != std::string::npos) {
        size_t end = line.find('\t', name_pos);
        m.name = line.substr(name_pos + 5, end == std::string::npos ? end : end - name_pos - 5);
      }
      if (seed_pos != std::string::npos)
        m.seed = static_cast<uint32_t>(std::stoul(line.substr(seed_pos + 5)));
      continue;
    }
    size_t t1 = line.find('\t');
    size_t t2 = line.rfind('\t');
    if (t1 == std::string::npos || t2 == t1)
      throw DataError("read_manifest: line " + std::to_string(line_no) +
                      " is not 3 tab-separated fields in " + path);
    Utterance u;
    u.audio_path = line.substr(0, t1);
    u.text = line.substr(t1 + 1, t2 - t1 - 1);
    u.duration_s = std::stod(line.substr(t2 + 1));
    m.utterances.push_back(std::move(u));
  }
  return m;
}

double token_frequency(const SynthConfig& cfg, int token) {
  // Evenly spaced well below Nyquist.
  double lo = 0.05 * cfg.sample_rate;
  double hi = 0.42 * cfg.sample_rate;
  if (cfg.vocab_size == 1) return lo;
  return lo + (hi - lo) * token / (cfg.vocab_size - 1);
}

std::string token_word(int token) { return "t" + std::to_string(token); }

int parse_token_word(const std::string& word, int vocab_size) {
  if (word.size() < 2 || word[0] != 't')
    throw DataError("parse_token_word: malformed token '" + word + "'");
  int id = std::stoi(word.substr(1));
  if (id < 0 || id >= vocab_size)
    throw DataError("parse_token_word: token '" + word + "' outside vocab " +
                    std::to_string(vocab_size));
  return id;
}

namespace {

Waveform render_speech(const SynthConfig& cfg, const std::vector<int>& tokens, Rng& rng) {
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.reserve(tokens.size() * cfg.samples_per_token);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
  for (int tok : tokens) {
    double f = token_frequency(cfg, tok);
    double phase = phase_dist(rng);
    for (int i = 0; i < cfg.samples_per_token; ++i) {
      double t = static_cast<double>(i) / cfg.sample_rate;
      double s = cfg.amplitude * std::sin(2.0 * M_PI * f * t + phase);
      if (cfg.noise_sigma > 0) s += noise(rng);
      w.samples.push_back(static_cast<float>(std::clamp(s, -1.0, 1.0)));
    }
  }
  return w;
}

Waveform render_nonspeech(const SynthConfig& cfg, int n_tokens, Rng& rng) {
  // Smoothed broadband noise; acoustically unlike the pure-tone tokens.
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  int len = n_tokens * cfg.samples_per_token;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> raw(len);
  for (auto& v : raw) v = noise(rng);
  // 5-tap moving average keeps most energy below the token band.
  for (int i = 0; i < len; ++i) {
    double acc = 0.0;
    int n = 0;
    for (int j = std::max(0, i - 4); j <= i; ++j, ++n) acc += raw[j];
    w.samples.push_back(static_cast<float>(std::clamp(0.35 * acc / n, -1.0, 1.0)));
  }
  return w;
}

}  // namespace

Manifest synth_corpus(const SynthConfig& cfg, uint32_t seed, const std::string& out_dir,
                      const std::string& name) {
  fs::create_directories(out_dir);
  Manifest m;
  m.name = name;
  m.seed = seed;
  int nonspeech_count = static_cast<int>(std::lround(cfg.nonspeech_fraction * cfg.utt_count));
  for (int i = 0; i < cfg.utt_count; ++i) {
    std::seed_seq seq{seed, static_cast<uint32_t>(i), 0x5EEDu};
    Rng rng(seq);
    std::uniform_int_distribution<int> len_dist(cfg.tokens_min, cfg.tokens_max);
    std::uniform_int_distribution<int> tok_dist(0, cfg.vocab_size - 1);
    int n_tokens = len_dist(rng);
    bool nonspeech = i < nonspeech_count;  // shuffling is the consumer's concern
    Utterance u;
    Waveform w;
    if (nonspeech) {
      w = render_nonspeech(cfg, n_tokens, rng);
      u.text = "";
    } else {
      std::vector<int> tokens(n_tokens);
      std::string text;
      for (int j = 0; j < n_tokens; ++j) {
        tokens[j] = tok_dist(rng);
        if (j) text += ' ';
        text += token_word(tokens[j]);
      }
      w = render_speech(cfg, tokens, rng);
      u.text = text;
    }
    char fname[32];
    std::snprintf(fname, sizeof(fname), "utt%05d.wav", i);
    u.audio_path = (fs::path(out_dir) / fname).string();
    u.duration_s = w.duration_s();
    write_wav(u.audio_path, w);
    m.utterances.push_back(std::move(u));
  }
  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), m);
  return m;
}

Waveform speed_perturb(const Waveform& w, double s) {
  if (s <= 0) throw DataError("speed_perturb: factor must be positive");
  if (s == 1.0) return w;
  size_t len_out = static_cast<size_t>(std::lround(w.samples.size() / s));
  if (len_out == 0)
    throw DataError("speed_perturb: factor " + std::to_string(s) +
                    " empties a " + std::to_string(w.samples.size()) + "-sample input");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(len_out);
  size_t last = w.samples.size() - 1;
  for (size_t k = 0; k < len_out; ++k) {
    double t = k * s;
    size_t i0 = static_cast<size_t>(t);
    if (i0 >= last) {
      out.samples[k] = w.samples[last];
      continue;
    }
    double frac = t - i0;
    out.samples[k] = static_cast<float>((1.0 - frac) * w.samples[i0] + frac * w.samples[i0 + 1]);
  }
  return out;
}

Waveform volume_perturb(const Waveform& w, double g) {
  if (g < 0) throw DataError("volume_perturb: gain must be non-negative");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  for (size_t i = 0; i < w.samples.size(); ++i)
    out.samples[i] = static_cast<float>(std::clamp(w.samples[i] * g, -1.0, 1.0));
  return out;
}

Waveform augment(const Waveform& w, const AugmentPolicy& policy, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Waveform out = w;
  if (coin(rng) < policy.p_speed) {
    std::uniform_real_distribution<double> sd(policy.speed_lo, policy.speed_hi);
    out = speed_perturb(out, sd(rng));
  }
  if (coin(rng) < policy.p_volume) {
    std::uniform_real_distribution<double> gd(policy.gain_lo, policy.gain_hi);
    out = volume_perturb(out, gd(rng));
  }
  return out;
}

Manifest mix_nset(const Manifest& train, const Manifest& nonspeech, double ratio,
                  uint32_t seed) {
  if (ratio < 0.0 || ratio >= 1.0) throw DataError("mix_nset: ratio must be in [0, 1)");
  if (ratio == 0.0) return train;
  long long n_train = static_cast<long long>(train.utterances.size());
  long long k = std::llround(ratio * n_train / (1.0 - ratio));
  if (k > static_cast<long long>(nonspeech.utterances.size()))
    throw DataError("mix_nset: need " + std::to_string(k) + " non-speech utterances, have " +
                    std::to_string(nonspeech.utterances.size()));
  Manifest out;
  out.name = train.name + "+nset";
  out.seed = seed;
  out.utterances = train.utterances;
  for (long long i = 0; i < k; ++i) {
    Utterance u = nonspeech.utterances[i];
    u.text.clear();  // empty transcript is the NSET contract
    out.utterances.push_back(std::move(u));
  }
  std::seed_seq seq{seed, 0x45E7u};
  Rng rng(seq);
  std::shuffle(out.utterances.begin(), out.utterances.end(), rng);
  return out;
}

}  // namespace asrb
