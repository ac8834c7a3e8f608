#pragma once

// Waveform I/O (PCM16 mono WAV), synthetic speech-like corpus generation,
// speed/volume perturbation, and non-speech (empty transcript) mixing.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace asrb {

using Rng = std::mt19937;

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 2000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

struct Utterance {
  std::string audio_path;
  std::string text;  // empty text marks a non-speech utterance
  double duration_s = 0.0;
};

struct Manifest {
  std::string name;
  uint32_t seed = 0;
  std::vector<Utterance> utterances;
};

// PCM 16-bit mono only. Samples scale by /32768 on read; write rounds
// half-away-from-zero and clamps to int16, so read(write(w)) reproduces the
// quantized samples bit-exactly.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

// Tab-separated, one utterance per line: audio_path \t text \t duration_s.
// A leading '#name=...\tseed=...' header carries the manifest metadata.
Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& m);

struct AugmentPolicy {
  double p_speed = 0.3;
  double speed_lo = 0.9, speed_hi = 1.1;
  double p_volume = 0.3;
  double gain_lo = 0.25, gain_hi = 2.0;
};

struct SynthConfig {
  int vocab_size = 32;
  int utt_count = 200;
  int tokens_min = 2, tokens_max = 8;
  int sample_rate = 2000;
  int samples_per_token = 100;
  double amplitude = 0.5;
  double noise_sigma = 0.05;
  double nonspeech_fraction = 0.0;
};

// The sinusoid frequency assigned to token i (fixed per config).
double token_frequency(const SynthConfig& cfg, int token);

// Token id <-> transcript word.
std::string token_word(int token);
int parse_token_word(const std::string& word, int vocab_size);

// Renders the corpus under out_dir and returns its manifest (also written
// to out_dir/manifest.tsv). Deterministic per (cfg, seed): each utterance
// draws from its own (seed, index)-derived stream.
Manifest synth_corpus(const SynthConfig& cfg, uint32_t seed, const std::string& out_dir,
                      const std::string& name = "synth");

// Linear-interpolation resampling on the grid t_out[k] = k * s; the output
// keeps the input sample rate (tempo + pitch shift).
Waveform speed_perturb(const Waveform& w, double s);

// Gain then clamp to [-1, 1].
Waveform volume_perturb(const Waveform& w, double g);

// Speed then volume, each applied with its policy probability.
Waveform augment(const Waveform& w, const AugmentPolicy& policy, Rng& rng);

// Mixes round(ratio * total) non-speech utterances into the training
// manifest with a seeded shuffle. ratio = 0 returns train unchanged.
Manifest mix_nset(const Manifest& train, const Manifest& nonspeech, double ratio,
                  uint32_t seed);

}  // namespace asrb
