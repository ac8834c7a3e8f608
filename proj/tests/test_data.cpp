#include <doctest.h>

#include "asrb/data.hpp"
#include "asrb/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace asrb;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("asrb_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("wav write/read round trip is the identity on quantized values") {
  auto dir = temp_dir("wav");
  Waveform w;
  w.sample_rate = 8000;
  w.samples = {0.25f, -0.5f, 0.123f};
  auto path = (dir / "a.wav").string();
  write_wav(path, w);
  Waveform r = read_wav(path);
  CHECK(r.sample_rate == 8000);
  REQUIRE(r.samples.size() == 3);
  // Values already on the int16 grid survive a second round trip bit-exactly.
  write_wav(path, r);
  Waveform r2 = read_wav(path);
  CHECK(r2.samples == r.samples);
  CHECK(r.samples[0] == doctest::Approx(0.25f).epsilon(1e-4));
  CHECK(r.samples[1] == doctest::Approx(-0.5f).epsilon(1e-4));
}

TEST_CASE("wav header fields: byte rate and block align") {
  auto dir = temp_dir("wavhdr");
  Waveform w;
  w.sample_rate = 16000;
  w.samples = {0.0f, 0.1f};
  auto path = dir / "hdr.wav";
  write_wav(path.string(), w);
  auto bytes = slurp(path);
  REQUIRE(bytes.size() >= 44);
  auto u32 = [&](int off) {
    return static_cast<uint32_t>(static_cast<unsigned char>(bytes[off])) |
           (static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 8) |
           (static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 16) |
           (static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 3])) << 24);
  };
  auto u16 = [&](int off) {
    return static_cast<uint16_t>(static_cast<unsigned char>(bytes[off]) |
                                 (static_cast<unsigned char>(bytes[off + 1]) << 8));
  };
  CHECK(u32(24) == 16000);  // sample rate
  CHECK(u32(28) == 32000);  // byte rate
  CHECK(u16(32) == 2);      // block align
  CHECK(u16(34) == 16);     // bits per sample
}

TEST_CASE("truncated data chunk raises a structured error") {
  auto dir = temp_dir("wavtrunc");
  Waveform w;
  w.sample_rate = 2000;
  w.samples.assign(100, 0.1f);
  auto path = dir / "t.wav";
  write_wav(path.string(), w);
  auto bytes = slurp(path);
  std::ofstream os(path, std::ios::binary);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 50));
  os.close();
  CHECK_THROWS_WITH_AS(read_wav(path.string()), doctest::Contains("truncated"), DataError);
}

TEST_CASE("bad magic raises a parse error naming the offset") {
  auto dir = temp_dir("wavmagic");
  auto path = dir / "bad.wav";
  std::ofstream os(path, std::ios::binary);
  os << "JUNKJUNKJUNKJUNK";
  os.close();
  CHECK_THROWS_WITH_AS(read_wav(path.string()), doctest::Contains("offset 0"), DataError);
}

TEST_CASE("synthesis is byte-identical per seed") {
  SynthConfig cfg;
  cfg.utt_count = 6;
  cfg.vocab_size = 5;
  auto d1 = temp_dir("synth1");
  auto d2 = temp_dir("synth2");
  auto m1 = synth_corpus(cfg, 42, d1.string());
  auto m2 = synth_corpus(cfg, 42, d2.string());
  REQUIRE(m1.utterances.size() == m2.utterances.size());
  for (size_t i = 0; i < m1.utterances.size(); ++i) {
    CHECK(m1.utterances[i].text == m2.utterances[i].text);
    CHECK(slurp(m1.utterances[i].audio_path) == slurp(m2.utterances[i].audio_path));
  }
  // Different seed changes the corpus.
  auto d3 = temp_dir("synth3");
  auto m3 = synth_corpus(cfg, 43, d3.string());
  bool any_diff = false;
  for (size_t i = 0; i < m1.utterances.size(); ++i)
    if (m1.utterances[i].text != m3.utterances[i].text) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("noiseless single token is a pure tone: zero-crossing oracle") {
  SynthConfig cfg;
  cfg.utt_count = 4;
  cfg.vocab_size = 8;
  cfg.tokens_min = cfg.tokens_max = 1;
  cfg.noise_sigma = 0.0;
  auto dir = temp_dir("tone");
  auto m = synth_corpus(cfg, 7, dir.string());
  for (const auto& u : m.utterances) {
    auto words = split_words(u.text);
    REQUIRE(words.size() == 1);
    int tok = parse_token_word(words[0], cfg.vocab_size);
    double f = token_frequency(cfg, tok);
    Waveform w = read_wav(u.audio_path);
    int crossings = 0;
    for (size_t i = 1; i < w.samples.size(); ++i)
      if ((w.samples[i - 1] < 0) != (w.samples[i] < 0)) ++crossings;
    double duration = static_cast<double>(w.samples.size()) / w.sample_rate;
    CHECK(std::abs(crossings - 2.0 * f * duration) <= 2.0);
  }
}

TEST_CASE("nonspeech fraction zero means no empty transcripts") {
  SynthConfig cfg;
  cfg.utt_count = 10;
  cfg.nonspeech_fraction = 0.0;
  auto m = synth_corpus(cfg, 3, temp_dir("allspeech").string());
  for (const auto& u : m.utterances) CHECK_FALSE(u.text.empty());

  cfg.nonspeech_fraction = 0.3;
  auto mn = synth_corpus(cfg, 3, temp_dir("somenoise").string());
  int empty = 0;
  for (const auto& u : mn.utterances)
    if (u.text.empty()) ++empty;
  CHECK(empty == 3);
}

TEST_CASE("manifest round trip") {
  auto dir = temp_dir("manifest");
  Manifest m;
  m.name = "toy";
  m.seed = 9;
  m.utterances.push_back({"a.wav", "t1 t2", 0.5});
  m.utterances.push_back({"b.wav", "", 0.25});  // non-speech line
  auto path = (dir / "m.tsv").string();
  write_manifest(path, m);
  Manifest r = read_manifest(path);
  CHECK(r.name == "toy");
  CHECK(r.seed == 9);
  REQUIRE(r.utterances.size() == 2);
  CHECK(r.utterances[0].text == "t1 t2");
  CHECK(r.utterances[1].text.empty());
  CHECK(r.utterances[1].duration_s == doctest::Approx(0.25));
}

TEST_CASE("speed perturbation: identity, length law, grid oracle") {
  Waveform w;
  w.sample_rate = 2000;
  w.samples = {0.0f, 1.0f};

  auto same = speed_perturb(w, 1.0);
  CHECK(same.samples == w.samples);

  Waveform longw;
  longw.sample_rate = 2000;
  longw.samples.assign(1000, 0.5f);
  CHECK(speed_perturb(longw, 2.0).samples.size() == 500);
  for (double s : {0.5, 0.75, 0.9, 1.1, 1.5, 2.0})
    CHECK(static_cast<long long>(speed_perturb(longw, s).samples.size()) ==
          std::llround(1000.0 / s));

  // Interpolation on the grid t_out[k] = k * s, clamped at the last sample.
  auto slow = speed_perturb(w, 0.5);
  REQUIRE(slow.samples.size() == 4);
  CHECK(slow.samples[0] == doctest::Approx(0.0f));
  CHECK(slow.samples[1] == doctest::Approx(0.5f));
  CHECK(slow.samples[2] == doctest::Approx(1.0f));
  CHECK(slow.samples[3] == doctest::Approx(1.0f));
}

TEST_CASE("volume perturbation: identity, zero, clamp") {
  Waveform w;
  w.sample_rate = 2000;
  w.samples = {0.75f, -0.25f};
  CHECK(volume_perturb(w, 1.0).samples == w.samples);
  auto z = volume_perturb(w, 0.0);
  CHECK(z.samples == std::vector<float>{0.0f, 0.0f});
  auto loud = volume_perturb(w, 2.0);
  CHECK(loud.samples[0] == 1.0f);  // clamped
  CHECK(loud.samples[1] == -0.5f);
}

TEST_CASE("augment: degenerate policies are identities; output stays bounded") {
  std::mt19937 rng(5);
  Waveform w;
  w.sample_rate = 2000;
  w.samples = {0.9f, -0.8f, 0.7f, -0.6f};

  AugmentPolicy off;
  off.p_speed = 0.0;
  off.p_volume = 0.0;
  CHECK(augment(w, off, rng).samples == w.samples);

  AugmentPolicy unit;
  unit.p_speed = 1.0;
  unit.speed_lo = unit.speed_hi = 1.0;
  unit.p_volume = 0.0;
  CHECK(augment(w, unit, rng).samples == w.samples);

  AugmentPolicy wild;
  wild.p_speed = 1.0;
  wild.p_volume = 1.0;
  wild.gain_lo = 0.25;
  wild.gain_hi = 4.0;
  for (int t = 0; t < 50; ++t) {
    auto out = augment(w, wild, rng);
    for (float v : out.samples) {
      CHECK(v <= 1.0f);
      CHECK(v >= -1.0f);
    }
  }

  // Seeded reproducibility.
  std::mt19937 r1(77), r2(77);
  CHECK(augment(w, wild, r1).samples == augment(w, wild, r2).samples);
}

TEST_CASE("mix_nset counts and determinism") {
  Manifest train;
  train.name = "train";
  for (int i = 0; i < 90; ++i)
    train.utterances.push_back({"u" + std::to_string(i) + ".wav", "t1", 0.1});
  Manifest ns;
  ns.name = "noise";
  for (int i = 0; i < 30; ++i)
    ns.utterances.push_back({"n" + std::to_string(i) + ".wav", "junk", 0.1});

  auto unchanged = mix_nset(train, ns, 0.0, 1);
  REQUIRE(unchanged.utterances.size() == 90);
  for (size_t i = 0; i < 90; ++i)
    CHECK(unchanged.utterances[i].audio_path == train.utterances[i].audio_path);

  auto mixed = mix_nset(train, ns, 0.1, 1);
  CHECK(mixed.utterances.size() == 100);
  int empty = 0;
  for (const auto& u : mixed.utterances)
    if (u.text.empty()) ++empty;
  CHECK(empty == 10);  // non-speech transcripts are forced empty

  auto again = mix_nset(train, ns, 0.1, 1);
  for (size_t i = 0; i < mixed.utterances.size(); ++i)
    CHECK(mixed.utterances[i].audio_path == again.utterances[i].audio_path);

  CHECK_THROWS_AS(mix_nset(train, ns, 0.9, 1), DataError);
}

TEST_CASE("token word round trip and frequency spacing") {
  SynthConfig cfg;
  cfg.vocab_size = 8;
  for (int i = 0; i < 8; ++i) CHECK(parse_token_word(token_word(i), 8) == i);
  CHECK_THROWS_AS(parse_token_word("x3", 8), DataError);
  CHECK_THROWS_AS(parse_token_word("t9", 8), DataError);
  CHECK(token_frequency(cfg, 0) == doctest::Approx(0.05 * cfg.sample_rate));
  CHECK(token_frequency(cfg, 7) == doctest::Approx(0.42 * cfg.sample_rate));
  for (int i = 1; i < 8; ++i)
    CHECK(token_frequency(cfg, i) > token_frequency(cfg, i - 1));
}

}  // TEST_SUITE
