#pragma once

// Training loop for any fine-tune scheme: Adam over the trainable set,
// linear warmup then constant lr, gradient clipping, periodic validation
// checkpoints, best-window selection, and the non-speech (NSET) fine-tune
// stage.

#include "asrb/checkpoint.hpp"
#include "asrb/data.hpp"
#include "asrb/matchloss.hpp"
#include "asrb/model.hpp"

#include <optional>

namespace asrb {

struct TrainConfig {
  int steps = 2000;
  int batch_size = 8;
  double lr = 1e-3;
  int warmup_steps = 100;
  int checkpoint_every = 100;
  std::optional<MatchLossConfig> match_loss;
  std::optional<AugmentPolicy> augment_policy;
  uint32_t seed = 1;
  double grad_clip = 1.0;
  double val_fraction = 0.1;
  std::string out_dir = ".";
  bool write_logs = true;
};

struct CheckpointRecord {
  int step = 0;
  std::string path;
  double validation_loss = 0.0;
};

// Runs the loop and returns one record per saved checkpoint. Fully
// deterministic given (model state, manifest, config). Aborts with a
// ContractError on a non-finite loss.
std::vector<CheckpointRecord> train(BridgeModel<float>& model, const Manifest& manifest,
                                    const TrainConfig& cfg);

// The consecutive k-window minimizing mean validation loss; earliest on ties.
std::vector<CheckpointRecord> select_best_window(const std::vector<CheckpointRecord>& records,
                                                 int k = 5);

// Continues training on mix_nset(train, nonspeech, ratio). The caller sets
// the shortened step count and reduced lr in cfg.
std::vector<CheckpointRecord> nset_finetune(BridgeModel<float>& model,
                                            const Manifest& train_manifest,
                                            const Manifest& nonspeech_manifest, double ratio,
                                            const TrainConfig& cfg);

// Checkpoint-record sidecar (JSON lines: {"step","path","validation_loss"}).
void write_records(const std::string& path, const std::vector<CheckpointRecord>& records);
std::vector<CheckpointRecord> read_records(const std::string& path);

}  // namespace asrb
