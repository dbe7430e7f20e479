// include/lipspot/training.h

// Copyright 2026  The lipspot authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Training: minibatch pair construction, the joint spotting + pronunciation
// loss, the two-phase curriculum with its backend swap and one-epoch freeze,
// the stepped learning-rate schedule, checkpointing, and the epoch loop with
// validation-EER model selection.

#ifndef LIPSPOT_TRAINING_H_
#define LIPSPOT_TRAINING_H_

#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "lipspot/common.h"
#include "lipspot/g2p.h"
#include "lipspot/kwsnet.h"
#include "lipspot/manifest.h"
#include "lipspot/metrics.h"
#include "lipspot/nn/adam.h"
#include "lipspot/nn/param.h"
#include "lipspot/nn/types.h"
#include "lipspot/phonedict.h"
#include "lipspot/rng.h"

namespace lipspot {
namespace train {

// Training aborts with this when a minibatch loss leaves the reals.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// One (video, keyword) training example.  label is 1 exactly when the
// keyword occurs in the video's transcript; the auxiliary decoder target is
// attached here so the loss needs no further dictionary lookups.
struct PairExample {
  std::string video_id;
  std::string keyword;
  int label = 0;
  std::vector<int> phoneme_target;
};

// Pairs for one minibatch plus bookkeeping about how they were drawn.
struct PairSet {
  std::vector<PairExample> pairs;
  std::vector<std::string> keywords;  // distinct paired keywords, sorted
  bool used_replacement = false;      // negative pool ran dry at least once
  int dropped_videos = 0;             // videos with no usable negative pool
};

// Builds the minibatch pair list.  A word is an eligible keyword when it
// belongs to the training vocabulary, is in the dictionary, and its first
// pronunciation has at least min_phonemes phonemes.  Every video is paired
// positively with each of its own distinct eligible words and negatively
// with the same number of keywords drawn without replacement from the other
// videos' eligible words (never from the video's own transcript); if that
// pool is too small, draws fall back to replacement and the pair set is
// flagged.  A video whose pool is empty contributes no pairs at all so the
// per-video balance invariant survives.
PairSet BuildPairs(const std::vector<const cli::ManifestRecord*>& videos,
                   const std::set<std::string>& train_vocab,
                   const PhoneticDictionary& dict,
                   const g2p::G2PConfig& g2p_config, int min_phonemes,
                   Rng* rng);

// The per-example joint objective: binary cross-entropy of the spotting
// posterior against the label, plus alpha_w times the mean decoder
// cross-entropy of the keyword's pronunciation.  decoder_posteriors holds
// one row per target symbol; pass an empty matrix (and target) when
// alpha_w is zero.  The posterior is clamped to [eps, 1-eps].
double JointLoss(int label, double posterior,
                 const nn::Mat<double>& decoder_posteriors,
                 const std::vector<int>& phoneme_target, double alpha_w,
                 double eps = 1e-7);

// Stepped Adam schedule: the rate starts at initial_lr and halves every
// decay_interval epochs.
struct OptimizerSchedule {
  double initial_lr = 2e-3;
  int decay_interval = 20;
  int total_epochs = 100;
  int videos_per_minibatch = 40;

  // Rate for a 1-based epoch: initial_lr * 2^-floor((epoch-1)/interval).
  double LearningRate(int epoch) const;
  void Validate() const;
};

// One contiguous span of epochs with fixed data sources, pairing rule,
// loss weight, and classifier backend.  freeze_first_epoch lists parameter
// prefixes excluded from updates while the phase's first epoch runs (used
// to burn in a freshly activated backend); batch-norm running statistics
// are held frozen over the same epoch.
struct CurriculumPhase {
  int first_epoch = 1;
  int last_epoch = 1;
  std::vector<std::string> subsets;
  int min_phonemes = 4;
  double alpha_w = 1.0;
  kws::KwsNetConfig::Backend backend =
      kws::KwsNetConfig::Backend::kFeedForward;
  std::vector<std::string> freeze_first_epoch;
};

// The standard two-phase curriculum: feed-forward warm-up on the training
// subset, then the sequence backend over train + pretrain with a smaller
// auxiliary weight, a stricter keyword length floor, and everything but the
// new backend frozen for its first epoch.
std::vector<CurriculumPhase> MakeCurriculum(int phase1_last_epoch,
                                            int total_epochs);

// Phases must partition [1, total_epochs] in order.  Throws
// std::invalid_argument otherwise.
void ValidateCurriculum(const std::vector<CurriculumPhase>& phases,
                        int total_epochs);

const CurriculumPhase& PhaseForEpoch(
    const std::vector<CurriculumPhase>& phases, int epoch);

// One line of the training log.
struct EpochRecord {
  int epoch = 0;
  int phase = 0;  // 1-based index into the curriculum
  double lr = 0.0;
  double mean_primary_loss = 0.0;    // spotting cross-entropy over pairs
  double mean_auxiliary_loss = 0.0;  // unweighted decoder cross-entropy
  double validation_eer = 0.0;
};

// Comma-separated with a header row.
void WriteTrainingLog(std::ostream& out,
                      const std::vector<EpochRecord>& records);
std::vector<EpochRecord> ReadTrainingLog(std::istream& in);

// Checkpoint container: a textual header with metadata and tensor shapes
// followed by raw little-endian float32 payloads.  Every registry tensor
// (trainable and state) is stored by name; optimizer moments ride along
// under the names `adam.m/<param>` and `adam.v/<param>` with the step count
// in the metadata.  Loading requires an exact name/shape match with the
// registry and restores the optimizer when one is supplied.
void SaveCheckpoint(const std::string& path,
                    const nn::ParamRegistry<float>& reg,
                    const nn::AdamOptimizer<float>* adam,
                    const std::map<std::string, std::string>& meta);
std::map<std::string, std::string> LoadCheckpoint(
    const std::string& path, const nn::ParamRegistry<float>& reg,
    nn::AdamOptimizer<float>* adam);

// The metadata block alone, without touching any tensor.  Used to discover
// what kind of model a checkpoint holds before building one.
std::map<std::string, std::string> ReadCheckpointMeta(const std::string& path);

// Which spotting model the trainer drives: the stacked two-layer network
// with switchable backends, or the whole-video embedding baseline.
enum class ModelKind { kStacked, kVideoEmbedding };

struct TrainerOptions {
  OptimizerSchedule schedule;
  std::vector<CurriculumPhase> curriculum;
  ModelKind model = ModelKind::kStacked;
  uint64_t master_seed = 1;
  std::string checkpoint_dir;        // "" disables on-disk checkpoints
  int validation_min_phonemes = 6;   // query floor for the validation metric
  std::ostream* log = nullptr;       // per-epoch progress lines when set
  // Carried verbatim into every checkpoint this trainer writes; reserved
  // bookkeeping keys win on collision.
  std::map<std::string, std::string> extra_checkpoint_meta;
};

// Scores plus localization records for one subset against a query list.
struct SubsetScores {
  std::vector<metrics::ScoreRecord> records;
  // The peak frame (0-based) for every record, aligned with records; empty
  // when the active backend does not localize.
  std::vector<int> frame_estimates;
  // One record per positive (query, video) pair when the active backend
  // localizes; frame indices are 0-based.
  std::vector<metrics::LocalizationRecord> localizations;
};

// Owns the grapheme-to-phoneme encoder and the spotting network, and runs
// the curriculum over a feature corpus described by a manifest.  All
// randomness derives from (master_seed, epoch), so any epoch reproduces
// bit-exactly in isolation and a resumed run continues the original's loss
// sequence.
class Trainer {
 public:
  Trainer(const cli::Manifest& manifest, const std::string& features_root,
          const PhoneticDictionary& dict, const VocabularySplit& split,
          const kws::KwsNetConfig& kws_config,
          const g2p::G2PConfig& g2p_config, const TrainerOptions& options);
  ~Trainer();

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // Runs epochs next_epoch()..total_epochs and returns their records.
  std::vector<EpochRecord> Train();

  // Runs exactly one epoch (the next one); exposed for fine-grained tests.
  EpochRecord TrainEpoch();

  // Validation EER of the current parameters under the current backend.
  double EvaluateValidationEer();

  // Scores every video of a subset against every query word; labels come
  // from the transcripts, localization windows from the boundary columns.
  SubsetScores ScoreSubsetQueries(const std::string& subset,
                                  const std::vector<std::string>& queries);

  // Checkpointing and resume.  LoadState restores parameters, optimizer
  // state, epoch cursor, and best-so-far bookkeeping.
  void SaveState(const std::string& path) const;
  void LoadState(const std::string& path);

  // Copies the best-validation snapshot back into the live parameters.
  void RestoreBestParameters();

  int next_epoch() const { return next_epoch_; }
  int best_epoch() const { return best_epoch_; }
  double best_validation_eer() const { return best_validation_eer_; }
  const std::vector<EpochRecord>& records() const { return records_; }
  const TrainerOptions& options() const { return options_; }

  g2p::G2pModel<float>& g2p_model() { return *g2p_; }
  kws::KwsNet<float>& kws_model();
  kws::VideoEmbeddingNet<float>& baseline_model();
  const nn::ParamRegistry<float>& registry() const { return registry_; }
  nn::AdamOptimizer<float>& optimizer() { return adam_; }

  // The feature matrix for one video, loaded on first use and cached.
  const nn::Mat<float>& Features(const std::string& video_id);

 private:
  std::vector<const cli::ManifestRecord*> SubsetRecords(
      const std::vector<std::string>& subsets) const;
  nn::Mat<float> EncodeQueries(const std::vector<std::string>& queries);
  nn::Mat<float> ScoreOneVideo(const nn::Mat<float>& features,
                               const nn::Mat<float>& r_queries,
                               std::vector<int>* t_hat);
  void SnapshotBest();

  cli::Manifest manifest_;
  std::string features_root_;
  const PhoneticDictionary* dict_;
  VocabularySplit split_;
  std::set<std::string> train_vocab_;
  TrainerOptions options_;

  kws::KwsNetConfig kws_config_;
  std::unique_ptr<g2p::G2pModel<float>> g2p_;
  std::unique_ptr<kws::KwsNet<float>> stacked_;
  std::unique_ptr<kws::VideoEmbeddingNet<float>> baseline_;
  nn::ParamRegistry<float> registry_;
  nn::AdamOptimizer<float> adam_;

  std::map<std::string, nn::Mat<float>> feature_cache_;
  std::map<std::string, nn::Mat<float>> best_snapshot_;

  int next_epoch_ = 1;
  int best_epoch_ = 0;
  double best_validation_eer_ = 0.0;
  std::vector<EpochRecord> records_;
};

}  // namespace train
}  // namespace lipspot

#endif  // LIPSPOT_TRAINING_H_
