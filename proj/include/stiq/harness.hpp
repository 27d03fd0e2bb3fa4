#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stiq/data.hpp"
#include "stiq/model.hpp"
#include "stiq/noise.hpp"
#include "stiq/stiq.hpp"
#include "stiq/training.hpp"

namespace stiq {

// --- reporting -----------------------------------------------------------------

/// Ratios of obfuscated and combined metrics against the baseline.
struct ObfuscationReport {
  double accuracy_obfuscation = 0.0;  // mean(q1, q2) / baseline accuracy
  double loss_obfuscation = 0.0;      // mean(q1, q2) / baseline loss
  double accuracy_delta = 0.0;        // combined / baseline accuracy
  double loss_delta = 0.0;            // combined / baseline loss
};

/// Throws std::invalid_argument when a baseline metric is not positive.
ObfuscationReport compute_obfuscation(const ClassificationScore& baseline,
                                      const ClassificationScore& q1,
                                      const ClassificationScore& q2,
                                      const ClassificationScore& combined);

/// Epoch table. Accuracies are written as percentages. When `baseline` is
/// given its rows fill the baseline columns (matched by position) and its
/// counter goes to `baseline_evals`. Wall time is left out on purpose so
/// repeated runs are byte-identical; see write_timing_csv.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows,
                       std::span<const MetricsRow> baseline = {});
void write_timing_csv(std::ostream& out, std::span<const MetricsRow> rows,
                      std::span<const MetricsRow> baseline = {});

// --- datasets ------------------------------------------------------------------

/// Pinned synthetic fixtures.
inline constexpr int kFixtureClasses = 4;
inline constexpr int kFixtureFeatures = 8;
inline constexpr int kFixtureSamples = 1000;
inline constexpr double kFixtureSeparation = 2.5;
inline constexpr std::uint64_t kFixtureSeed = 7;
inline constexpr int kFixture10Samples = 2000;

Dataset fixture4();
Dataset fixture10();

/// `fixture4`, `fixture10`, `synth:classes=4,d=8,n=1000,sep=2.5,seed=7`
/// (all keys optional), or a CSV path, optionally followed by
/// `@6,7,8,9` to select a class subset.
Dataset load_dataset(const std::string& spec);

struct PreparedData {
  std::string spec;
  Dataset dataset;
  FeatureScaler scaler;  // fitted on the train split only
  LabeledSet train;
  LabeledSet test;
};

/// Stratified split, then features scaled into [0, 2*pi] from train ranges.
PreparedData prepare(const std::string& spec, double train_fraction, std::uint64_t split_seed);
PreparedData prepare(Dataset ds, std::string spec, double train_fraction,
                     std::uint64_t split_seed);

// --- checkpoints ---------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "stiq-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  QnnModel model;
  std::optional<FeatureScaler> scaler;
  LossConfig loss;
  std::string role = "baseline";  // baseline, qnn1, qnn2
  std::uint64_t seed = 0;
  int member = 0;
  std::string dataset;  // dataset spec the model was trained on
  std::uint64_t split_seed = 0;
  double train_fraction = 0.7;
  std::optional<ClassificationScore> final_test;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws DataError naming the offending field on schema violations and on a
/// format or version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text, const std::string& origin = "<string>");

// --- split inference -----------------------------------------------------------

struct SplitInference {
  PredictionVector y1;
  PredictionVector y2;
  PredictionVector combined;
};

/// Two providers each see the query and return one obfuscated vector; the
/// client aggregates locally. Each provider logs only its own vector to
/// `adversary_log`. Raw features are scaled with each checkpoint's scaler
/// when present.
SplitInference split_infer(const Checkpoint& a, const Checkpoint& b,
                           std::span<const double> raw_features,
                           const std::optional<NoiseConfig>& noise_a = std::nullopt,
                           const std::optional<NoiseConfig>& noise_b = std::nullopt,
                           std::ostream* adversary_log = nullptr);

// --- experiments ---------------------------------------------------------------

struct FinalScores {
  ClassificationScore baseline;
  ClassificationScore qnn1;
  ClassificationScore qnn2;
  ClassificationScore combined;
};

struct PenaltyRow {
  double lambda = 0.0;
  FinalScores scores;
};

/// One shared baseline run, then one STIQ run per grid value. Cells run
/// concurrently; rows come back in grid order.
std::vector<PenaltyRow> sweep_penalty(const PreparedData& data, const Architecture& arch,
                                      std::span<const double> grid, const LossConfig& base,
                                      const TrainRun& run);
void write_penalty_csv(std::ostream& out, std::span<const PenaltyRow> rows);

/// Default penalty per divergence; the signed distances are unbounded on
/// logits and need much smaller weights than cosine.
double default_penalty(Divergence kind);

struct DivergenceRow {
  Divergence kind = Divergence::CosineSimilarity;
  double lambda = 0.0;
  FinalScores scores;
};

std::vector<DivergenceRow> compare_divergences(const PreparedData& data, const Architecture& arch,
                                               std::span<const Divergence> kinds,
                                               const LossConfig& base, const TrainRun& run,
                                               std::optional<double> lambda_override = std::nullopt);
void write_divergence_csv(std::ostream& out, std::span<const DivergenceRow> rows);

struct ScalabilityRow {
  int qubits = 0;
  FinalScores scores;
  std::uint64_t baseline_evals = 0;
  std::uint64_t stiq_evals = 0;
  double baseline_seconds = 0.0;
  double stiq_seconds = 0.0;
};

/// Baseline and STIQ pair at each size with the same template and layers.
std::vector<ScalabilityRow> scalability_sweep(const PreparedData& data, std::span<const int> sizes,
                                              const Architecture& arch, const LossConfig& loss,
                                              const TrainRun& run);
void write_scalability_csv(std::ostream& out, std::span<const ScalabilityRow> rows,
                           bool with_timing);

/// Final-epoch scores of a finished baseline and STIQ run.
FinalScores final_scores(const TrainResult& baseline, const StiqResult& pair);

// --- VQA helpers -----------------------------------------------------------------

/// Parses `0.5*ZZ + -1*XI` style sums; a bare string means coefficient 1.
Hamiltonian parse_hamiltonian(const std::string& text);

}  // namespace stiq
