// SPDX-License-Identifier: Apache-2.0
//
// Single-layer logistic probe over delimiter hidden states: dataset
// preparation, training, prediction, evaluation and the model file format.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsc/vector_table.h"

namespace wsc {

struct TrainConfig {
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  std::size_t epochs = 50;
  std::size_t batch_size = 8192;
  std::uint64_t seed = 41;
  // Downsample the majority class to the minority count before training.
  bool rebalance = true;
  // Weight positive terms of the loss by #neg / #pos.
  bool use_pos_weight = true;
  // Adam moment constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// Hidden-state vectors with one 0/1 label per row.
struct LabeledDataset {
  VectorTable vectors;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t positives() const;
  std::size_t negatives() const { return size() - positives(); }
  // Throws ValidationError on count mismatch or labels outside {0,1}.
  void Validate() const;
};

struct PreparedDataset {
  LabeledDataset data;
  // #neg / #pos after rebalancing; 1 when use_pos_weight is off.
  double pos_weight = 1.0;
};

// Seeded rebalance and shuffle. Throws ValidationError("degenerate dataset")
// when either class is missing.
PreparedDataset PrepareDataset(const LabeledDataset& raw,
                               const TrainConfig& config);

class ProbeModel {
 public:
  ProbeModel() = default;
  // Zero weights and bias.
  explicit ProbeModel(std::size_t dim);
  ProbeModel(std::vector<double> weights, double bias,
             nlohmann::json meta = nlohmann::json::object());

  std::size_t dim() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }
  const nlohmann::json& meta() const { return meta_; }
  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }

  // w . h + b. Throws ValidationError on width mismatch.
  double Logit(std::span<const float> h) const;
  // sigma(Logit(h)), kept strictly inside (0, 1).
  double Predict(std::span<const float> h) const;

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  nlohmann::json meta_ = nlohmann::json::object();
};

double Sigmoid(double z);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// Mean positive-weighted binary cross-entropy on logits and its exact
// gradient. Targets may be soft (any value in [0, 1]).
LossGradient LossAndGradient(const ProbeModel& model, const VectorTable& batch,
                             std::span<const double> targets,
                             double pos_weight);

// Trains from zero weights with Adam over seeded per-epoch shuffles.
ProbeModel Fit(const PreparedDataset& prepared, const TrainConfig& config);
// PrepareDataset followed by Fit.
ProbeModel Train(const LabeledDataset& raw, const TrainConfig& config);

// Area under the ROC curve as the Mann-Whitney rank statistic; tied scores
// share their mid-rank, so a tied (pos, neg) pair counts 0.5. Throws
// ValidationError when either class is missing.
double Auroc(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  std::size_t count = 0;
  std::size_t positives = 0;
  double accuracy = 0.0;
  // Absent for single-class data.
  std::optional<double> auroc;
};

EvalReport Evaluate(const ProbeModel& model, const LabeledDataset& dataset,
                    double threshold = 0.5);
// Same metrics from precomputed probabilities.
EvalReport EvaluateScores(std::span<const double> scores,
                          std::span<const int> labels, double threshold = 0.5);

// "WSCM" | version u32 | dim u32 | dim x f32 weights | f32 bias |
// u32 length | JSON metadata. Little-endian.
std::vector<std::uint8_t> EncodeProbeModel(const ProbeModel& model);
ProbeModel DecodeProbeModel(std::span<const std::uint8_t> bytes);
void SaveProbeModel(const std::string& path, const ProbeModel& model);
ProbeModel LoadProbeModel(const std::string& path);

}  // namespace wsc
