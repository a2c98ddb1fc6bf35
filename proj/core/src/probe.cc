// SPDX-License-Identifier: Apache-2.0

#include "wsc/probe.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "wsc/binary_io.h"
#include "wsc/errors.h"

namespace wsc {

using nlohmann::json;

namespace {

// Unbiased integer in [0, n) by rejection; independent of the standard
// library's distribution implementations so runs match across toolchains.
std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void Shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformBelow(rng, i)]);
  }
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Dot(std::span<const double> w, std::span<const float> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

// Adds the batch's summed loss and gradient into `acc` (not yet averaged).
void Accumulate(const ProbeModel& model, std::span<const float> values,
                std::span<const double> targets,
                std::span<const std::size_t> rows, double pos_weight,
                LossGradient& acc) {
  const std::size_t dim = model.dim();
  for (std::size_t r : rows) {
    const auto x = values.subspan(r * dim, dim);
    const double y = targets[r];
    const double z = Dot(model.weights(), x) + model.bias();
    // -[pw*y*log(sig(z)) + (1-y)*log(1-sig(z))]
    acc.loss += pos_weight * y * Softplus(-z) + (1.0 - y) * Softplus(z);
    const double s = Sigmoid(z);
    const double dz = pos_weight * y * (s - 1.0) + (1.0 - y) * s;
    for (std::size_t i = 0; i < dim; ++i) acc.grad_w[i] += dz * x[i];
    acc.grad_b += dz;
  }
}

void CheckWidth(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw ValidationError(std::string(what) + ": dim mismatch (model " +
                          std::to_string(expected) + ", input " +
                          std::to_string(got) + ")");
  }
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
}

json TrainConfig::ToJson() const {
  return json{{"learning_rate", learning_rate}, {"weight_decay", weight_decay},
              {"epochs", epochs},               {"batch_size", batch_size},
              {"seed", seed},                   {"rebalance", rebalance},
              {"use_pos_weight", use_pos_weight}, {"beta1", beta1},
              {"beta2", beta2},                 {"epsilon", epsilon}};
}

TrainConfig TrainConfig::FromJson(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.rebalance = j.value("rebalance", c.rebalance);
  c.use_pos_weight = j.value("use_pos_weight", c.use_pos_weight);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  return c;
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void LabeledDataset::Validate() const {
  if (vectors.count() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(vectors.count()) +
                          " vectors for " + std::to_string(labels.size()) +
                          " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("dataset: labels must be 0/1");
  }
}

PreparedDataset PrepareDataset(const LabeledDataset& raw,
                               const TrainConfig& config) {
  raw.Validate();
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    (raw.labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw ValidationError("degenerate dataset: " + std::to_string(pos.size()) +
                          " positive, " + std::to_string(neg.size()) +
                          " negative");
  }
  std::mt19937_64 rng(config.seed);
  if (config.rebalance) {
    auto& majority = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    Shuffle(majority, rng);
    majority.resize(keep);
  }
  std::vector<std::size_t> order;
  order.reserve(pos.size() + neg.size());
  order.insert(order.end(), pos.begin(), pos.end());
  order.insert(order.end(), neg.begin(), neg.end());
  std::sort(order.begin(), order.end());
  Shuffle(order, rng);

  PreparedDataset out;
  out.pos_weight = config.use_pos_weight
                       ? static_cast<double>(neg.size()) / pos.size()
                       : 1.0;
  std::vector<float> values;
  values.reserve(order.size() * raw.vectors.dim());
  out.data.labels.reserve(order.size());
  for (std::size_t i : order) {
    const auto r = raw.vectors.row(i);
    values.insert(values.end(), r.begin(), r.end());
    out.data.labels.push_back(raw.labels[i]);
  }
  out.data.vectors = VectorTable(raw.vectors.dim(), std::move(values));
  return out;
}

ProbeModel::ProbeModel(std::size_t dim) : weights_(dim, 0.0) {}

ProbeModel::ProbeModel(std::vector<double> weights, double bias, json meta)
    : weights_(std::move(weights)), bias_(bias), meta_(std::move(meta)) {
  for (double w : weights_) {
    if (!std::isfinite(w)) throw ValidationError("probe: non-finite weight");
  }
  if (!std::isfinite(bias_)) throw ValidationError("probe: non-finite bias");
}

double ProbeModel::Logit(std::span<const float> h) const {
  CheckWidth(dim(), h.size(), "predict");
  return Dot(weights_, h) + bias_;
}

double ProbeModel::Predict(std::span<const float> h) const {
  return Sigmoid(Logit(h));
}

double Sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  constexpr double kLo = std::numeric_limits<double>::denorm_min();
  const double kHi = std::nextafter(1.0, 0.0);
  return std::clamp(s, kLo, kHi);
}

LossGradient LossAndGradient(const ProbeModel& model, const VectorTable& batch,
                             std::span<const double> targets,
                             double pos_weight) {
  if (batch.count() == 0) throw ValidationError("loss: empty batch");
  CheckWidth(model.dim(), batch.dim(), "loss");
  if (targets.size() != batch.count()) {
    throw ValidationError("loss: target count mismatch");
  }
  std::vector<std::size_t> rows(batch.count());
  std::iota(rows.begin(), rows.end(), 0);
  LossGradient acc{0.0, std::vector<double>(model.dim(), 0.0), 0.0};
  Accumulate(model, batch.values(), targets, rows, pos_weight, acc);
  const double inv = 1.0 / static_cast<double>(rows.size());
  acc.loss *= inv;
  for (double& g : acc.grad_w) g *= inv;
  acc.grad_b *= inv;
  return acc;
}

ProbeModel Fit(const PreparedDataset& prepared, const TrainConfig& config) {
  config.Validate();
  const LabeledDataset& data = prepared.data;
  data.Validate();
  const std::size_t n = data.size();
  if (n == 0 || data.positives() == 0 || data.negatives() == 0) {
    throw ValidationError("degenerate dataset");
  }
  const std::size_t dim = data.vectors.dim();
  const std::vector<double> targets(data.labels.begin(), data.labels.end());

  ProbeModel model(dim);
  // Adam moments for [w..., b].
  std::vector<double> m(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::uint64_t step = 0;
  LossGradient acc;
  double last_epoch_loss = 0.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      const std::span<const std::size_t> rows(order.data() + start, len);
      acc.loss = 0.0;
      acc.grad_w.assign(dim, 0.0);
      acc.grad_b = 0.0;
      Accumulate(model, data.vectors.values(), targets, rows,
                 prepared.pos_weight, acc);
      epoch_loss += acc.loss;

      ++step;
      const double inv = 1.0 / static_cast<double>(len);
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto update = [&](double& param, double grad, std::size_t k) {
        grad = grad * inv + config.weight_decay * param;
        m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * grad;
        v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * grad * grad;
        param -= config.learning_rate * (m[k] / c1) /
                 (std::sqrt(v[k] / c2) + config.epsilon);
      };
      auto w = model.mutable_weights();
      for (std::size_t i = 0; i < dim; ++i) update(w[i], acc.grad_w[i], i);
      double b = model.bias();
      update(b, acc.grad_b, dim);
      model.set_bias(b);
    }
    last_epoch_loss = epoch_loss / static_cast<double>(n);
  }

  for (double w : model.weights()) {
    if (!std::isfinite(w)) throw ValidationError("fit diverged");
  }
  json meta = config.ToJson();
  meta["dim"] = dim;
  meta["train_rows"] = n;
  meta["train_positives"] = data.positives();
  meta["pos_weight"] = prepared.pos_weight;
  meta["final_loss"] = last_epoch_loss;
  model.set_meta(std::move(meta));
  return model;
}

ProbeModel Train(const LabeledDataset& raw, const TrainConfig& config) {
  config.Validate();
  return Fit(PrepareDataset(raw, config), config);
}

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("auroc: score/label count mismatch");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share the mid-rank.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += mid;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("AUROC undefined: single-class data");
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

EvalReport EvaluateScores(std::span<const double> scores,
                          std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) {
    throw ValidationError("evaluate: score/label count mismatch");
  }
  if (scores.empty()) throw ValidationError("evaluate: empty dataset");
  EvalReport r;
  r.count = scores.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] > threshold ? 1 : 0;
    correct += pred == labels[i];
    r.positives += labels[i] == 1;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.count);
  if (r.positives > 0 && r.positives < r.count) {
    r.auroc = Auroc(scores, labels);
  }
  return r;
}

EvalReport Evaluate(const ProbeModel& model, const LabeledDataset& dataset,
                    double threshold) {
  dataset.Validate();
  std::vector<double> scores(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    scores[i] = model.Predict(dataset.vectors.row(i));
  }
  return EvaluateScores(scores, dataset.labels, threshold);
}

std::vector<std::uint8_t> EncodeProbeModel(const ProbeModel& model) {
  ByteWriter w;
  w.PutString("WSCM");
  w.Put<std::uint32_t>(1);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(model.dim()));
  for (double x : model.weights()) w.Put<float>(static_cast<float>(x));
  w.Put<float>(static_cast<float>(model.bias()));
  const std::string meta = model.meta().dump();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.PutString(meta);
  return w.Take();
}

ProbeModel DecodeProbeModel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.GetString(4) != "WSCM" || !r.ok()) throw IoError("not a probe model");
  const auto version = r.Get<std::uint32_t>();
  if (r.ok() && version != 1) {
    throw IoError("unsupported probe model version " + std::to_string(version));
  }
  const auto dim = r.Get<std::uint32_t>();
  if (!r.ok() || dim == 0 || r.remaining() / sizeof(float) < dim + 1) {
    throw IoError("corrupt probe model");
  }
  std::vector<float> wf(dim);
  r.GetFloats(wf);
  const float bias = r.Get<float>();
  const auto meta_len = r.Get<std::uint32_t>();
  std::string meta_text = r.GetString(meta_len);
  if (!r.ok() || r.remaining() != 0) throw IoError("corrupt probe model");
  json meta;
  try {
    meta = meta_text.empty() ? json::object() : json::parse(meta_text);
  } catch (const json::parse_error&) {
    throw IoError("corrupt probe model: bad metadata");
  }
  try {
    return ProbeModel(std::vector<double>(wf.begin(), wf.end()), bias,
                      std::move(meta));
  } catch (const ValidationError& e) {
    throw IoError(std::string("corrupt probe model: ") + e.what());
  }
}

void SaveProbeModel(const std::string& path, const ProbeModel& model) {
  WriteFileBytes(path, EncodeProbeModel(model));
}

ProbeModel LoadProbeModel(const std::string& path) {
  return DecodeProbeModel(ReadFileBytes(path));
}

}  // namespace wsc
