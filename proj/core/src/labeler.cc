// SPDX-License-Identifier: Apache-2.0

#include "wsc/labeler.h"

#include <cmath>
#include <string>

#include "wsc/errors.h"

namespace wsc {
namespace {

double Dot(std::span<const float> u, std::span<const float> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return s;
}

}  // namespace

void LabelerConfig::Validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ValidationError("theta must be in (0, 1]");
  }
  if (window < 1) throw ValidationError("window must be >= 1");
  if (consecutive_required < 1) {
    throw ValidationError("consecutive_required must be >= 1");
  }
}

double CosineSimilarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine similarity: dim " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  const double nu = Dot(u, u);
  const double nv = Dot(v, v);
  if (nu == 0.0 || nv == 0.0) {
    throw ValidationError("undefined similarity: zero vector");
  }
  return Dot(u, v) / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<int> LabelSaladChunks(const VectorTable& embeddings,
                                  const LabelerConfig& config) {
  config.Validate();
  const std::size_t n = embeddings.count();
  if (n == 0) throw ValidationError("label: no embeddings");

  // Cache norms once; each pair then costs one dot product.
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = embeddings.row(i);
    norms[i] = std::sqrt(Dot(r, r));
    if (norms[i] == 0.0) {
      throw ValidationError("undefined similarity: zero embedding at chunk " +
                            std::to_string(i + 1));
    }
  }

  std::vector<int> labels(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto ei = embeddings.row(i);
    const std::size_t first = i > config.window ? i - config.window : 0;
    for (std::size_t j = i; j-- > first;) {
      const double sim = Dot(ei, embeddings.row(j)) / (norms[i] * norms[j]);
      if (sim >= config.theta) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

std::optional<std::size_t> FindChoppingPoint(std::span<const int> labels,
                                             std::size_t consecutive_required) {
  if (consecutive_required < 1) {
    throw ValidationError("consecutive_required must be >= 1");
  }
  std::size_t run = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    run = labels[i] == 1 ? run + 1 : 0;
    if (run == consecutive_required) return i + 2 - consecutive_required;
  }
  return std::nullopt;
}

std::vector<int> RelabelForTraining(std::span<const int> labels, std::size_t t) {
  if (t < 1 || t > labels.size()) {
    throw ValidationError("chopping point " + std::to_string(t) +
                          " outside 1.." + std::to_string(labels.size()));
  }
  std::vector<int> out(labels.size(), 0);
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(t - 1), out.end(), 1);
  return out;
}

std::vector<int> TrainingLabels(std::span<const int> salad_labels,
                                std::size_t consecutive_required) {
  if (auto t = FindChoppingPoint(salad_labels, consecutive_required)) {
    return RelabelForTraining(salad_labels, *t);
  }
  return std::vector<int>(salad_labels.size(), 0);
}

TraceLabels LabelTrace(TraceRecord& trace, const VectorTable& embeddings,
                       std::size_t first_row, const LabelerConfig& config) {
  TraceLabels out;
  const std::size_t n = trace.chunks.size();
  if (n == 0) return out;
  if (first_row > embeddings.count() || embeddings.count() - first_row < n) {
    throw ValidationError("trace '" + trace.trace_id + "': needs rows " +
                          std::to_string(first_row) + ".." +
                          std::to_string(first_row + n - 1) +
                          " but embedding table has " +
                          std::to_string(embeddings.count()));
  }
  const auto rows = embeddings.values().subspan(first_row * embeddings.dim(),
                                                n * embeddings.dim());
  const VectorTable slice(embeddings.dim(),
                          std::vector<float>(rows.begin(), rows.end()));
  out.salad = LabelSaladChunks(slice, config);
  out.chopping_point = FindChoppingPoint(out.salad, config.consecutive_required);
  out.train = out.chopping_point
                  ? RelabelForTraining(out.salad, *out.chopping_point)
                  : std::vector<int>(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    trace.chunks[i].salad_label = out.salad[i];
    trace.chunks[i].train_label = out.train[i];
  }
  return out;
}

}  // namespace wsc
