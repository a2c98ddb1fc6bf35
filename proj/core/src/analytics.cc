// SPDX-License-Identifier: Apache-2.0

#include "wsc/analytics.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "wsc/errors.h"
#include "wsc/labeler.h"

namespace wsc {

using nlohmann::json;

namespace {

std::vector<int> SaladLabels(const TraceRecord& trace) {
  std::vector<int> labels;
  labels.reserve(trace.chunks.size());
  for (const ChunkRecord& c : trace.chunks) {
    if (!c.salad_label) {
      throw ValidationError("trace '" + trace.trace_id + "': chunk " +
                            std::to_string(c.index) + " is unlabeled");
    }
    labels.push_back(*c.salad_label);
  }
  return labels;
}

double Pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0
                    : 100.0 * static_cast<double>(part) /
                          static_cast<double>(whole);
}

std::string Fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

template <typename T>
json OptionalJson(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> Rounded(const std::optional<double>& v) {
  return v ? std::optional<double>(Round2(*v)) : std::nullopt;
}

}  // namespace

double SaladTokenPercentage(const TraceRecord& trace) {
  const auto labels = SaladLabels(trace);
  std::size_t salad = 0, total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += trace.chunks[i].token_count;
    if (labels[i] == 1) salad += trace.chunks[i].token_count;
  }
  return Pct(salad, total);
}

TraceStats ComputeTraceStats(const TraceRecord& trace,
                             std::size_t consecutive_required) {
  const auto labels = SaladLabels(trace);
  TraceStats s;
  s.trace_id = trace.trace_id;
  s.total_chunks = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s.total_tokens += trace.chunks[i].token_count;
    if (labels[i] == 1) {
      s.salad_tokens += trace.chunks[i].token_count;
      ++s.salad_chunks;
    }
  }
  if (!labels.empty()) {
    s.chopping_point = FindChoppingPoint(labels, consecutive_required);
  }
  if (s.chopping_point) {
    const std::size_t t = *s.chopping_point;
    std::size_t pre_salad = 0, post_salad = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (i + 1 < t ? pre_salad : post_salad) += labels[i];
    }
    if (t > 1) s.pre_point_salad_pct = Pct(pre_salad, t - 1);
    s.post_point_salad_pct = Pct(post_salad, labels.size() - (t - 1));
  }
  return s;
}

ChunkLabelStats ComputeChunkLabelStats(std::span<const TraceRecord> traces,
                                       std::size_t consecutive_required) {
  if (traces.empty()) throw ValidationError("analyze: empty corpus");
  ChunkLabelStats out;
  std::size_t chunks = 0, salad_chunks = 0, tokens = 0, salad_tokens = 0;
  std::size_t pre = 0, pre_salad = 0, post = 0, post_salad = 0;
  for (const TraceRecord& trace : traces) {
    TraceStats s = ComputeTraceStats(trace, consecutive_required);
    chunks += s.total_chunks;
    salad_chunks += s.salad_chunks;
    tokens += s.total_tokens;
    salad_tokens += s.salad_tokens;
    if (s.chopping_point) {
      ++out.traces_with_point;
      const std::size_t t = *s.chopping_point;
      for (std::size_t i = 0; i < trace.chunks.size(); ++i) {
        const int y = *trace.chunks[i].salad_label;
        if (i + 1 < t) {
          ++pre;
          pre_salad += y;
        } else {
          ++post;
          post_salad += y;
        }
      }
    }
    out.per_trace.push_back(std::move(s));
  }
  out.traces = traces.size();
  out.overall_salad_chunk_pct = Pct(salad_chunks, chunks);
  out.overall_salad_token_pct = Pct(salad_tokens, tokens);
  if (out.traces_with_point > 0) {
    if (pre > 0) out.pre_point_pct = Pct(pre_salad, pre);
    out.post_point_pct = Pct(post_salad, post);
  }
  return out;
}

double LengthSavings(double original_len, double new_len) {
  if (!(original_len > 0.0)) {
    throw ValidationError("length_savings: original length must be > 0");
  }
  return 100.0 * (original_len - new_len) / original_len;
}

double OverheadRatio(double t_classifier, double t_llm_step,
                     double mean_chunk_len) {
  if (!(t_classifier > 0.0) || !(t_llm_step > 0.0) || !(mean_chunk_len > 0.0)) {
    throw ValidationError("overhead_ratio: inputs must be positive");
  }
  return t_classifier / (mean_chunk_len * t_llm_step);
}

double Round2(double pct) { return std::round(pct * 100.0) / 100.0; }

json ToJson(const TraceStats& s) {
  return json{
      {"trace_id", s.trace_id},
      {"total_tokens", s.total_tokens},
      {"salad_tokens", s.salad_tokens},
      {"salad_token_pct", Round2(Pct(s.salad_tokens, s.total_tokens))},
      {"total_chunks", s.total_chunks},
      {"salad_chunks", s.salad_chunks},
      {"salad_chunk_pct", Round2(Pct(s.salad_chunks, s.total_chunks))},
      {"chopping_point", OptionalJson(s.chopping_point)},
      {"pre_point_salad_pct", OptionalJson(Rounded(s.pre_point_salad_pct))},
      {"post_point_salad_pct", OptionalJson(Rounded(s.post_point_salad_pct))}};
}

json ToJson(const ChunkLabelStats& s) {
  json per_trace = json::array();
  for (const TraceStats& t : s.per_trace) per_trace.push_back(ToJson(t));
  return json{{"traces", s.traces},
              {"traces_with_chopping_point", s.traces_with_point},
              {"salad_token_pct", Round2(s.overall_salad_token_pct)},
              {"salad_chunk_pct", Round2(s.overall_salad_chunk_pct)},
              {"pre_point_salad_chunk_pct", OptionalJson(Rounded(s.pre_point_pct))},
              {"post_point_salad_chunk_pct", OptionalJson(Rounded(s.post_point_pct))},
              {"per_trace", std::move(per_trace)}};
}

std::string ToCsv(const ChunkLabelStats& s) {
  std::ostringstream os;
  os << "trace_id,total_tokens,salad_tokens,salad_token_pct,total_chunks,"
        "salad_chunks,salad_chunk_pct,chopping_point,pre_point_pct,"
        "post_point_pct\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? Fixed2(*v) : std::string();
  };
  std::size_t tokens = 0, salad_tokens = 0, chunks = 0, salad_chunks = 0;
  for (const TraceStats& t : s.per_trace) {
    tokens += t.total_tokens;
    salad_tokens += t.salad_tokens;
    chunks += t.total_chunks;
    salad_chunks += t.salad_chunks;
    std::string id = t.trace_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : id) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = q + "\"";
    }
    os << id << ',' << t.total_tokens << ',' << t.salad_tokens << ','
       << Fixed2(Pct(t.salad_tokens, t.total_tokens)) << ',' << t.total_chunks
       << ',' << t.salad_chunks << ',' << Fixed2(Pct(t.salad_chunks, t.total_chunks))
       << ',' << (t.chopping_point ? std::to_string(*t.chopping_point) : "")
       << ',' << opt(t.pre_point_salad_pct) << ',' << opt(t.post_point_salad_pct)
       << '\n';
  }
  os << "ALL," << tokens << ',' << salad_tokens << ','
     << Fixed2(s.overall_salad_token_pct) << ',' << chunks << ','
     << salad_chunks << ',' << Fixed2(s.overall_salad_chunk_pct) << ",,"
     << opt(s.pre_point_pct) << ',' << opt(s.post_point_pct) << '\n';
  return os.str();
}

}  // namespace wsc
