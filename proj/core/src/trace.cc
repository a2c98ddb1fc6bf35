// SPDX-License-Identifier: Apache-2.0

#include "wsc/trace.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wsc/binary_io.h"
#include "wsc/errors.h"

namespace wsc {

using nlohmann::json;

DelimiterSpec DelimiterSpec::Single(std::vector<TokenId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return DelimiterSpec{std::move(ids), {}};
}

std::size_t DelimiterSpec::max_length() const {
  std::size_t n = 1;
  for (const auto& s : sequences) n = std::max(n, s.size());
  return n;
}

bool DelimiterSpec::MatchesAt(std::span<const TokenId> ids,
                              std::size_t pos) const {
  if (pos >= ids.size()) return false;
  const TokenId id = ids[pos];
  if (std::find(single_ids.begin(), single_ids.end(), id) != single_ids.end()) {
    return true;
  }
  for (const auto& seq : sequences) {
    if (seq.empty() || seq.back() != id || seq.size() > pos + 1) continue;
    if (std::equal(seq.begin(), seq.end(), ids.begin() + (pos + 1 - seq.size()))) {
      return true;
    }
  }
  return false;
}

namespace {

[[noreturn]] void Fail(const TraceRecord& t, const std::string& what) {
  throw ValidationError("trace '" + t.trace_id + "': " + what);
}

void CheckLabel(const TraceRecord& t, const ChunkRecord& c,
                const std::optional<int>& label, const char* name) {
  if (label && *label != 0 && *label != 1) {
    Fail(t, "chunk " + std::to_string(c.index) + " " + name + " must be 0 or 1");
  }
}

json RefToJson(const VectorRef& ref) {
  return json{{"path", ref.path}, {"first_row", ref.first_row}};
}

VectorRef RefFromJson(const json& j) {
  VectorRef ref;
  j.at("path").get_to(ref.path);
  j.at("first_row").get_to(ref.first_row);
  return ref;
}

std::optional<int> OptionalLabel(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<int>();
}

constexpr const char* kKnownKeys[] = {
    "trace_id",   "model_id",           "task",   "temperature",
    "token_ids",  "token_count",        "chunks", "delimiter_positions",
    "hidden_ref", "embed_ref"};

}  // namespace

void ValidateTrace(const TraceRecord& t, const DelimiterSpec* delimiters) {
  const std::size_t total = t.total_tokens();
  if (t.token_ids && t.token_count != t.token_ids->size()) {
    Fail(t, "token_count disagrees with token_ids");
  }
  const auto& pos = t.delimiter_positions;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i] >= total) Fail(t, "delimiter position beyond end of tokens");
    if (i > 0 && pos[i] <= pos[i - 1]) {
      Fail(t, "delimiter positions not strictly increasing");
    }
  }
  if (t.chunks.size() != pos.size()) {
    Fail(t, std::to_string(t.chunks.size()) + " chunks for " +
                std::to_string(pos.size()) + " delimiters");
  }
  std::size_t sum = 0;
  for (std::size_t i = 0; i < t.chunks.size(); ++i) {
    const ChunkRecord& c = t.chunks[i];
    if (c.index != i + 1) Fail(t, "chunk indices must run 1..n");
    if (c.token_count != pos[i] - t.chunk_begin(i)) {
      Fail(t, "chunk " + std::to_string(c.index) +
                  " token_count disagrees with delimiter positions");
    }
    CheckLabel(t, c, c.salad_label, "salad_label");
    CheckLabel(t, c, c.train_label, "train_label");
    sum += c.token_count + 1;
  }
  if (sum != t.chunked_tokens()) Fail(t, "chunk token counts do not add up");
  if (delimiters != nullptr && t.token_ids) {
    for (std::size_t p : pos) {
      if (!delimiters->MatchesAt(*t.token_ids, p)) {
        Fail(t, "token at position " + std::to_string(p) +
                    " is not a delimiter");
      }
    }
  }
}

json TraceToJson(const TraceRecord& t) {
  json j = t.extra.is_object() ? t.extra : json::object();
  j["trace_id"] = t.trace_id;
  j["model_id"] = t.model_id;
  j["task"] = t.task;
  j["temperature"] = t.temperature;
  if (t.token_ids) {
    j["token_ids"] = *t.token_ids;
  } else {
    j["token_count"] = t.token_count;
  }
  j["delimiter_positions"] = t.delimiter_positions;
  json chunks = json::array();
  for (const ChunkRecord& c : t.chunks) {
    json jc{{"index", c.index}, {"token_count", c.token_count}};
    if (c.text) jc["text"] = *c.text;
    if (c.salad_label) jc["salad_label"] = *c.salad_label;
    if (c.train_label) jc["train_label"] = *c.train_label;
    chunks.push_back(std::move(jc));
  }
  j["chunks"] = std::move(chunks);
  if (t.hidden_ref) j["hidden_ref"] = RefToJson(*t.hidden_ref);
  if (t.embed_ref) j["embed_ref"] = RefToJson(*t.embed_ref);
  return j;
}

TraceRecord TraceFromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("manifest entry is not an object");
  TraceRecord t;
  try {
    j.at("trace_id").get_to(t.trace_id);
    t.model_id = j.value("model_id", std::string());
    t.task = j.value("task", std::string());
    t.temperature = j.value("temperature", 0.0);
    if (auto it = j.find("token_ids"); it != j.end()) {
      t.token_ids = it->get<std::vector<TokenId>>();
      t.token_count = t.token_ids->size();
    } else {
      j.at("token_count").get_to(t.token_count);
    }
    j.at("delimiter_positions").get_to(t.delimiter_positions);
    for (const json& jc : j.at("chunks")) {
      ChunkRecord c;
      jc.at("index").get_to(c.index);
      jc.at("token_count").get_to(c.token_count);
      if (auto it = jc.find("text"); it != jc.end() && !it->is_null()) {
        c.text = it->get<std::string>();
      }
      c.salad_label = OptionalLabel(jc, "salad_label");
      c.train_label = OptionalLabel(jc, "train_label");
      t.chunks.push_back(std::move(c));
    }
    if (auto it = j.find("hidden_ref"); it != j.end() && !it->is_null()) {
      t.hidden_ref = RefFromJson(*it);
    }
    if (auto it = j.find("embed_ref"); it != j.end() && !it->is_null()) {
      t.embed_ref = RefFromJson(*it);
    }
  } catch (const json::exception& e) {
    throw ValidationError("manifest entry '" + t.trace_id + "': " + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), it.key()) ==
        std::end(kKnownKeys)) {
      t.extra[it.key()] = it.value();
    }
  }
  ValidateTrace(t);
  return t;
}

std::string RenderManifestLine(const TraceRecord& trace) {
  return TraceToJson(trace).dump();
}

TraceRecord ParseManifestLine(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return TraceFromJson(j);
}

std::vector<TraceRecord> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::vector<TraceRecord> traces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      traces.push_back(ParseManifestLine(line));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (in.bad()) throw IoError("read failed: " + path);
  return traces;
}

void WriteManifest(const std::string& path,
                   std::span<const TraceRecord> traces) {
  std::string out;
  for (const TraceRecord& t : traces) {
    out += RenderManifestLine(t);
    out += '\n';
  }
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(out.data()),
                                 out.size()));
}

}  // namespace wsc
