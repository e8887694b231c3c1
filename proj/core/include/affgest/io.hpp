#pragma once

// On-disk formats. Model files are JSON with doubles written in shortest
// round-trip form, so load(save(x)) reproduces x exactly.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affgest/bayesnet.hpp"
#include "affgest/domain.hpp"
#include "affgest/gesture.hpp"
#include "affgest/simgen.hpp"

namespace affgest {

/// Throw Error(kIo) naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Records: one JSON object per line with keys action, shape, size, objvel and
// words (array of strings). Parsing normalizes words and validates labels.
std::string record_to_json_line(const ExperimentRecord& record);
ExperimentRecord record_from_json_line(std::string_view line);
std::string records_to_jsonl(std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> records_from_jsonl(std::string_view text);

// Trajectories: CSV with header t,hx,hy,hz,tx,ty,tz.
std::string trajectory_to_csv(const Trajectory& trajectory);
Trajectory trajectory_from_csv(std::string_view text);

/// One line of a gesture dataset manifest; `file` is relative to the
/// manifest's directory.
struct DatasetEntry {
  std::string file;
  std::string action;
};
std::string dataset_manifest_to_jsonl(std::span<const DatasetEntry> entries);
std::vector<DatasetEntry> dataset_manifest_from_jsonl(std::string_view text);

std::string network_to_json(const AffordanceNetwork& net);
AffordanceNetwork network_from_json(std::string_view text);

std::string model_set_to_json(const GestureModelSet& models);
GestureModelSet model_set_from_json(std::string_view text);

std::string corpus_manifest_to_json(std::uint64_t seed, std::size_t n, const WorldTable& table,
                                    const UtteranceGrammar& grammar, const GestureParams& params);

}  // namespace affgest
