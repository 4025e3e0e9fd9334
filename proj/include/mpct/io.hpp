// SPDX-License-Identifier: Apache-2.0
//
// WCIR dataset files and the JSON/CSV artifacts exchanged between stages.

#pragma once

#include "mpct/eval.hpp"
#include "mpct/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mpct
{

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint16_t kWcirVersion = 1;

/// Little-endian WCIR image: header then f32 (re, im) samples. Truth is not stored.
std::string encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::string_view bytes);

void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Parses JSON, turning syntax errors into ParseError with the byte offset.
json parse_json(std::string_view text);

json to_json(const SounderConfig& c);
json to_json(const DetectedMpc& m);
json to_json(const Track& t);
json to_json(const SetSummary& s);
json to_json(const Association& a);
json to_json(const GroundTruthMpc& t);
json to_json(const Cdf& c);
json to_json(const PowerLossLedger& l);

json detections_json(std::span<const std::vector<DetectedMpc>> detections);
std::vector<std::vector<DetectedMpc>> detections_from_json(const json& j);

std::vector<Track> tracks_from_json(const json& j);
std::vector<std::vector<SetSummary>> summaries_from_json(const json& j);
std::vector<std::vector<Association>> associations_from_json(const json& j);
std::vector<GroundTruthMpc> truth_from_json(const json& j);

std::string eval_csv(std::span<const EvalCurvePoint> points);
std::string gains_csv(const GainSeries& series);

} // namespace mpct
