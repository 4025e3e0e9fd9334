// SPDX-License-Identifier: Apache-2.0
//
// Pipeline configuration and the stage runner behind the CLI.

#pragma once

#include "mpct/detect.hpp"
#include "mpct/eval.hpp"
#include "mpct/gmphd.hpp"
#include "mpct/io.hpp"
#include "mpct/synth.hpp"
#include "mpct/track_long.hpp"
#include "mpct/track_short.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpct
{

/// Invalid or unknown configuration values.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A stage failed; `stage()` names it.
class StageError : public std::runtime_error
{
public:
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error(stage + ": " + cause), stage_(std::move(stage))
    {
    }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ScenarioSpec
{
    std::string kind = "two_track"; ///< two_track | convoy | file

    double mpc_power_db = -116.0;
    double noise_db = -140.0;
    double gap_start_s = 30e-9;
    double gap_stop_s = 0.0;
    std::size_t num_snapshots = 200;

    ConvoySpec convoy;
    double fading_std_db = 1.0;
    DiffuseFloor diffuse{0.0, 0.0, -150.0}; ///< empty range: no floor

    std::string dataset_path; ///< file scenario
    std::string pulse_path;   ///< optional WPLS pulse; empty: stand-in sounder pulse
};

struct EvalSpec
{
    std::vector<double> power_sweep_db{-116.0, -120.0, -124.0, -128.0, -132.0};
    std::vector<bool> windowing{true, false};
    std::vector<std::string> algorithms{"proposed", "gmphd"};
    std::size_t seeds_per_point = 2;
};

inline const std::vector<std::string> kStages{"synth", "detect", "track", "gmphd", "longtrack", "eval", "stats"};

struct PipelineConfig
{
    SounderConfig sounder;
    DetectConfig detect;
    ChangeGate gate;
    SearchTolerance tol;
    LongGate long_gate;
    GmphdParams gmphd;
    ScenarioSpec scenario;
    EvalSpec eval;
    std::uint64_t seed = 1;
    std::string out;
    std::vector<std::string> stages = kStages;
    unsigned threads = 0;

    /// Throws ConfigError.
    void validate() const;
};

json config_to_json(const PipelineConfig& config);

/// Overlays `overrides` on the defaults. Unknown keys and type mismatches
/// throw ConfigError.
PipelineConfig config_from_json(const json& overrides);

/// FNV-1a 64 of the canonical JSON of every parameter that affects outputs.
std::uint64_t config_hash(const PipelineConfig& config);

/// Runs the configured stages in pipeline order, communicating through files
/// in `config.out`. Throws StageError.
void run_pipeline(const PipelineConfig& config);

/// Runs one stage against the files already in `config.out`.
void run_stage(const std::string& stage, const PipelineConfig& config);

} // namespace mpct
