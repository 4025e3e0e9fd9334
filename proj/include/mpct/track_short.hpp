// SPDX-License-Identifier: Apache-2.0
//
// Snapshot-to-snapshot MPC tracker: gated initialisation over three
// snapshots, then linear prediction with a search box around it.

#pragma once

#include "mpct/core_signal.hpp"
#include "mpct/detect.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mpct
{

struct TrackState
{
    double gain_db = 0.0;
    double delay_s = 0.0;
};

inline TrackState state_of(const DetectedMpc& mpc)
{
    return {mpc.gain_db(), mpc.delay_s};
}

struct ChangeGate
{
    double max_gain_change_db = 10.0;
    double max_delay_change_s = 1e-9;
};

struct SearchTolerance
{
    double gain_tol_db = 10.0;
    double delay_tol_s = 0.5e-9;
};

struct Track
{
    std::size_t id = 0;
    std::size_t start_snapshot = 0;   ///< global snapshot index of the first state
    std::vector<TrackState> states;   ///< one per snapshot, contiguous
    std::vector<std::size_t> members; ///< index into that snapshot's detection list
    double doppler_hz = 0.0;

    /// Number of snapshots the track covers.
    std::size_t lifetime() const { return states.size(); }
    std::size_t end_snapshot() const { return start_snapshot + states.size(); }
};

/// Indices of `next` within the change gate of `anchor`.
std::vector<std::size_t> candidate_gate(const TrackState& anchor, std::span<const DetectedMpc> next,
                                        const ChangeGate& gate);

TrackState predict_next(const TrackState& prev, const TrackState& curr);

bool in_search_box(const TrackState& predicted, const DetectedMpc& mpc, const SearchTolerance& tol);

/// Nearest delay to the prediction; equal distances go to the smaller delay.
/// Returns the position within `in_range`, or nullopt for track end.
std::optional<std::size_t> select_candidate(const TrackState& predicted, std::span<const DetectedMpc> in_range);

/// Tracks over consecutive snapshots; `detections[i]` belongs to global
/// snapshot `first_snapshot + i`. Only tracks of at least three states are returned.
std::vector<Track> track_snapshots(std::span<const std::vector<DetectedMpc>> detections, const ChangeGate& gate,
                                   const SearchTolerance& tol, std::size_t first_snapshot = 0);

/// Least-squares delay slope m over the track's timestamps; returns -m f_c.
double doppler_estimate(const Track& track, const SounderConfig& config);

/// Short-term tracking run independently in each set, ids numbered globally,
/// Doppler filled in.
std::vector<Track> track_sets(std::span<const std::vector<DetectedMpc>> detections, const SounderConfig& config,
                              const ChangeGate& gate, const SearchTolerance& tol);

} // namespace mpct
