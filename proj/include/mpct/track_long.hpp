// SPDX-License-Identifier: Apache-2.0
//
// Linking full-lifetime tracks across set gaps with two-way Doppler
// delay prediction.

#pragma once

#include "mpct/core_signal.hpp"
#include "mpct/track_short.hpp"

#include <array>
#include <span>
#include <vector>

namespace mpct
{

struct SetSummary
{
    double mean_gain_db = 0.0;
    double mean_delay_s = 0.0;
    std::size_t lifetime = 0;
    double doppler_hz = 0.0;
    std::size_t set_index = 0;
    std::size_t source_track_id = 0;
    double power = 0.0; ///< mean linear power of the track's states
};

struct LongGate
{
    double max_delay_change_s = 1e-9;
    double max_gain_change_db = 5.0;
};

inline constexpr std::array<double, 4> kDefaultTiers{0.1e-9, 0.2e-9, 0.5e-9, 1.0e-9};

struct Association
{
    std::size_t from = 0; ///< index into the current set's summaries
    std::size_t to = 0;   ///< index into the next set's summaries
    double tier_s = 0.0;
    double forward_error_s = 0.0;
    double backward_error_s = 0.0;
};

/// Summaries of the full-lifetime tracks among `tracks` that lie in `set_index`.
std::vector<SetSummary> summarize_set(std::span<const Track> tracks, std::size_t set_index,
                                      const SounderConfig& config);

double predict_forward(const SetSummary& summary, const SounderConfig& config);
double predict_backward(const SetSummary& summary, const SounderConfig& config);

/// Greedy strongest-first association of `curr` to `next`.
std::vector<Association> link_sets(std::span<const SetSummary> curr, std::span<const SetSummary> next,
                                   const LongGate& gate, const SounderConfig& config,
                                   std::span<const double> tiers = kDefaultTiers);

/// Keeps associations whose tier is at most `tier_s`.
std::vector<Association> at_tier(std::span<const Association> associations, double tier_s);

} // namespace mpct
