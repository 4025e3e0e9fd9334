// SPDX-License-Identifier: Apache-2.0
//
// Evaluation against ground truth, channel-gain capture and run statistics.

#pragma once

#include "mpct/core_signal.hpp"
#include "mpct/detect.hpp"
#include "mpct/gmphd.hpp"
#include "mpct/synth.hpp"
#include "mpct/track_long.hpp"
#include "mpct/track_short.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace mpct
{

/// Empirical CDF with one knot per distinct value; p is right-continuous
/// and ends at 1.
struct Cdf
{
    std::vector<double> x;
    std::vector<double> p;

    bool empty() const { return x.empty(); }
    double at(double v) const;
};

Cdf empirical_cdf(std::vector<double> values);

enum class Algorithm
{
    proposed,
    gmphd
};

const char* algorithm_name(Algorithm a);

struct ArtificialOptions
{
    double noise_db = -140.0;
    double gap_start_s = 30e-9;
    double gap_stop_s = 0.0;
    std::size_t num_snapshots = 200;
    double min_separation_s = 2.5e-9; ///< approach region excluded below this
    double match_radius_s = 1e-9;
    double roi_margin_s = 5e-9;
    std::size_t min_valid_states = 3;
    DetectConfig detect;
    ChangeGate gate;
    SearchTolerance tol;
    GmphdParams gmphd;
    std::optional<PulseModel> pulse;
};

struct SeedOutcome
{
    std::size_t num_tracks = 0;     ///< non-trivial tracks in the evaluated region
    std::size_t matched = 0;        ///< of which matched to a truth MPC
    double abs_error_sum_s = 0.0;   ///< over matched states with adequate separation
    std::size_t error_states = 0;
};

/// Scores a set of tracks on a two-track dataset.
SeedOutcome score_tracks(const Dataset& dataset, std::span<const Track> tracks, const ArtificialOptions& options);

/// Runs scenario, detection, tracking and scoring for one seed.
SeedOutcome evaluate_seed(double mpc_power_db, bool windowing, Algorithm algorithm, std::uint64_t seed,
                          const SounderConfig& config, const ArtificialOptions& options);

struct EvalCurvePoint
{
    double mpc_power_db = 0.0;
    bool windowing = true;
    Algorithm algorithm = Algorithm::proposed;
    double num_tracks_detected = 0.0; ///< mean over seeds
    double mean_delay_error_s = 0.0;
    std::size_t seeds = 0;
    std::size_t seeds_with_two = 0;
    std::size_t min_tracks = 0;
    std::size_t max_tracks = 0;
};

std::vector<EvalCurvePoint> evaluate_artificial(std::span<const double> power_sweep_db, std::span<const bool> windowing,
                                                std::span<const Algorithm> algorithms,
                                                std::span<const std::uint64_t> seeds, const SounderConfig& config,
                                                const ArtificialOptions& options = {});

struct GainSeries
{
    std::vector<double> original_db;
    std::vector<double> detected_db;
    std::map<std::string, std::vector<double>> tracked_db;

    std::vector<double> loss_db(const std::string& algorithm) const;
    std::vector<double> detection_loss_db() const;
};

/// Per-snapshot track power, linear, relative to the detector's reference pulse.
std::vector<double> tracked_power(std::span<const Track> tracks, std::size_t num_snapshots, double reference_energy);

GainSeries channel_gain_series(const Dataset& dataset, const Detector& detector,
                               std::span<const std::vector<DetectedMpc>> detections,
                               const std::map<std::string, std::vector<Track>>& tracks_by_algorithm);

/// Mean over snapshots of (tracked loss - detected loss)^2 in dB^2.
double loss_mse(const GainSeries& series, const std::string& algorithm);

struct PowerStdCdf
{
    Cdf all;
    Cdf full_lifetime;
};

PowerStdCdf power_std_cdf(std::span<const Track> tracks, std::size_t snapshots_per_set);

Cdf mpc_count_cdf(std::span<const std::vector<SetSummary>> summaries_per_set);

struct BirthDeathCdf
{
    Cdf birth;
    Cdf death;
};

/// `associations[i]` links set i to set i + 1; `displacement_m[i]` is the
/// cumulative travel of both vehicles over that interval.
BirthDeathCdf birth_death_rate(std::span<const std::vector<SetSummary>> summaries_per_set,
                               std::span<const std::vector<Association>> associations,
                               std::span<const double> displacement_m);

struct PowerLossLedger
{
    double detection_loss_db = 0.0;
    double short_term_loss_db = 0.0;
    double non_full_lifetime_fraction = 0.0;
    double long_term_unassociated_fraction = 0.0;
    double total_db = 0.0;
};

/// total = short-term dB loss plus the two fractional losses in dB.
double combine_losses(double short_term_loss_db, double non_full_fraction, double unassociated_fraction);

PowerLossLedger power_loss_ledger(const GainSeries& series, std::span<const Track> proposed_tracks,
                                  std::span<const std::vector<SetSummary>> summaries_per_set,
                                  std::span<const std::vector<Association>> associations,
                                  std::size_t snapshots_per_set);

} // namespace mpct
