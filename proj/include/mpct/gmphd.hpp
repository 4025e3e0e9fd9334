// SPDX-License-Identifier: Apache-2.0
//
// Gaussian-mixture PHD filter on (distance, distance rate), used as the
// comparison tracker.

#pragma once

#include "mpct/core_signal.hpp"
#include "mpct/detect.hpp"
#include "mpct/track_short.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mpct
{

struct GmphdParams
{
    double process_noise_std = 0.3;   ///< m/s^2
    double meas_noise_std = 3e-3;     ///< m
    double p_survival = 0.99;
    double p_detect = 0.95;
    double truncation_threshold = 1e-2;
    double merge_threshold = 1e-1;
    double min_weight = 0.2;
    double clutter_intensity = 1e-4;  ///< per metre
    double birth_weight = 1e-3;
    double birth_pos_std = 0.1;       ///< m
    double birth_vel_std = 50.0;      ///< m/s
    std::size_t max_components = 100;
    double max_gain_change_db = 10.0; ///< track post-filter
    double max_delay_change_s = 1e-9;

    void validate() const;
};

struct GaussianComponent
{
    double weight = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
    std::size_t label = 0;
    long measurement = -1; ///< measurement of the last update, -1 for a missed-detection copy
};

struct GaussianMixture
{
    std::vector<GaussianComponent> components;
    std::size_t next_label = 0;

    double total_weight() const;
};

/// Range measurement of the state and its Jacobian. Linear here; kept as the
/// point where a nonlinear model would plug in.
double measure_state(const Eigen::Vector2d& x);
Eigen::RowVector2d measurement_jacobian(const Eigen::Vector2d& x);

/// Survival scaling and constant-velocity propagation over dt_s.
GaussianMixture gmphd_predict(const GaussianMixture& mixture, const GmphdParams& params, double dt_s);

/// One birth component per distance, each with a fresh label.
void append_births(GaussianMixture& mixture, const GmphdParams& params, std::span<const double> distances_m);

GaussianMixture gmphd_update(const GaussianMixture& mixture, std::span<const double> measurements_m,
                             const GmphdParams& params);

GaussianMixture prune_merge(const GaussianMixture& mixture, const GmphdParams& params);

/// Member index of a track state reported without a supporting measurement.
inline constexpr std::size_t kCoasted = static_cast<std::size_t>(-1);

/// Full recursion over the snapshots with label-based track continuity and
/// the delay/magnitude-change post-filter.
std::vector<Track> gmphd_track(std::span<const std::vector<DetectedMpc>> detections, const GmphdParams& params,
                               const SounderConfig& config);

} // namespace mpct
