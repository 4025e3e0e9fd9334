// SPDX-License-Identifier: Apache-2.0
//
// Synthetic channel-sounder data with exact ground truth.

#pragma once

#include "mpct/core_signal.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace mpct
{

/// Isolated sounding pulse on the delay grid. The pulse is held as `samples`
/// with its peak at `peak_index`; off-grid shifts use the band-limited
/// (DFT) interpolation of these samples.
struct PulseModel
{
    std::vector<cplx> samples;
    std::size_t peak_index = 0;
    double delay_bin_s = 1e-9;
    double width_10db_s = 0.0;

    double duration_s() const { return static_cast<double>(samples.size()) * delay_bin_s; }
    double energy() const { return mpct::energy(samples); }

    /// Peak-normalizes `samples` and measures the 10 dB width.
    static PulseModel from_samples(std::vector<cplx> samples, double delay_bin_s);

    /// U-point DFT of the pulse placed circularly with its peak on sample 0.
    std::vector<cplx> spectrum(std::size_t seq_len) const;

    /// Copy of the pulse with its peak at `delay_bins` in a length-U vector.
    /// Integer delays place the samples directly (truncated at the edges);
    /// fractional delays use a circular band-limited shift.
    std::vector<cplx> place(std::size_t seq_len, double delay_bins) const;
};

/// Width (s) of the band-limited pulse where its magnitude is 10 dB below the peak.
double measure_width_10db(std::span<const cplx> samples, std::size_t peak_index, double delay_bin_s);

/// Pulse whose spectrum is the full band shaped by a Kaiser window of shape `a`.
PulseModel synth_pulse(const SounderConfig& config, double window_shape);

/// Spectral shaping of the default stand-in sounder pulse: flat over the band.
inline constexpr double kSounderPulseShape = 0.0;

/// synth_pulse with the stand-in sounder shaping.
PulseModel sounder_pulse(const SounderConfig& config);

std::string format_pulse(const PulseModel& pulse);
PulseModel parse_pulse(std::string_view text);
PulseModel load_pulse(const std::filesystem::path& path);
void save_pulse(const PulseModel& pulse, const std::filesystem::path& path);

struct GroundTruthMpc
{
    std::size_t birth = 0;        ///< first snapshot (global index)
    std::vector<double> delays_s; ///< one per snapshot from `birth`
    std::vector<cplx> gains;
    std::vector<double> rounding_s; ///< grid rounding applied per snapshot (empty when off-grid)

    std::size_t death() const { return birth + delays_s.size(); }
    bool active(std::size_t n) const { return n >= birth && n < death(); }
    double delay_at(std::size_t n) const { return delays_s[n - birth]; }
    cplx gain_at(std::size_t n) const { return gains[n - birth]; }
};

struct Dataset
{
    SounderConfig config;
    std::vector<CirSnapshot> snapshots;
    std::vector<GroundTruthMpc> truth;
};

/// h[u] = sum_l alpha_l w(u T_b - tau_l) + complex Gaussian noise with mean
/// power `noise_floor_db` per bin. Noise is keyed by (seed, n).
CirSnapshot render_snapshot(std::span<const GroundTruthMpc> truth, std::size_t n, const PulseModel& pulse,
                            double noise_floor_db, const SounderConfig& config, std::uint64_t seed);

Dataset render_dataset(const SounderConfig& config, std::vector<GroundTruthMpc> truth, const PulseModel& pulse,
                       double noise_floor_db, std::uint64_t seed);

/// Rounds every delay to the grid and records the applied correction.
void snap_truth_to_grid(std::vector<GroundTruthMpc>& truth, const SounderConfig& config);

/// Dense floor of weak on-grid pulses, one per delay bin in [start_s, stop_s),
/// each of fixed magnitude and random phase per snapshot.
struct DiffuseFloor
{
    double start_s = 0.0;
    double stop_s = 0.0;
    double power_db_per_bin = -150.0;
};

/// Adds the floor to every snapshot; returns the injected power per snapshot.
double add_diffuse_floor(Dataset& dataset, const DiffuseFloor& floor, const PulseModel& pulse, std::uint64_t seed);

struct TwoTrackOptions
{
    std::optional<PulseModel> pulse; ///< defaults to sounder_pulse
    double base_delay_s = 200e-9;
    bool random_subbin_offset = true; ///< adds U[0, T_b) to the base delay per seed
    bool snap_to_grid = false;
    std::uint64_t seed = 1;
};

/// Two equal-power tracks: one at a fixed delay, one starting `gap_start`
/// later and approaching linearly until `gap_stop`. Single set of
/// `num_snapshots` snapshots.
Dataset two_track_scenario(double mpc_power_db, double noise_db, double delay_gap_start_s, double delay_gap_stop_s,
                           std::size_t num_snapshots, const SounderConfig& config,
                           const TwoTrackOptions& options = {});

struct Vec2
{
    double x = 0.0;
    double y = 0.0;
};

struct Mover
{
    Vec2 position;
    Vec2 velocity;
    Vec2 at(double t) const { return {position.x + velocity.x * t, position.y + velocity.y * t}; }
    double speed() const;
};

struct ScattererSpec
{
    Mover body;
    double reflection_loss_db = 10.0;
    double birth_s = -std::numeric_limits<double>::infinity();
    double death_s = std::numeric_limits<double>::infinity();
};

struct TxRxKinematics
{
    Mover tx;
    Mover rx;
    bool line_of_sight = true;
    double los_extra_loss_db = 0.0;
};

struct GeometryOptions
{
    std::optional<PulseModel> pulse;
    double noise_floor_db = -140.0;
    double max_delay_fraction = 0.7; ///< paths beyond this fraction of U*T_b are dropped
    double fading_std_db = 0.0;      ///< slow log-normal fading per path
    double fading_corr_s = 50e-3;
    bool snap_to_grid = false;
};

/// Delays from path geometry, amplitudes from free-space decay over the total
/// path length and a per-scatterer reflection loss, phases -2 pi f_c tau.
Dataset geometry_scenario(std::span<const ScattererSpec> scatterers, const TxRxKinematics& kinematics,
                          const SounderConfig& config, std::uint64_t seed, const GeometryOptions& options = {});

/// Convoy of two vehicles in a straight tunnel with point scatterers on both walls.
struct ConvoySpec
{
    double speed_mps = 12.5;
    double separation_m = 90.0;
    double tunnel_half_width_m = 6.0;
    std::size_t wall_scatterers = 12;
    double reflection_loss_db = 12.0;
    double lifetime_s = 0.0; ///< 0: scatterers persist for the whole run
};

std::vector<ScattererSpec> convoy_scatterers(const ConvoySpec& spec, double duration_s, std::uint64_t seed);
TxRxKinematics convoy_kinematics(const ConvoySpec& spec);

} // namespace mpct
