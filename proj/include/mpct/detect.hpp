// SPDX-License-Identifier: Apache-2.0
//
// Per-snapshot MPC detection by strongest-peak search and pulse subtraction.

#pragma once

#include "mpct/core_signal.hpp"
#include "mpct/synth.hpp"

#include <numbers>
#include <optional>
#include <vector>

namespace mpct
{

struct DetectedMpc
{
    cplx gain;
    double delay_s = 0.0;
    double phase_rad = 0.0;
    std::size_t snapshot_index = 0;

    double gain_db() const { return power_db(gain); }
};

/// Kaiser shape a for beta = pi a = 6.
inline constexpr double kDefaultWindowShape = 6.0 / std::numbers::pi;

struct DetectConfig
{
    double noise_margin_db = 6.0;
    std::optional<double> block_width_s; ///< unset: the reference pulse's 10 dB width
    double window_shape_a = kDefaultWindowShape;
    bool windowing = true;
    std::size_t max_peaks = 100;
    double tail_fraction = 0.25;
    bool zero_before_window = false;
    bool subbin_refine = true;
    /// Refined delays and gains come from the unwindowed, unthresholded data;
    /// the windowed, thresholded residual then only drives the peak search.
    bool estimate_on_raw = true;
    std::size_t joint_sweeps = 3; ///< re-estimation passes over overlapping detections (refinement only)
    double dynamic_range_db = 180.0; ///< stop once the residual is this far below the first peak

    void validate() const;
};

/// Mean bin power (dB) over the trailing `tail_fraction` of the delay axis
/// plus the margin. Throws std::invalid_argument for fewer than 32 tail bins.
double estimate_noise_floor(const CirSnapshot& cir, const DetectConfig& cfg);

/// Closed delay intervals [lo, hi] in bins excluded from the peak search.
struct BlockedRanges
{
    std::vector<std::pair<double, double>> ranges;

    bool contains(double delay_bins) const;
    void add(double centre_bins, double half_width_bins);
};

struct PeakEstimate
{
    double delay_bins = 0.0;
    cplx gain;
};

/// Grid ML estimate: argmax over unblocked integer delays of |w(D)^H h|
/// with gain w(D)^H h / (w^T w). Ties go to the smaller delay.
std::optional<PeakEstimate> strongest_peak(std::span<const cplx> residual, const PulseModel& pulse,
                                           const BlockedRanges& blocked);

/// residual - gain * w(delay) for an integer delay (truncated at the edges).
void subtract_pulse(std::vector<cplx>& residual, const PeakEstimate& peak, const PulseModel& pulse);

/// Detection engine bound to one pulse and sequence length. Thread-safe for
/// concurrent detect() calls.
class Detector
{
public:
    Detector(const PulseModel& pulse, std::size_t seq_len, const DetectConfig& cfg);

    std::vector<DetectedMpc> detect(const CirSnapshot& cir) const;

    /// Snapshot after frequency-domain windowing only (no zeroing).
    std::vector<cplx> windowed(std::span<const cplx> samples) const;

    /// Pulse as seen after windowing; detected gains are relative to it.
    const PulseModel& reference() const { return reference_; }
    double block_width_s() const { return block_width_s_; }
    const DetectConfig& config() const { return cfg_; }

private:
    struct Residual
    {
        std::vector<cplx> search;   ///< windowed, thresholded, delay domain
        std::vector<cplx> raw_spec; ///< unwindowed spectrum; empty unless estimate_on_raw
    };

    double refine(std::span<const cplx> q, double start_bins, double half_range_bins,
                  const BlockedRanges& blocked) const;
    void estimate_at(const Residual& residual, PeakEstimate& peak, double half_range_bins,
                     const BlockedRanges& blocked) const;
    void joint_sweeps(Residual& residual, std::vector<PeakEstimate>& peaks, std::size_t newest) const;
    cplx correlate(std::span<const cplx> spectrum, double delay_bins) const;
    /// strongest_peak with the circular reference, through the DFT.
    std::optional<PeakEstimate> circular_peak(std::span<const cplx> residual, const BlockedRanges& blocked) const;
    void subtract_fractional(Residual& residual, const PeakEstimate& peak) const;

    DetectConfig cfg_;
    std::size_t seq_len_;
    std::vector<double> window_;
    std::vector<cplx> ref_spectrum_;
    std::vector<cplx> raw_spectrum_;
    PulseModel reference_;
    double ref_energy_ = 0.0;
    double raw_energy_ = 0.0;
    double block_width_s_ = 0.0;
};

std::vector<DetectedMpc> detect_mpcs(const CirSnapshot& cir, const PulseModel& pulse, const DetectConfig& cfg);

/// Runs the detector over every snapshot with `threads` workers (0: hardware).
std::vector<std::vector<DetectedMpc>> detect_all(std::span<const CirSnapshot> snapshots, const Detector& detector,
                                                 unsigned threads = 0);

} // namespace mpct
