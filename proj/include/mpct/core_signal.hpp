// SPDX-License-Identifier: Apache-2.0
//
// Complex-sample containers, dB conversions, DFT pair and frequency-domain
// windowing shared by every stage of the MPC processing chain.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mpct
{

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Acquisition constants of the channel sounder.
///
/// Snapshots are recorded in bursts ("sets") of `snapshots_per_set`
/// acquisitions spaced `snapshot_period_s`; sets start every `set_period_s`.
struct SounderConfig
{
    double carrier_hz = 5.7e9;
    double bandwidth_hz = 1e9;
    double delay_bin_s = 1e-9;
    std::size_t seq_len = 1024;
    double snapshot_period_s = 0.717e-3;
    std::size_t snapshots_per_set = 6;
    double set_period_s = 10e-3;
    std::size_t num_sets = 1;

    std::size_t num_snapshots() const { return num_sets * snapshots_per_set; }

    /// Start time of snapshot `n` (global index).
    double timestamp(std::size_t n) const;
    std::size_t set_of(std::size_t n) const { return n / snapshots_per_set; }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

struct CirSnapshot
{
    std::vector<cplx> samples;
    std::size_t snapshot_index = 0;
    double timestamp_s = 0.0;
};

/// Frequency-domain view of a CIR; bins in natural DFT order (bin 0 = carrier).
struct TransferFunction
{
    std::vector<cplx> bins;
};

/// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x);

/// Kaiser window of `length` samples with shape `a` (the window's
/// I0 argument is pi*a). Peak value 1 at the centre.
std::vector<double> kaiser_window(std::size_t length, double shape);

/// Rotates a band-ordered window (lowest frequency first) into natural DFT
/// order so that its centre lands on bin 0.
std::vector<double> band_centered(std::span<const double> window);

/// Scales a window to unit mean power, so white noise keeps its per-bin
/// power after windowing.
std::vector<double> unit_power(std::span<const double> window);

TransferFunction apply_frequency_window(const TransferFunction& tf, std::span<const double> window);

/// Forward transform is unscaled, inverse is scaled by 1/U.
std::vector<cplx> forward_dft(std::span<const cplx> x);
std::vector<cplx> inverse_dft(std::span<const cplx> x);

TransferFunction to_transfer_function(const CirSnapshot& cir);
CirSnapshot to_impulse_response(const TransferFunction& tf, std::size_t snapshot_index = 0,
                                double timestamp_s = 0.0);

/// Signed frequency index of DFT bin k for length n: k for k < n/2, else k - n.
inline double signed_bin(std::size_t k, std::size_t n)
{
    return k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

/// 20*log10(|a|); returns -infinity for zero.
double power_db(cplx amplitude);
/// 10*log10(p) for a linear power; -infinity for p <= 0.
double power_to_db(double power);
double db_to_power(double db);
double db_to_amplitude(double db);

double energy(std::span<const cplx> x);

} // namespace mpct
