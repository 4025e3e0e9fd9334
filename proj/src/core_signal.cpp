// SPDX-License-Identifier: Apache-2.0

#include "mpct/core_signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpct
{

double SounderConfig::timestamp(std::size_t n) const
{
    const std::size_t set = n / snapshots_per_set;
    const std::size_t k = n % snapshots_per_set;
    return static_cast<double>(set) * set_period_s + static_cast<double>(k) * snapshot_period_s;
}

void SounderConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("SounderConfig: " + what); };
    if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0) || !(delay_bin_s > 0.0))
        fail("carrier, bandwidth and delay bin must be positive");
    if (std::abs(delay_bin_s * bandwidth_hz - 1.0) > 1e-12)
        fail("delay_bin_s * bandwidth_hz must equal 1");
    if (seq_len < 2)
        fail("seq_len must be at least 2");
    if (snapshots_per_set < 3)
        fail("snapshots_per_set must be at least 3");
    if (!(snapshot_period_s > 0.0))
        fail("snapshot_period_s must be positive");
    if (set_period_s < static_cast<double>(snapshots_per_set) * snapshot_period_s * (1.0 - 1e-12))
        fail("set_period_s must cover snapshots_per_set * snapshot_period_s");
    if (num_sets == 0)
        fail("num_sets must be positive");
}

double bessel_i0(double x)
{
    // sum_k ((x/2)^k / k!)^2, stopped once a term drops below 1e-16 of the sum
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 10000; ++k)
    {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < 1e-16 * sum)
            break;
    }
    return sum;
}

std::vector<double> kaiser_window(std::size_t length, double shape)
{
    if (length < 2)
        throw std::invalid_argument("kaiser_window: length must be at least 2");
    if (!(shape >= 0.0))
        throw std::invalid_argument("kaiser_window: shape must be non-negative");
    const double beta = std::numbers::pi * shape;
    const double denom = bessel_i0(beta);
    const double span = static_cast<double>(length - 1);
    std::vector<double> z(length);
    for (std::size_t u = 0; u < length; ++u)
    {
        const double r = 2.0 * static_cast<double>(u) / span - 1.0;
        const double arg = std::max(0.0, 1.0 - r * r);
        z[u] = bessel_i0(beta * std::sqrt(arg)) / denom;
    }
    // exact symmetry regardless of rounding in r
    for (std::size_t u = 0; u < length / 2; ++u)
        z[length - 1 - u] = z[u];
    return z;
}

std::vector<double> band_centered(std::span<const double> window)
{
    const std::size_t n = window.size();
    std::vector<double> out(n);
    const auto half = static_cast<long>(n / 2);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = window[static_cast<std::size_t>(static_cast<long>(signed_bin(k, n)) + half)];
    return out;
}

std::vector<double> unit_power(std::span<const double> window)
{
    double p = 0.0;
    for (double w : window)
        p += w * w;
    p /= static_cast<double>(window.size());
    std::vector<double> out(window.begin(), window.end());
    if (p > 0.0)
    {
        const double s = 1.0 / std::sqrt(p);
        for (double& w : out)
            w *= s;
    }
    return out;
}

TransferFunction apply_frequency_window(const TransferFunction& tf, std::span<const double> window)
{
    if (tf.bins.size() != window.size())
        throw std::invalid_argument("apply_frequency_window: length mismatch");
    TransferFunction out{tf.bins};
    for (std::size_t k = 0; k < window.size(); ++k)
        out.bins[k] *= window[k];
    return out;
}

namespace
{

struct PlanPair
{
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~PlanPair()
    {
        if (forward)
            fftw_destroy_plan(forward);
        if (backward)
            fftw_destroy_plan(backward);
    }
};

// Plan creation in FFTW is not thread-safe; execution with new arrays is.
class PlanCache
{
public:
    const PlanPair& get(std::size_t n)
    {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end())
            return *it->second;
        auto pair = std::make_unique<PlanPair>();
        auto* in = fftw_alloc_complex(n);
        auto* out = fftw_alloc_complex(n);
        const int len = static_cast<int>(n);
        pair->forward = fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        pair->backward = fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        return *(plans_[n] = std::move(pair));
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, std::unique_ptr<PlanPair>> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

std::vector<cplx> run_dft(std::span<const cplx> x, bool forward)
{
    const std::size_t n = x.size();
    std::vector<cplx> in(x.begin(), x.end());
    std::vector<cplx> out(n);
    if (n == 0)
        return out;
    const auto& plans = plan_cache().get(n);
    fftw_execute_dft(forward ? plans.forward : plans.backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

std::vector<cplx> forward_dft(std::span<const cplx> x)
{
    return run_dft(x, true);
}

std::vector<cplx> inverse_dft(std::span<const cplx> x)
{
    auto out = run_dft(x, false);
    const double s = 1.0 / static_cast<double>(x.size());
    for (auto& v : out)
        v *= s;
    return out;
}

TransferFunction to_transfer_function(const CirSnapshot& cir)
{
    return TransferFunction{forward_dft(cir.samples)};
}

CirSnapshot to_impulse_response(const TransferFunction& tf, std::size_t snapshot_index, double timestamp_s)
{
    return CirSnapshot{inverse_dft(tf.bins), snapshot_index, timestamp_s};
}

double power_db(cplx amplitude)
{
    const double m = std::abs(amplitude);
    return m > 0.0 ? 20.0 * std::log10(m) : kNegInf;
}

double power_to_db(double power)
{
    return power > 0.0 ? 10.0 * std::log10(power) : kNegInf;
}

double db_to_power(double db)
{
    return std::pow(10.0, db / 10.0);
}

double db_to_amplitude(double db)
{
    return std::pow(10.0, db / 20.0);
}

double energy(std::span<const cplx> x)
{
    double e = 0.0;
    for (const auto& v : x)
        e += std::norm(v);
    return e;
}

} // namespace mpct
