// SPDX-License-Identifier: Apache-2.0

#include "mpct/detect.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace mpct
{

void DetectConfig::validate() const
{
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.5))
        throw std::invalid_argument("DetectConfig: tail_fraction must lie in (0, 0.5]");
    if (block_width_s && !(*block_width_s > 0.0))
        throw std::invalid_argument("DetectConfig: block_width_s must be positive");
    if (!(window_shape_a >= 0.0))
        throw std::invalid_argument("DetectConfig: window shape must be non-negative");
    if (max_peaks == 0)
        throw std::invalid_argument("DetectConfig: max_peaks must be positive");
    if (!(noise_margin_db >= 0.0) || !(dynamic_range_db > 0.0))
        throw std::invalid_argument("DetectConfig: margins must be positive");
}

double estimate_noise_floor(const CirSnapshot& cir, const DetectConfig& cfg)
{
    const std::size_t n = cir.samples.size();
    const auto tail = static_cast<std::size_t>(std::floor(cfg.tail_fraction * static_cast<double>(n)));
    if (tail < 32)
        throw std::invalid_argument("estimate_noise_floor: tail window needs at least 32 bins");
    double p = 0.0;
    for (std::size_t u = n - tail; u < n; ++u)
        p += std::norm(cir.samples[u]);
    p /= static_cast<double>(tail);
    return power_to_db(p) + cfg.noise_margin_db;
}

bool BlockedRanges::contains(double delay_bins) const
{
    return std::any_of(ranges.begin(), ranges.end(),
                       [&](const auto& r) { return delay_bins >= r.first && delay_bins <= r.second; });
}

void BlockedRanges::add(double centre_bins, double half_width_bins)
{
    ranges.emplace_back(centre_bins - half_width_bins, centre_bins + half_width_bins);
}

std::optional<PeakEstimate> strongest_peak(std::span<const cplx> residual, const PulseModel& pulse,
                                           const BlockedRanges& blocked)
{
    const auto n = static_cast<long>(residual.size());
    const auto z = static_cast<long>(pulse.samples.size());
    const auto peak = static_cast<long>(pulse.peak_index);
    std::optional<PeakEstimate> best;
    double best_mag = -1.0;
    for (long d = 0; d < n; ++d)
    {
        if (blocked.contains(static_cast<double>(d)))
            continue;
        cplx c = 0.0;
        const long i0 = std::max(0L, peak - d);
        const long i1 = std::min(z, n - d + peak);
        for (long i = i0; i < i1; ++i)
            c += std::conj(pulse.samples[static_cast<std::size_t>(i)]) * residual[static_cast<std::size_t>(d - peak + i)];
        const double mag = std::norm(c);
        if (mag > best_mag)
        {
            best_mag = mag;
            best = PeakEstimate{static_cast<double>(d), c};
        }
    }
    if (best)
        best->gain /= pulse.energy();
    return best;
}

void subtract_pulse(std::vector<cplx>& residual, const PeakEstimate& peak, const PulseModel& pulse)
{
    const long d = std::lround(peak.delay_bins);
    const auto n = static_cast<long>(residual.size());
    for (std::size_t i = 0; i < pulse.samples.size(); ++i)
    {
        const long pos = d - static_cast<long>(pulse.peak_index) + static_cast<long>(i);
        if (pos >= 0 && pos < n)
            residual[static_cast<std::size_t>(pos)] -= peak.gain * pulse.samples[i];
    }
}

Detector::Detector(const PulseModel& pulse, std::size_t seq_len, const DetectConfig& cfg)
    : cfg_(cfg), seq_len_(seq_len)
{
    cfg_.validate();
    if (pulse.samples.size() > seq_len)
        throw std::invalid_argument("Detector: pulse longer than the sequence");
    window_ = cfg_.windowing ? unit_power(band_centered(kaiser_window(seq_len, cfg_.window_shape_a)))
                             : std::vector<double>(seq_len, 1.0);
    ref_spectrum_ = pulse.spectrum(seq_len);
    raw_spectrum_ = ref_spectrum_;
    raw_energy_ = energy(raw_spectrum_) / static_cast<double>(seq_len);
    for (std::size_t k = 0; k < seq_len; ++k)
        ref_spectrum_[k] *= window_[k];
    const auto full = inverse_dft(ref_spectrum_);

    std::size_t peak = 0;
    for (std::size_t u = 1; u < seq_len; ++u)
        if (std::abs(full[u]) > std::abs(full[peak]))
            peak = u;
    const double keep = 1e-9 * std::abs(full[peak]);
    auto at = [&](long j) { return full[static_cast<std::size_t>(((j % static_cast<long>(seq_len)) + static_cast<long>(seq_len)) % static_cast<long>(seq_len))]; };
    long left = 0;
    long right = 0;
    const long half = static_cast<long>(seq_len / 2);
    for (long j = 1; j < half; ++j)
    {
        if (std::abs(at(static_cast<long>(peak) + j)) >= keep)
            right = j;
        if (std::abs(at(static_cast<long>(peak) - j)) >= keep)
            left = j;
    }
    std::vector<cplx> samples;
    for (long j = -left; j <= right; ++j)
        samples.push_back(at(static_cast<long>(peak) + j));
    reference_.samples = std::move(samples);
    reference_.delay_bin_s = pulse.delay_bin_s;
    // the circular peak offset carries over as a shift of the reference
    const long shift = static_cast<long>(peak) <= half ? static_cast<long>(peak) : static_cast<long>(peak) - static_cast<long>(seq_len);
    reference_.peak_index = static_cast<std::size_t>(left - shift);
    reference_.width_10db_s = measure_width_10db(reference_.samples, static_cast<std::size_t>(left), pulse.delay_bin_s);
    ref_energy_ = energy(ref_spectrum_) / static_cast<double>(seq_len);
    block_width_s_ = cfg_.block_width_s ? *cfg_.block_width_s : reference_.width_10db_s;
}

std::vector<cplx> Detector::windowed(std::span<const cplx> samples) const
{
    if (samples.size() != seq_len_)
        throw std::invalid_argument("Detector: snapshot length mismatch");
    if (!cfg_.windowing)
        return {samples.begin(), samples.end()};
    auto spec = forward_dft(samples);
    for (std::size_t k = 0; k < seq_len_; ++k)
        spec[k] *= window_[k];
    return inverse_dft(spec);
}

cplx Detector::correlate(std::span<const cplx> q, double delay_bins) const
{
    // (1/U) sum_k Q[k] e^{+j 2 pi s_k tau / U} with Q = R conj(W)
    const std::size_t n = seq_len_;
    const cplx step = std::polar(1.0, 2.0 * std::numbers::pi * delay_bins / static_cast<double>(n));
    const cplx back = std::conj(step);
    cplx acc = q[0];
    cplx z = 1.0;
    const std::size_t pos_end = (n + 1) / 2;
    for (std::size_t k = 1; k < pos_end; ++k)
    {
        z *= step;
        acc += q[k] * z;
    }
    z = 1.0;
    for (std::size_t k = n - 1; k >= pos_end; --k)
    {
        z *= back;
        acc += q[k] * z;
    }
    return acc / static_cast<double>(n);
}

double Detector::refine(std::span<const cplx> q, double start_bins, double half_range_bins,
                        const BlockedRanges& blocked) const
{
    double lo = std::max(0.0, start_bins - half_range_bins);
    double hi = std::min(static_cast<double>(seq_len_) - 1e-9, start_bins + half_range_bins);
    for (const auto& r : blocked.ranges)
    {
        if (r.second < start_bins)
            lo = std::max(lo, r.second + 1e-9);
        else if (r.first > start_bins)
            hi = std::min(hi, r.first - 1e-9);
    }
    if (!(hi > lo))
        return start_bins;
    auto cost = [&](double tau) { return -std::norm(correlate(q, tau)); };
    double best = start_bins;
    double best_cost = cost(start_bins);
    // a minimum on an open edge of the bracket moves the bracket along
    for (int step = 0; step < 4; ++step)
    {
        const auto res = boost::math::tools::brent_find_minima(cost, lo, hi, 40);
        if (!(res.second < best_cost))
            break;
        best = res.first;
        best_cost = res.second;
        const double edge = 1e-6;
        const double width = hi - lo;
        double nlo = lo;
        double nhi = hi;
        if (best - lo < edge && lo > 0.0 && !blocked.contains(lo - 2.0 * edge))
            nlo = std::max(0.0, lo - 0.5 * width), nhi = lo + 0.5 * width;
        else if (hi - best < edge && hi < static_cast<double>(seq_len_) - 1e-9 && !blocked.contains(hi + 2.0 * edge))
            nlo = hi - 0.5 * width, nhi = std::min(static_cast<double>(seq_len_) - 1e-9, hi + 0.5 * width);
        else
            break;
        for (const auto& r : blocked.ranges)
        {
            if (r.second < best)
                nlo = std::max(nlo, r.second + 1e-9);
            else if (r.first > best)
                nhi = std::min(nhi, r.first - 1e-9);
        }
        if (!(nhi > nlo))
            break;
        lo = nlo;
        hi = nhi;
    }
    return best;
}

std::optional<PeakEstimate> Detector::circular_peak(std::span<const cplx> residual, const BlockedRanges& blocked) const
{
    auto q = forward_dft(residual);
    for (std::size_t k = 0; k < seq_len_; ++k)
        q[k] *= std::conj(ref_spectrum_[k]);
    // inverse_dft(q)[d] is the correlation at integer delay d
    const auto c = inverse_dft(q);
    std::optional<PeakEstimate> best;
    double best_mag = -1.0;
    for (std::size_t d = 0; d < seq_len_; ++d)
    {
        if (blocked.contains(static_cast<double>(d)))
            continue;
        const double mag = std::norm(c[d]);
        if (mag > best_mag)
        {
            best_mag = mag;
            best = PeakEstimate{static_cast<double>(d), c[d] / ref_energy_};
        }
    }
    return best;
}

void Detector::subtract_fractional(Residual& residual, const PeakEstimate& peak) const
{
    std::vector<cplx> spec(seq_len_);
    const double w = -2.0 * std::numbers::pi * peak.delay_bins / static_cast<double>(seq_len_);
    if (!residual.raw_spec.empty())
    {
        // the search residual is rebuilt from this by the caller
        for (std::size_t k = 0; k < seq_len_; ++k)
            residual.raw_spec[k] -= peak.gain * std::polar(1.0, w * signed_bin(k, seq_len_)) * raw_spectrum_[k];
        return;
    }
    for (std::size_t k = 0; k < seq_len_; ++k)
        spec[k] = peak.gain * ref_spectrum_[k] * std::polar(1.0, w * signed_bin(k, seq_len_));
    const auto shifted = inverse_dft(spec);
    for (std::size_t u = 0; u < seq_len_; ++u)
        residual.search[u] -= shifted[u];
}

void Detector::estimate_at(const Residual& residual, PeakEstimate& peak, double half_range_bins,
                           const BlockedRanges& blocked) const
{
    const bool raw = !residual.raw_spec.empty();
    const auto r = raw ? residual.raw_spec : forward_dft(residual.search);
    const auto& pulse = raw ? raw_spectrum_ : ref_spectrum_;
    std::vector<cplx> q(seq_len_);
    for (std::size_t k = 0; k < seq_len_; ++k)
        q[k] = r[k] * std::conj(pulse[k]);
    peak.delay_bins = refine(q, peak.delay_bins, half_range_bins, blocked);
    peak.gain = correlate(q, peak.delay_bins) / (raw ? raw_energy_ : ref_energy_);
}

void Detector::joint_sweeps(Residual& residual, std::vector<PeakEstimate>& peaks, std::size_t newest) const
{
    const double hw = 0.5 * block_width_s_ / reference_.delay_bin_s;
    const double radius = 2.0 * reference_.width_10db_s / reference_.delay_bin_s;
    std::vector<std::size_t> group;
    for (std::size_t j = 0; j < peaks.size(); ++j)
        if (std::abs(peaks[j].delay_bins - peaks[newest].delay_bins) <= radius)
            group.push_back(j);
    if (group.size() < 2)
        return;
    for (std::size_t sweep = 0; sweep < cfg_.joint_sweeps; ++sweep)
        for (auto j : group)
        {
            BlockedRanges others;
            for (std::size_t i = 0; i < peaks.size(); ++i)
                if (i != j)
                    others.add(peaks[i].delay_bins, hw);
            PeakEstimate undo{peaks[j].delay_bins, -peaks[j].gain};
            subtract_fractional(residual, undo);
            estimate_at(residual, peaks[j], 1.0, others);
            subtract_fractional(residual, peaks[j]);
        }
}

std::vector<DetectedMpc> Detector::detect(const CirSnapshot& cir) const
{
    if (cir.samples.size() != seq_len_)
        throw std::invalid_argument("Detector: snapshot length mismatch");
    const double threshold_db = estimate_noise_floor(cir, cfg_);
    const double threshold = db_to_power(threshold_db);

    auto zero_below = [&](std::vector<cplx>& h) {
        for (auto& v : h)
            if (std::norm(v) < threshold)
                v = 0.0;
    };
    Residual residual;
    std::vector<cplx>& search = residual.search;
    auto thresholded = [&](std::vector<cplx> h) {
        if (cfg_.zero_before_window)
            zero_below(h);
        h = windowed(h);
        if (!cfg_.zero_before_window)
            zero_below(h);
        return h;
    };
    const bool raw = cfg_.subbin_refine && cfg_.estimate_on_raw;
    if (raw)
        residual.raw_spec = forward_dft(cir.samples);
    search = thresholded({cir.samples.begin(), cir.samples.end()});

    double peak_power = 0.0;
    for (const auto& v : search)
        peak_power = std::max(peak_power, std::norm(v));
    const double floor = std::max(threshold, peak_power * db_to_power(-cfg_.dynamic_range_db));
    const double hw = 0.5 * block_width_s_ / reference_.delay_bin_s;

    std::vector<PeakEstimate> peaks;
    BlockedRanges blocked;
    while (peaks.size() < cfg_.max_peaks)
    {
        double top = 0.0;
        for (std::size_t u = 0; u < seq_len_; ++u)
            if (!blocked.contains(static_cast<double>(u)))
                top = std::max(top, std::norm(search[u]));
        if (!(top > floor))
            break;
        auto peak = cfg_.subbin_refine ? circular_peak(search, blocked) : strongest_peak(search, reference_, blocked);
        if (!peak)
            break;
        if (cfg_.subbin_refine)
            estimate_at(residual, *peak, 0.5, blocked);
        if (peak->gain == cplx(0.0))
            break;
        if (cfg_.subbin_refine)
            subtract_fractional(residual, *peak);
        else
            subtract_pulse(search, *peak, reference_);
        peaks.push_back(*peak);
        if (cfg_.subbin_refine && cfg_.joint_sweeps > 0)
        {
            joint_sweeps(residual, peaks, peaks.size() - 1);
            blocked.ranges.clear();
            for (const auto& p : peaks)
                blocked.add(p.delay_bins, hw);
        }
        else
        {
            blocked.add(peak->delay_bins, hw);
        }
        if (raw && cfg_.zero_before_window)
        {
            search = thresholded(inverse_dft(residual.raw_spec));
        }
        else if (raw)
        {
            std::vector<cplx> spec = residual.raw_spec;
            for (std::size_t k = 0; k < seq_len_; ++k)
                spec[k] *= window_[k];
            search = inverse_dft(spec);
            zero_below(search);
        }
    }
    std::vector<DetectedMpc> out;
    for (const auto& p : peaks)
        out.push_back(DetectedMpc{p.gain, p.delay_bins * reference_.delay_bin_s, std::arg(p.gain), cir.snapshot_index});
    std::stable_sort(out.begin(), out.end(), [](const DetectedMpc& a, const DetectedMpc& b) {
        const double ma = std::abs(a.gain);
        const double mb = std::abs(b.gain);
        return ma != mb ? ma > mb : a.delay_s < b.delay_s;
    });
    return out;
}

std::vector<DetectedMpc> detect_mpcs(const CirSnapshot& cir, const PulseModel& pulse, const DetectConfig& cfg)
{
    return Detector(pulse, cir.samples.size(), cfg).detect(cir);
}

std::vector<std::vector<DetectedMpc>> detect_all(std::span<const CirSnapshot> snapshots, const Detector& detector,
                                                 unsigned threads)
{
    std::vector<std::vector<DetectedMpc>> out(snapshots.size());
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, snapshots.size())));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < snapshots.size(); ++i)
            out[i] = detector.detect(snapshots[i]);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try
            {
                for (std::size_t i = t; i < snapshots.size(); i += threads)
                    out[i] = detector.detect(snapshots[i]);
            }
            catch (...)
            {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

} // namespace mpct
