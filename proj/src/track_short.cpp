// SPDX-License-Identifier: Apache-2.0

#include "mpct/track_short.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpct
{

namespace
{

constexpr double kDelaySlack = 1e-15;
constexpr double kGainSlack = 1e-9;

// Detections of one snapshot sorted by delay, with claim flags.
class SnapshotIndex
{
public:
    explicit SnapshotIndex(std::span<const DetectedMpc> mpcs) : mpcs_(mpcs), claimed_(mpcs.size(), false)
    {
        order_.resize(mpcs.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            return mpcs_[a].delay_s != mpcs_[b].delay_s ? mpcs_[a].delay_s < mpcs_[b].delay_s : a < b;
        });
        delays_.reserve(order_.size());
        for (auto i : order_)
            delays_.push_back(mpcs_[i].delay_s);
    }

    /// Unclaimed detections with delay in [lo, hi], ascending delay.
    std::vector<std::size_t> in_delay_range(double lo, double hi) const
    {
        std::vector<std::size_t> out;
        auto it = std::lower_bound(delays_.begin(), delays_.end(), lo);
        for (; it != delays_.end() && *it <= hi; ++it)
        {
            const auto idx = order_[static_cast<std::size_t>(it - delays_.begin())];
            if (!claimed_[idx])
                out.push_back(idx);
        }
        return out;
    }

    const DetectedMpc& operator[](std::size_t i) const { return mpcs_[i]; }
    std::size_t size() const { return mpcs_.size(); }
    bool claimed(std::size_t i) const { return claimed_[i]; }
    void claim(std::size_t i) { claimed_[i] = true; }

private:
    std::span<const DetectedMpc> mpcs_;
    std::vector<bool> claimed_;
    std::vector<std::size_t> order_;
    std::vector<double> delays_;
};

bool within_gate(const TrackState& a, const DetectedMpc& b, const ChangeGate& gate)
{
    return std::abs(b.gain_db() - a.gain_db) <= gate.max_gain_change_db + kGainSlack &&
           std::abs(b.delay_s - a.delay_s) <= gate.max_delay_change_s + kDelaySlack;
}

// Search-box lookup followed by nearest-delay selection.
std::optional<std::size_t> search(const SnapshotIndex& snap, const TrackState& predicted, const SearchTolerance& tol)
{
    const auto range = snap.in_delay_range(predicted.delay_s - tol.delay_tol_s - kDelaySlack,
                                           predicted.delay_s + tol.delay_tol_s + kDelaySlack);
    std::optional<std::size_t> best;
    double best_dist = 0.0;
    for (auto idx : range)
    {
        if (!in_search_box(predicted, snap[idx], tol))
            continue;
        const double dist = std::abs(predicted.delay_s - snap[idx].delay_s);
        // ascending delay order makes the first of equal distances the smaller delay
        if (!best || dist < best_dist)
        {
            best = idx;
            best_dist = dist;
        }
    }
    return best;
}

} // namespace

std::vector<std::size_t> candidate_gate(const TrackState& anchor, std::span<const DetectedMpc> next,
                                        const ChangeGate& gate)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < next.size(); ++i)
        if (within_gate(anchor, next[i], gate))
            out.push_back(i);
    return out;
}

TrackState predict_next(const TrackState& prev, const TrackState& curr)
{
    return {2.0 * curr.gain_db - prev.gain_db, 2.0 * curr.delay_s - prev.delay_s};
}

bool in_search_box(const TrackState& predicted, const DetectedMpc& mpc, const SearchTolerance& tol)
{
    return std::abs(mpc.gain_db() - predicted.gain_db) <= tol.gain_tol_db + kGainSlack &&
           std::abs(mpc.delay_s - predicted.delay_s) <= tol.delay_tol_s + kDelaySlack;
}

std::optional<std::size_t> select_candidate(const TrackState& predicted, std::span<const DetectedMpc> in_range)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < in_range.size(); ++i)
    {
        if (!best)
        {
            best = i;
            continue;
        }
        const double d = std::abs(predicted.delay_s - in_range[i].delay_s);
        const double db = std::abs(predicted.delay_s - in_range[*best].delay_s);
        if (d < db || (d == db && in_range[i].delay_s < in_range[*best].delay_s))
            best = i;
    }
    return best;
}

std::vector<Track> track_snapshots(std::span<const std::vector<DetectedMpc>> detections, const ChangeGate& gate,
                                   const SearchTolerance& tol, std::size_t first_snapshot)
{
    std::vector<Track> tracks;
    const std::size_t m = detections.size();
    if (m < 3)
        return tracks;
    std::vector<SnapshotIndex> snaps;
    snaps.reserve(m);
    for (const auto& d : detections)
        snaps.emplace_back(d);

    for (std::size_t n = 0; n + 2 < m; ++n)
    {
        std::vector<std::size_t> anchors(snaps[n].size());
        std::iota(anchors.begin(), anchors.end(), std::size_t{0});
        const auto& here = snaps[n];
        std::stable_sort(anchors.begin(), anchors.end(), [&](std::size_t a, std::size_t b) {
            const double ma = std::abs(here[a].gain);
            const double mb = std::abs(here[b].gain);
            return ma != mb ? ma > mb : here[a].delay_s < here[b].delay_s;
        });
        for (auto a : anchors)
        {
            if (snaps[n].claimed(a))
                continue;
            const TrackState s0 = state_of(snaps[n][a]);
            auto cands = snaps[n + 1].in_delay_range(s0.delay_s - gate.max_delay_change_s - kDelaySlack,
                                                       s0.delay_s + gate.max_delay_change_s + kDelaySlack);
            std::erase_if(cands, [&](std::size_t c) { return !within_gate(s0, snaps[n + 1][c], gate); });
            std::stable_sort(cands.begin(), cands.end(), [&](std::size_t x, std::size_t y) {
                return std::abs(snaps[n + 1][x].delay_s - s0.delay_s) < std::abs(snaps[n + 1][y].delay_s - s0.delay_s);
            });
            for (auto c : cands)
            {
                const TrackState s1 = state_of(snaps[n + 1][c]);
                const auto third = search(snaps[n + 2], predict_next(s0, s1), tol);
                if (!third)
                    continue;
                Track t;
                t.id = tracks.size();
                t.start_snapshot = first_snapshot + n;
                t.states = {s0, s1, state_of(snaps[n + 2][*third])};
                t.members = {a, c, *third};
                snaps[n].claim(a);
                snaps[n + 1].claim(c);
                snaps[n + 2].claim(*third);
                for (std::size_t k = n + 3; k < m; ++k)
                {
                    const auto& st = t.states;
                    const auto next = search(snaps[k], predict_next(st[st.size() - 2], st.back()), tol);
                    if (!next)
                        break;
                    snaps[k].claim(*next);
                    t.states.push_back(state_of(snaps[k][*next]));
                    t.members.push_back(*next);
                }
                tracks.push_back(std::move(t));
                break;
            }
        }
    }
    return tracks;
}

double doppler_estimate(const Track& track, const SounderConfig& config)
{
    const std::size_t n = track.states.size();
    if (n < 2)
        throw std::invalid_argument("doppler_estimate: needs at least two states");
    double mt = 0.0;
    double md = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mt += config.timestamp(track.start_snapshot + i);
        md += track.states[i].delay_s;
    }
    mt /= static_cast<double>(n);
    md /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double dt = config.timestamp(track.start_snapshot + i) - mt;
        sxy += dt * (track.states[i].delay_s - md);
        sxx += dt * dt;
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("doppler_estimate: degenerate timestamps");
    return -(sxy / sxx) * config.carrier_hz;
}

std::vector<Track> track_sets(std::span<const std::vector<DetectedMpc>> detections, const SounderConfig& config,
                              const ChangeGate& gate, const SearchTolerance& tol)
{
    std::vector<Track> out;
    const std::size_t per = config.snapshots_per_set;
    for (std::size_t first = 0; first < detections.size(); first += per)
    {
        const std::size_t count = std::min(per, detections.size() - first);
        auto tracks = track_snapshots(detections.subspan(first, count), gate, tol, first);
        for (auto& t : tracks)
        {
            t.id = out.size();
            t.doppler_hz = doppler_estimate(t, config);
            out.push_back(std::move(t));
        }
    }
    return out;
}

} // namespace mpct
