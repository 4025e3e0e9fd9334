// SPDX-License-Identifier: Apache-2.0

#include "mpct/track_long.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace mpct
{

std::vector<SetSummary> summarize_set(std::span<const Track> tracks, std::size_t set_index,
                                      const SounderConfig& config)
{
    std::vector<SetSummary> out;
    for (const auto& t : tracks)
    {
        if (t.lifetime() != config.snapshots_per_set || config.set_of(t.start_snapshot) != set_index)
            continue;
        SetSummary s;
        double gain = 0.0;
        double delay = 0.0;
        double power = 0.0;
        for (const auto& st : t.states)
        {
            gain += st.gain_db;
            delay += st.delay_s;
            power += db_to_power(st.gain_db);
        }
        const double n = static_cast<double>(t.states.size());
        s.mean_gain_db = gain / n;
        s.mean_delay_s = delay / n;
        s.power = power / n;
        s.lifetime = t.lifetime();
        s.doppler_hz = t.doppler_hz;
        s.set_index = set_index;
        s.source_track_id = t.id;
        out.push_back(s);
    }
    return out;
}

double predict_forward(const SetSummary& summary, const SounderConfig& config)
{
    return summary.mean_delay_s - summary.doppler_hz / config.carrier_hz * config.set_period_s;
}

double predict_backward(const SetSummary& summary, const SounderConfig& config)
{
    return summary.mean_delay_s + summary.doppler_hz / config.carrier_hz * config.set_period_s;
}

std::vector<Association> link_sets(std::span<const SetSummary> curr, std::span<const SetSummary> next,
                                   const LongGate& gate, const SounderConfig& config, std::span<const double> tiers)
{
    std::vector<Association> out;
    if (tiers.empty())
        return out;
    std::vector<double> sorted_tiers(tiers.begin(), tiers.end());
    std::sort(sorted_tiers.begin(), sorted_tiers.end());
    const double slack = 1e-15;

    std::vector<std::size_t> order(curr.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return curr[a].mean_gain_db > curr[b].mean_gain_db;
    });
    std::vector<bool> taken(next.size(), false);
    for (auto k : order)
    {
        const auto& q = curr[k];
        const double forward = predict_forward(q, config);
        std::optional<std::size_t> eta;
        double best = 0.0;
        for (std::size_t c = 0; c < next.size(); ++c)
        {
            if (taken[c])
                continue;
            if (std::abs(next[c].mean_gain_db - q.mean_gain_db) > gate.max_gain_change_db + 1e-9 ||
                std::abs(next[c].mean_delay_s - q.mean_delay_s) > gate.max_delay_change_s + slack)
                continue;
            const double d = std::abs(forward - next[c].mean_delay_s);
            if (!eta || d < best || (d == best && next[c].mean_delay_s < next[*eta].mean_delay_s))
            {
                eta = c;
                best = d;
            }
        }
        if (!eta)
            continue;
        const double d_r = best;
        const double d_k = std::abs(predict_backward(next[*eta], config) - q.mean_delay_s);
        const double worst = std::max(d_r, d_k);
        for (double chi : sorted_tiers)
        {
            if (worst <= chi + slack)
            {
                out.push_back({k, *eta, chi, d_r, d_k});
                taken[*eta] = true;
                break;
            }
        }
    }
    return out;
}

std::vector<Association> at_tier(std::span<const Association> associations, double tier_s)
{
    std::vector<Association> out;
    for (const auto& a : associations)
        if (a.tier_s <= tier_s)
            out.push_back(a);
    return out;
}

} // namespace mpct
