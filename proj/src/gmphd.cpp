// SPDX-License-Identifier: Apache-2.0

#include "mpct/gmphd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mpct
{

void GmphdParams::validate() const
{
    auto prob = [](double p) { return p > 0.0 && p <= 1.0; };
    if (!prob(p_survival) || !prob(p_detect))
        throw std::invalid_argument("GmphdParams: probabilities must lie in (0, 1]");
    if (!(process_noise_std > 0.0) || !(meas_noise_std > 0.0) || !(birth_pos_std > 0.0) || !(birth_vel_std > 0.0))
        throw std::invalid_argument("GmphdParams: standard deviations must be positive");
    if (!(truncation_threshold >= 0.0) || !(merge_threshold >= 0.0) || !(clutter_intensity >= 0.0))
        throw std::invalid_argument("GmphdParams: thresholds must be non-negative");
    if (max_components == 0)
        throw std::invalid_argument("GmphdParams: max_components must be positive");
}

double GaussianMixture::total_weight() const
{
    double w = 0.0;
    for (const auto& c : components)
        w += c.weight;
    return w;
}

double measure_state(const Eigen::Vector2d& x)
{
    return x(0);
}

Eigen::RowVector2d measurement_jacobian(const Eigen::Vector2d&)
{
    return Eigen::RowVector2d(1.0, 0.0);
}

GaussianMixture gmphd_predict(const GaussianMixture& mixture, const GmphdParams& params, double dt_s)
{
    if (!(dt_s > 0.0))
        throw std::invalid_argument("gmphd_predict: dt must be positive");
    Eigen::Matrix2d f;
    f << 1.0, dt_s, 0.0, 1.0;
    const double q = params.process_noise_std * params.process_noise_std;
    const double dt2 = dt_s * dt_s;
    Eigen::Matrix2d qm;
    qm << dt2 * dt2 / 4.0, dt2 * dt_s / 2.0, dt2 * dt_s / 2.0, dt2;
    qm *= q;
    GaussianMixture out;
    out.next_label = mixture.next_label;
    out.components.reserve(mixture.components.size());
    for (const auto& c : mixture.components)
    {
        GaussianComponent p = c;
        p.weight = params.p_survival * c.weight;
        p.mean = f * c.mean;
        p.cov = f * c.cov * f.transpose() + qm;
        p.cov = 0.5 * (p.cov + p.cov.transpose());
        out.components.push_back(p);
    }
    return out;
}

void append_births(GaussianMixture& mixture, const GmphdParams& params, std::span<const double> distances_m)
{
    for (double d : distances_m)
    {
        GaussianComponent b;
        b.weight = params.birth_weight;
        b.mean = Eigen::Vector2d(d, 0.0);
        b.cov = Eigen::Vector2d(params.birth_pos_std * params.birth_pos_std,
                                params.birth_vel_std * params.birth_vel_std)
                    .asDiagonal();
        b.label = mixture.next_label++;
        mixture.components.push_back(b);
    }
}

GaussianMixture gmphd_update(const GaussianMixture& mixture, std::span<const double> measurements_m,
                             const GmphdParams& params)
{
    GaussianMixture out;
    out.next_label = mixture.next_label;
    const double r = params.meas_noise_std * params.meas_noise_std;
    for (const auto& c : mixture.components)
    {
        GaussianComponent m = c;
        m.weight = (1.0 - params.p_detect) * c.weight;
        m.measurement = -1;
        out.components.push_back(m);
    }
    struct Gain
    {
        double predicted;
        double s;
        Eigen::Vector2d k;
        Eigen::Matrix2d cov;
    };
    std::vector<Gain> gains;
    gains.reserve(mixture.components.size());
    for (const auto& c : mixture.components)
    {
        const Eigen::RowVector2d h = measurement_jacobian(c.mean);
        const double s = (h * c.cov * h.transpose())(0, 0) + r;
        const Eigen::Vector2d k = c.cov * h.transpose() / s;
        Eigen::Matrix2d cov = (Eigen::Matrix2d::Identity() - k * h) * c.cov;
        cov = 0.5 * (cov + cov.transpose());
        gains.push_back({measure_state(c.mean), s, k, cov});
    }
    for (std::size_t z = 0; z < measurements_m.size(); ++z)
    {
        const std::size_t first = out.components.size();
        double sum = 0.0;
        for (std::size_t j = 0; j < mixture.components.size(); ++j)
        {
            const auto& c = mixture.components[j];
            const auto& g = gains[j];
            const double innov = measurements_m[z] - g.predicted;
            const double lik = std::exp(-0.5 * innov * innov / g.s) / std::sqrt(2.0 * std::numbers::pi * g.s);
            GaussianComponent u;
            u.weight = params.p_detect * c.weight * lik;
            u.mean = c.mean + g.k * innov;
            u.cov = g.cov;
            u.label = c.label;
            u.measurement = static_cast<long>(z);
            sum += u.weight;
            out.components.push_back(u);
        }
        const double denom = params.clutter_intensity + sum;
        for (std::size_t j = first; j < out.components.size(); ++j)
            out.components[j].weight = denom > 0.0 ? out.components[j].weight / denom : 0.0;
    }
    return out;
}

GaussianMixture prune_merge(const GaussianMixture& mixture, const GmphdParams& params)
{
    std::vector<GaussianComponent> pool;
    for (const auto& c : mixture.components)
        if (c.weight >= params.truncation_threshold)
            pool.push_back(c);
    // stable order: heaviest first, ties by label
    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
    std::vector<bool> used(pool.size(), false);
    GaussianMixture out;
    out.next_label = mixture.next_label;
    for (std::size_t j = 0; j < pool.size(); ++j)
    {
        if (used[j])
            continue;
        const auto& lead = pool[j];
        double w = 0.0;
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        std::vector<std::size_t> group;
        for (std::size_t i = j; i < pool.size(); ++i)
        {
            if (used[i])
                continue;
            const Eigen::Vector2d d = pool[i].mean - lead.mean;
            const double dist = d.dot(pool[i].cov.ldlt().solve(d));
            if (dist <= params.merge_threshold)
            {
                group.push_back(i);
                used[i] = true;
                w += pool[i].weight;
                mean += pool[i].weight * pool[i].mean;
            }
        }
        mean /= w;
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (auto i : group)
        {
            const Eigen::Vector2d d = mean - pool[i].mean;
            cov += pool[i].weight * (pool[i].cov + d * d.transpose());
        }
        cov /= w;
        GaussianComponent merged = lead;
        merged.weight = w;
        merged.mean = mean;
        merged.cov = 0.5 * (cov + cov.transpose());
        out.components.push_back(merged);
    }
    if (out.components.size() > params.max_components)
        out.components.resize(params.max_components);
    return out;
}

namespace
{

std::vector<Track> split_by_change(Track t, const GmphdParams& params)
{
    std::vector<Track> pieces;
    std::size_t begin = 0;
    auto flush = [&](std::size_t end) {
        if (end - begin >= 3)
        {
            Track p;
            p.start_snapshot = t.start_snapshot + begin;
            p.states.assign(t.states.begin() + static_cast<long>(begin), t.states.begin() + static_cast<long>(end));
            p.members.assign(t.members.begin() + static_cast<long>(begin), t.members.begin() + static_cast<long>(end));
            pieces.push_back(std::move(p));
        }
        begin = end;
    };
    for (std::size_t i = 1; i < t.states.size(); ++i)
    {
        const auto& a = t.states[i - 1];
        const auto& b = t.states[i];
        if (std::abs(b.delay_s - a.delay_s) > params.max_delay_change_s ||
            std::abs(b.gain_db - a.gain_db) > params.max_gain_change_db)
            flush(i);
    }
    flush(t.states.size());
    return pieces;
}

} // namespace

std::vector<Track> gmphd_track(std::span<const std::vector<DetectedMpc>> detections, const GmphdParams& params,
                               const SounderConfig& config)
{
    params.validate();
    GaussianMixture mix;
    std::map<std::size_t, Track> open;
    std::vector<Track> finished;
    std::vector<double> unclaimed_prev;

    for (std::size_t n = 0; n < detections.size(); ++n)
    {
        const auto& dets = detections[n];
        if (n > 0)
            mix = gmphd_predict(mix, params, config.timestamp(n) - config.timestamp(n - 1));
        append_births(mix, params, unclaimed_prev);
        std::vector<double> z;
        z.reserve(dets.size());
        for (const auto& d : dets)
            z.push_back(d.delay_s * kSpeedOfLight);
        mix = prune_merge(gmphd_update(mix, z, params), params);

        // heaviest component per label
        std::map<std::size_t, const GaussianComponent*> best;
        for (const auto& c : mix.components)
        {
            auto [it, inserted] = best.try_emplace(c.label, &c);
            if (!inserted && c.weight > it->second->weight)
                it->second = &c;
        }
        std::vector<bool> claimed(dets.size(), false);
        std::map<std::size_t, Track> next_open;
        for (const auto& [label, comp] : best)
        {
            auto it = open.find(label);
            const bool extracted = comp->weight > params.min_weight;
            if (!extracted && it == open.end())
                continue;
            Track t;
            if (it != open.end())
            {
                t = std::move(it->second);
                open.erase(it);
            }
            else
            {
                t.start_snapshot = n;
            }
            TrackState s;
            s.delay_s = comp->mean(0) / kSpeedOfLight;
            std::size_t member = kCoasted;
            if (comp->measurement >= 0)
            {
                member = static_cast<std::size_t>(comp->measurement);
                s.gain_db = dets[member].gain_db();
                if (extracted)
                    claimed[member] = true;
            }
            else
            {
                s.gain_db = t.states.empty() ? kNegInf : t.states.back().gain_db;
            }
            t.states.push_back(s);
            t.members.push_back(member);
            next_open.emplace(label, std::move(t));
        }
        for (auto& [label, t] : open)
            finished.push_back(std::move(t));
        open = std::move(next_open);
        unclaimed_prev.clear();
        for (std::size_t i = 0; i < dets.size(); ++i)
            if (!claimed[i])
                unclaimed_prev.push_back(z[i]);
    }
    for (auto& [label, t] : open)
        finished.push_back(std::move(t));

    std::stable_sort(finished.begin(), finished.end(), [](const Track& a, const Track& b) {
        return a.start_snapshot != b.start_snapshot ? a.start_snapshot < b.start_snapshot
                                                    : a.states.front().delay_s < b.states.front().delay_s;
    });
    std::vector<Track> out;
    for (auto& t : finished)
        for (auto& p : split_by_change(std::move(t), params))
        {
            p.id = out.size();
            p.doppler_hz = doppler_estimate(p, config);
            out.push_back(std::move(p));
        }
    return out;
}

} // namespace mpct
