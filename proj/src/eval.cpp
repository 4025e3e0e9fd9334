// SPDX-License-Identifier: Apache-2.0

#include "mpct/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpct
{

double Cdf::at(double v) const
{
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    if (it == x.begin())
        return 0.0;
    return p[static_cast<std::size_t>(it - x.begin()) - 1];
}

Cdf empirical_cdf(std::vector<double> values)
{
    Cdf cdf;
    std::erase_if(values, [](double v) { return std::isnan(v); });
    if (values.empty())
        return cdf;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (i + 1 < values.size() && values[i + 1] == values[i])
            continue;
        cdf.x.push_back(values[i]);
        cdf.p.push_back(static_cast<double>(i + 1) / n);
    }
    cdf.p.back() = 1.0;
    return cdf;
}

const char* algorithm_name(Algorithm a)
{
    return a == Algorithm::proposed ? "proposed" : "gmphd";
}

SeedOutcome score_tracks(const Dataset& dataset, std::span<const Track> tracks, const ArtificialOptions& options)
{
    SeedOutcome out;
    const auto& truth = dataset.truth;
    const std::size_t m = dataset.snapshots.size();
    std::vector<bool> valid(m, false);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : truth)
        for (double d : t.delays_s)
        {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    lo -= options.roi_margin_s;
    hi += options.roi_margin_s;
    for (std::size_t n = 0; n < m; ++n)
    {
        bool ok = true;
        for (std::size_t a = 0; a < truth.size() && ok; ++a)
        {
            if (!truth[a].active(n))
            {
                ok = false;
                break;
            }
            for (std::size_t b = a + 1; b < truth.size(); ++b)
                if (truth[b].active(n) &&
                    std::abs(truth[a].delay_at(n) - truth[b].delay_at(n)) < options.min_separation_s - 1e-15)
                    ok = false;
        }
        valid[n] = ok;
    }

    for (const auto& t : tracks)
    {
        std::vector<std::size_t> states;
        for (std::size_t i = 0; i < t.states.size(); ++i)
        {
            const std::size_t n = t.start_snapshot + i;
            if (n < m && valid[n] && t.states[i].delay_s >= lo && t.states[i].delay_s <= hi)
                states.push_back(i);
        }
        if (states.size() < options.min_valid_states)
            continue;
        ++out.num_tracks;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_truth = 0;
        for (std::size_t l = 0; l < truth.size(); ++l)
        {
            double err = 0.0;
            for (auto i : states)
                err += std::abs(t.states[i].delay_s - truth[l].delay_at(t.start_snapshot + i));
            err /= static_cast<double>(states.size());
            if (err < best)
            {
                best = err;
                best_truth = l;
            }
        }
        if (best <= options.match_radius_s)
        {
            ++out.matched;
            for (auto i : states)
                out.abs_error_sum_s += std::abs(t.states[i].delay_s - truth[best_truth].delay_at(t.start_snapshot + i));
            out.error_states += states.size();
        }
    }
    return out;
}

SeedOutcome evaluate_seed(double mpc_power_db, bool windowing, Algorithm algorithm, std::uint64_t seed,
                          const SounderConfig& config, const ArtificialOptions& options)
{
    TwoTrackOptions scen;
    scen.pulse = options.pulse;
    scen.seed = seed;
    const Dataset ds = two_track_scenario(mpc_power_db, options.noise_db, options.gap_start_s, options.gap_stop_s,
                                          options.num_snapshots, config, scen);
    const PulseModel pulse = options.pulse ? *options.pulse : sounder_pulse(ds.config);
    DetectConfig dc = options.detect;
    dc.windowing = windowing;
    const Detector detector(pulse, ds.config.seq_len, dc);
    const auto detections = detect_all(ds.snapshots, detector, 1);
    const auto tracks = algorithm == Algorithm::proposed ? track_sets(detections, ds.config, options.gate, options.tol)
                                                         : gmphd_track(detections, options.gmphd, ds.config);
    return score_tracks(ds, tracks, options);
}

std::vector<EvalCurvePoint> evaluate_artificial(std::span<const double> power_sweep_db, std::span<const bool> windowing,
                                                std::span<const Algorithm> algorithms,
                                                std::span<const std::uint64_t> seeds, const SounderConfig& config,
                                                const ArtificialOptions& options)
{
    if (power_sweep_db.empty())
        throw std::invalid_argument("evaluate_artificial: empty power sweep");
    std::vector<EvalCurvePoint> out;
    for (double p : power_sweep_db)
        for (bool w : windowing)
            for (auto alg : algorithms)
            {
                EvalCurvePoint pt;
                pt.mpc_power_db = p;
                pt.windowing = w;
                pt.algorithm = alg;
                pt.min_tracks = std::numeric_limits<std::size_t>::max();
                double tracks = 0.0;
                double err = 0.0;
                std::size_t err_states = 0;
                for (auto seed : seeds)
                {
                    const auto r = evaluate_seed(p, w, alg, seed, config, options);
                    tracks += static_cast<double>(r.num_tracks);
                    err += r.abs_error_sum_s;
                    err_states += r.error_states;
                    pt.seeds_with_two += r.num_tracks == 2 ? 1 : 0;
                    pt.min_tracks = std::min(pt.min_tracks, r.num_tracks);
                    pt.max_tracks = std::max(pt.max_tracks, r.num_tracks);
                }
                pt.seeds = seeds.size();
                if (seeds.empty())
                    pt.min_tracks = 0;
                pt.num_tracks_detected = seeds.empty() ? 0.0 : tracks / static_cast<double>(seeds.size());
                pt.mean_delay_error_s = err_states ? err / static_cast<double>(err_states) : 0.0;
                out.push_back(pt);
            }
    return out;
}

std::vector<double> GainSeries::loss_db(const std::string& algorithm) const
{
    const auto& tracked = tracked_db.at(algorithm);
    std::vector<double> out(original_db.size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = original_db[n] - tracked[n];
    return out;
}

std::vector<double> GainSeries::detection_loss_db() const
{
    std::vector<double> out(original_db.size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = original_db[n] - detected_db[n];
    return out;
}

std::vector<double> tracked_power(std::span<const Track> tracks, std::size_t num_snapshots, double reference_energy)
{
    std::vector<double> p(num_snapshots, 0.0);
    for (const auto& t : tracks)
        for (std::size_t i = 0; i < t.states.size(); ++i)
        {
            const std::size_t n = t.start_snapshot + i;
            if (n < num_snapshots)
                p[n] += db_to_power(t.states[i].gain_db) * reference_energy;
        }
    return p;
}

GainSeries channel_gain_series(const Dataset& dataset, const Detector& detector,
                               std::span<const std::vector<DetectedMpc>> detections,
                               const std::map<std::string, std::vector<Track>>& tracks_by_algorithm)
{
    const std::size_t m = dataset.snapshots.size();
    if (detections.size() != m)
        throw std::invalid_argument("channel_gain_series: detections not aligned with snapshots");
    const double e_ref = detector.reference().energy();
    GainSeries g;
    g.original_db.resize(m);
    g.detected_db.resize(m);
    for (std::size_t n = 0; n < m; ++n)
    {
        const auto& snap = dataset.snapshots[n];
        // windowed energy with the estimated noise contribution removed
        const double noise =
            db_to_power(estimate_noise_floor(snap, detector.config()) - detector.config().noise_margin_db);
        const double e = energy(detector.windowed(snap.samples)) - static_cast<double>(snap.samples.size()) * noise;
        g.original_db[n] = power_to_db(e);
        double d = 0.0;
        for (const auto& mpc : detections[n])
            d += std::norm(mpc.gain) * e_ref;
        g.detected_db[n] = power_to_db(d);
    }
    for (const auto& [name, tracks] : tracks_by_algorithm)
    {
        const auto p = tracked_power(tracks, m, e_ref);
        auto& out = g.tracked_db[name];
        out.resize(m);
        for (std::size_t n = 0; n < m; ++n)
            out[n] = power_to_db(p[n]);
    }
    return g;
}

double loss_mse(const GainSeries& series, const std::string& algorithm)
{
    const auto tracked = series.loss_db(algorithm);
    const auto detected = series.detection_loss_db();
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < tracked.size(); ++i)
    {
        const double d = tracked[i] - detected[i];
        if (std::isfinite(d))
        {
            s += d * d;
            ++n;
        }
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

namespace
{

double stddev(std::span<const TrackState> states)
{
    double mean = 0.0;
    for (const auto& s : states)
        mean += s.gain_db;
    mean /= static_cast<double>(states.size());
    double v = 0.0;
    for (const auto& s : states)
        v += (s.gain_db - mean) * (s.gain_db - mean);
    return std::sqrt(v / static_cast<double>(states.size()));
}

double mean_finite(std::span<const double> v)
{
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v)
        if (std::isfinite(x))
        {
            s += x;
            ++n;
        }
    return n ? s / static_cast<double>(n) : 0.0;
}

} // namespace

PowerStdCdf power_std_cdf(std::span<const Track> tracks, std::size_t snapshots_per_set)
{
    std::vector<double> all;
    std::vector<double> full;
    for (const auto& t : tracks)
    {
        if (t.states.empty())
            continue;
        const double s = stddev(t.states);
        all.push_back(s);
        if (t.lifetime() == snapshots_per_set)
            full.push_back(s);
    }
    return {empirical_cdf(std::move(all)), empirical_cdf(std::move(full))};
}

Cdf mpc_count_cdf(std::span<const std::vector<SetSummary>> summaries_per_set)
{
    std::vector<double> counts;
    for (const auto& s : summaries_per_set)
        counts.push_back(static_cast<double>(s.size()));
    return empirical_cdf(std::move(counts));
}

BirthDeathCdf birth_death_rate(std::span<const std::vector<SetSummary>> summaries_per_set,
                               std::span<const std::vector<Association>> associations,
                               std::span<const double> displacement_m)
{
    const std::size_t boundaries = summaries_per_set.empty() ? 0 : summaries_per_set.size() - 1;
    if (associations.size() < boundaries || displacement_m.size() < boundaries)
        throw std::invalid_argument("birth_death_rate: need one association list and displacement per boundary");
    std::vector<double> births;
    std::vector<double> deaths;
    for (std::size_t i = 0; i < boundaries; ++i)
    {
        if (!(displacement_m[i] > 0.0))
            throw std::invalid_argument("birth_death_rate: displacement must be positive");
        std::vector<bool> has_source(summaries_per_set[i].size(), false);
        std::vector<bool> has_target(summaries_per_set[i + 1].size(), false);
        for (const auto& a : associations[i])
        {
            has_source.at(a.from) = true;
            has_target.at(a.to) = true;
        }
        const auto died = static_cast<double>(std::count(has_source.begin(), has_source.end(), false));
        const auto born = static_cast<double>(std::count(has_target.begin(), has_target.end(), false));
        births.push_back(born / displacement_m[i]);
        deaths.push_back(died / displacement_m[i]);
    }
    return {empirical_cdf(std::move(births)), empirical_cdf(std::move(deaths))};
}

double combine_losses(double short_term_loss_db, double non_full_fraction, double unassociated_fraction)
{
    return short_term_loss_db - power_to_db(1.0 - non_full_fraction) - power_to_db(1.0 - unassociated_fraction);
}

PowerLossLedger power_loss_ledger(const GainSeries& series, std::span<const Track> proposed_tracks,
                                  std::span<const std::vector<SetSummary>> summaries_per_set,
                                  std::span<const std::vector<Association>> associations,
                                  std::size_t snapshots_per_set)
{
    PowerLossLedger L;
    L.detection_loss_db = mean_finite(series.detection_loss_db());
    L.short_term_loss_db =
        series.tracked_db.count("proposed") ? mean_finite(series.loss_db("proposed")) : L.detection_loss_db;

    double all = 0.0;
    double partial = 0.0;
    for (const auto& t : proposed_tracks)
        for (const auto& s : t.states)
        {
            const double p = db_to_power(s.gain_db);
            all += p;
            if (t.lifetime() != snapshots_per_set)
                partial += p;
        }
    L.non_full_lifetime_fraction = all > 0.0 ? partial / all : 0.0;

    double full = 0.0;
    double lone = 0.0;
    for (std::size_t i = 0; i < summaries_per_set.size(); ++i)
    {
        std::vector<bool> linked(summaries_per_set[i].size(), false);
        if (i < associations.size())
            for (const auto& a : associations[i])
                linked.at(a.from) = true;
        if (i > 0 && i - 1 < associations.size())
            for (const auto& a : associations[i - 1])
                linked.at(a.to) = true;
        for (std::size_t k = 0; k < summaries_per_set[i].size(); ++k)
        {
            const auto& s = summaries_per_set[i][k];
            const double p = s.power * static_cast<double>(s.lifetime);
            full += p;
            if (!linked[k])
                lone += p;
        }
    }
    L.long_term_unassociated_fraction = full > 0.0 ? lone / full : 0.0;
    L.total_db = combine_losses(L.short_term_loss_db, L.non_full_lifetime_fraction, L.long_term_unassociated_fraction);
    return L;
}

} // namespace mpct
