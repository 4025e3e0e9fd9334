// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed
// below. The exit status is 0 unless the run itself breaks; failed criteria
// are reported, not hidden.

#include "mpct/detect.hpp"
#include "mpct/eval.hpp"
#include "mpct/gmphd.hpp"
#include "mpct/synth.hpp"
#include "mpct/track_long.hpp"
#include "mpct/track_short.hpp"
#include "support/grid_oracle.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mpct;

namespace
{

// artificial channel
constexpr double kNoiseDb = -140.0;
constexpr double kTopPowerDb = -116.0;
constexpr std::size_t kSeparationSeeds = 100;
constexpr double kSeparationMaxErrorS = 0.05e-9;
constexpr double kSeparationMaxRuntimeS = 120.0;
constexpr std::size_t kSweepSeeds = 20;
constexpr std::size_t kBaselineSweepSeeds = 10;
constexpr double kMaintainMaxMeanTracks = 2.5; ///< "maintains two tracks": mean count rounds to 2
constexpr double kRequiredThresholdDb = -124.0;
constexpr double kThresholdMaxErrorS = 0.1e-9;
constexpr double kAblationMinTracks = 3.0;

// complexity
constexpr double kSpeedupMin = 2.0;
constexpr double kProposedDoublingMax = 2.5;

// power loss ledger
constexpr double kDetectionLossDb = 2.0;
constexpr double kDetectionLossTolDb = 0.2;
constexpr double kLedgerTotalDb = 2.4;
constexpr double kLedgerTotalTolDb = 0.3;
constexpr double kExclusionFraction = 0.05;
constexpr double kLedgerNoiseMarginDb = 10.0;

// Doppler and long-term
constexpr double kDopplerRelTol = 1e-6;
constexpr double kFinestTierS = 0.1e-9;
constexpr double kGeometryDopplerRelTol = 0.01;

// oracles
constexpr int kGridOracleCases = 200;
constexpr double kGainRelTol = 1e-6;
constexpr double kKalmanTol = 1e-9;
constexpr double kMissProbability = 0.05;
constexpr double kMissScaleRelTol = 1e-12;

int passed = 0;
int failed = 0;

void report(const char* id, bool ok, const std::string& detail)
{
    std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    (ok ? passed : failed) += 1;
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::uint64_t> seed_range(std::size_t n)
{
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = i + 1;
    return s;
}

EvalCurvePoint sweep_point(double power_db, bool windowing, Algorithm alg, std::size_t seeds)
{
    const SounderConfig cfg;
    ArtificialOptions opt;
    opt.noise_db = kNoiseDb;
    const double p[] = {power_db};
    const bool w[] = {windowing};
    const Algorithm a[] = {alg};
    const auto s = seed_range(seeds);
    return evaluate_artificial(p, w, a, s, cfg, opt).front();
}

bool maintains(const EvalCurvePoint& p)
{
    return p.num_tracks_detected <= kMaintainMaxMeanTracks;
}

// Lowest sweep power down to which every point maintains two tracks.
std::optional<double> split_threshold(const std::vector<EvalCurvePoint>& sweep)
{
    std::optional<double> t;
    for (const auto& p : sweep) // descending power
    {
        if (!maintains(p))
            break;
        t = p.mpc_power_db;
    }
    return t;
}

const EvalCurvePoint& at_power(const std::vector<EvalCurvePoint>& sweep, double p)
{
    return *std::find_if(sweep.begin(), sweep.end(), [p](const auto& x) { return x.mpc_power_db == p; });
}

std::string threshold_text(const std::optional<double>& t)
{
    return t ? fmt("%.0f dB", *t) : std::string("none (fails at the top of the sweep)");
}

void print_sweep(const char* name, const std::vector<EvalCurvePoint>& sweep)
{
    std::printf("   %s:", name);
    for (const auto& p : sweep)
        std::printf(" %.0f:%.2f/%.3fns", p.mpc_power_db, p.num_tracks_detected, p.mean_delay_error_s * 1e9);
    std::printf("\n");
}

// ---------------------------------------------------------------------------

void ac1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = sweep_point(kTopPowerDb, true, Algorithm::proposed, kSeparationSeeds);
    const double runtime = seconds_since(t0);
    const bool ok = p.seeds_with_two == p.seeds && p.mean_delay_error_s <= kSeparationMaxErrorS &&
                    runtime <= kSeparationMaxRuntimeS;
    report("AC1", ok,
           fmt("%zu/%zu seeds with exactly 2 tracks (range %zu..%zu), mean delay error %.4f ns (<= %.2f), "
               "runtime %.1f s (<= %.0f)",
               p.seeds_with_two, p.seeds, p.min_tracks, p.max_tracks, p.mean_delay_error_s * 1e9,
               kSeparationMaxErrorS * 1e9, runtime, kSeparationMaxRuntimeS));
}

struct Sweeps
{
    std::vector<EvalCurvePoint> on;
    std::vector<EvalCurvePoint> off;
    std::vector<EvalCurvePoint> gmphd;
};

Sweeps run_sweeps()
{
    Sweeps s;
    for (double p = kTopPowerDb; p >= -132.0; p -= 2.0)
    {
        s.on.push_back(sweep_point(p, true, Algorithm::proposed, kSweepSeeds));
        s.off.push_back(sweep_point(p, false, Algorithm::proposed, kSweepSeeds));
        s.gmphd.push_back(sweep_point(p, true, Algorithm::gmphd, kBaselineSweepSeeds));
    }
    std::printf("   sweep power:mean tracks/mean delay error\n");
    print_sweep("proposed, windowing on ", s.on);
    print_sweep("proposed, windowing off", s.off);
    print_sweep("gmphd, windowing on    ", s.gmphd);
    return s;
}

void ac2(const Sweeps& s)
{
    const auto t = split_threshold(s.on);
    bool ok = t && *t <= kRequiredThresholdDb;
    std::string detail = "threshold " + threshold_text(t) + fmt(" (required <= %.0f dB)", kRequiredThresholdDb);
    if (t)
    {
        const double err = at_power(s.on, *t).mean_delay_error_s;
        ok = ok && err <= kThresholdMaxErrorS;
        detail += fmt(", error there %.4f ns (<= %.2f)", err * 1e9, kThresholdMaxErrorS * 1e9);
    }
    bool splits = true;
    for (const auto& p : s.on)
        if (!t || p.mpc_power_db < *t)
            splits = splits && p.num_tracks_detected > 2.0;
    ok = ok && splits;
    detail += splits ? ", splitting below it" : ", no splitting below it";
    report("AC2", ok, detail);
}

void ac3(const Sweeps& s)
{
    std::optional<double> hit;
    double max_off_where_on_holds = 0.0;
    for (std::size_t i = 0; i < s.on.size(); ++i)
        if (maintains(s.on[i]))
        {
            max_off_where_on_holds = std::max(max_off_where_on_holds, s.off[i].num_tracks_detected);
            if (!hit && s.off[i].num_tracks_detected >= kAblationMinTracks)
                hit = s.on[i].mpc_power_db;
        }
    report("AC3", hit.has_value(),
           hit ? fmt("windowing off gives >= %.0f mean tracks at %.0f dB while windowing on holds 2", kAblationMinTracks,
                     *hit)
               : fmt("no sweep point with >= %.0f tracks without windowing where windowing holds 2 (max %.2f)",
                     kAblationMinTracks, max_off_where_on_holds));
}

void ac4(const Sweeps& s)
{
    const auto tp = split_threshold(s.on);
    const auto tg = split_threshold(s.gmphd);
    const double inf = std::numeric_limits<double>::infinity();
    const bool order = tp.value_or(inf) <= tg.value_or(inf) && tp.has_value();
    const double floor = std::max(tp.value_or(inf), tg.value_or(inf));
    std::size_t compared = 0;
    bool error_order = true;
    for (std::size_t i = 0; i < s.on.size(); ++i)
        if (s.on[i].mpc_power_db >= floor)
        {
            ++compared;
            error_order = error_order && s.on[i].mean_delay_error_s <= s.gmphd[i].mean_delay_error_s;
        }
    std::string detail = "proposed threshold " + threshold_text(tp) + ", gmphd threshold " + threshold_text(tg);
    if (compared == 0)
        detail += "; no power where both hold two tracks, error ordering not demonstrable";
    else
        detail += fmt("; error ordering %s at %zu powers", error_order ? "holds" : "violated", compared);
    detail += fmt("; at %.0f dB errors proposed %.4f ns, gmphd %.4f ns", kTopPowerDb,
                  s.on.front().mean_delay_error_s * 1e9, s.gmphd.front().mean_delay_error_s * 1e9);
    report("AC4", order && compared > 0 && error_order, detail);
}

// ---------------------------------------------------------------------------

using Detections = std::vector<std::vector<DetectedMpc>>;

// About ten linear paths with small jitter and a little clutter.
Detections busy_scene(std::size_t snapshots, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.02e-9);
    Detections d(snapshots);
    for (int k = 0; k < 10; ++k)
    {
        const double d0 = (40.0 + 25.0 * k + 5.0 * unit(rng)) * 1e-9;
        const double slope = (unit(rng) - 0.5) * 0.2e-9;
        const double g = db_to_amplitude(-100.0 - 20.0 * unit(rng));
        for (std::size_t n = 0; n < snapshots; ++n)
            d[n].push_back({g, d0 + slope * static_cast<double>(n) + jitter(rng), 0.0, n});
    }
    for (std::size_t n = 0; n < snapshots; ++n)
        if (unit(rng) < 0.5)
            d[n].push_back({db_to_amplitude(-130.0), 300e-9 * unit(rng), 0.0, n});
    for (auto& snap : d)
        std::sort(snap.begin(), snap.end(), [](const auto& a, const auto& b) { return std::abs(a.gain) > std::abs(b.gain); });
    return d;
}

double best_time(const std::function<void()>& f, int reps)
{
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r)
    {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

void ac5()
{
    auto times = [](std::size_t snapshots) {
        SounderConfig cfg;
        cfg.snapshots_per_set = snapshots;
        cfg.set_period_s = static_cast<double>(snapshots) * cfg.snapshot_period_s;
        const auto d = busy_scene(snapshots, 5);
        std::size_t sink = 0;
        const double tp = best_time([&] { sink += track_sets(d, cfg, {}, {}).size(); }, 7);
        const double tg = best_time([&] { sink += gmphd_track(d, {}, cfg).size(); }, 7);
        return std::pair{tp + 0.0 * static_cast<double>(sink), tg};
    };
    const auto [p1, g1] = times(100);
    const auto [p2, g2] = times(200);
    const double speedup = g1 / p1;
    const double rp = p2 / p1;
    const double rg = g2 / g1;
    const bool ok = speedup >= kSpeedupMin && rp <= kProposedDoublingMax && rg > rp;
    report("AC5", ok,
           fmt("100 snapshots: proposed %.3f ms, gmphd %.3f ms (ratio %.1f, >= %.0f); doubling: proposed x%.2f "
               "(<= %.1f), gmphd x%.2f (must exceed proposed)",
               p1 * 1e3, g1 * 1e3, speedup, kSpeedupMin, rp, kProposedDoublingMax, rg));
}

// ---------------------------------------------------------------------------

GroundTruthMpc static_mpc(std::size_t birth, std::size_t count, double delay_s, double power_db, double phase)
{
    GroundTruthMpc t;
    t.birth = birth;
    t.delays_s.assign(count, delay_s);
    t.gains.assign(count, std::polar(db_to_amplitude(power_db), phase));
    return t;
}

struct LedgerRun
{
    PowerLossLedger ledger;
    GainSeries series;
};

LedgerRun exclusion_run()
{
    SounderConfig cfg;
    cfg.num_sets = 6;
    const std::size_t s = cfg.snapshots_per_set;
    const double p = -115.0;
    // relative powers giving 5 % at both later stages: partial paths carry pc over
    // half of each set, the every-third-set path pd over whole sets
    const double f = kExclusionFraction;
    const double pd = 36.0 * f / (6.0 * (1.0 - f));
    const double pc = f * (36.0 + 6.0 * pd) / (9.0 * (1.0 - f));
    std::vector<GroundTruthMpc> truth;
    truth.push_back(static_mpc(0, cfg.num_snapshots(), 100.3e-9, p, 0.3));
    truth.push_back(static_mpc(0, cfg.num_snapshots(), 150.6e-9, p, 1.9));
    for (std::size_t k = 0; k < cfg.num_sets; ++k)
    {
        truth.push_back(static_mpc(k * s, s / 2, 200.2e-9, p + power_to_db(pc), -1.1));
        if (k % 3 == 0)
            truth.push_back(static_mpc(k * s, s, 250.8e-9, p + power_to_db(pd), 2.4));
    }
    const PulseModel pulse = sounder_pulse(cfg);
    Dataset ds = render_dataset(cfg, truth, pulse, kNoiseDb, 77);

    // diffuse power of 0.585 times the mean path power, spread in front of the
    // noise tail at about half the noise power per bin
    double mean_power = 0.0;
    for (const auto& t : truth)
        mean_power += std::norm(t.gains[0]) * static_cast<double>(t.delays_s.size());
    mean_power /= static_cast<double>(cfg.num_snapshots());
    const double bins = 740.0;
    const double diffuse = (db_to_power(kDetectionLossDb) - 1.0) * mean_power;
    add_diffuse_floor(ds, {20e-9, 20e-9 + bins * cfg.delay_bin_s, power_to_db(diffuse / bins)}, pulse, 78);

    // a wider margin keeps the sub-noise floor out of the detections
    DetectConfig dc;
    dc.noise_margin_db = kLedgerNoiseMarginDb;
    const Detector det(pulse, cfg.seq_len, dc);
    const auto d = detect_all(ds.snapshots, det, 1);
    const auto tracks = track_sets(d, cfg, {}, {});
    std::vector<std::vector<SetSummary>> sums;
    for (std::size_t k = 0; k < cfg.num_sets; ++k)
        sums.push_back(summarize_set(tracks, k, cfg));
    std::vector<std::vector<Association>> links;
    for (std::size_t k = 0; k + 1 < cfg.num_sets; ++k)
        links.push_back(link_sets(sums[k], sums[k + 1], {}, cfg));
    LedgerRun r;
    r.series = channel_gain_series(ds, det, d, {{"proposed", tracks}});
    r.ledger = power_loss_ledger(r.series, tracks, sums, links, s);
    return r;
}

GainSeries dropout_run()
{
    SounderConfig cfg;
    cfg.snapshots_per_set = 30;
    cfg.set_period_s = 30 * cfg.snapshot_period_s;
    std::vector<GroundTruthMpc> truth;
    truth.push_back(static_mpc(0, 30, 100.4e-9, -100.0, 0.2));
    // second path vanishes for one snapshot
    truth.push_back(static_mpc(0, 15, 140.7e-9, -100.0, 1.2));
    truth.push_back(static_mpc(16, 14, 140.7e-9, -100.0, 1.2));
    const PulseModel pulse = sounder_pulse(cfg);
    const Dataset ds = render_dataset(cfg, truth, pulse, kNoiseDb, 91);
    const Detector det(pulse, cfg.seq_len, {});
    const auto d = detect_all(ds.snapshots, det, 1);
    return channel_gain_series(ds, det, d,
                               {{"proposed", track_sets(d, cfg, {}, {})}, {"gmphd", gmphd_track(d, {}, cfg)}});
}

double min_finite(const std::vector<double>& v)
{
    double m = std::numeric_limits<double>::infinity();
    for (double x : v)
        if (!std::isnan(x))
            m = std::min(m, x);
    return m;
}

void ac6()
{
    const auto run = exclusion_run();
    const auto& L = run.ledger;
    const auto drop = dropout_run();
    const double prop_min = min_finite(run.series.loss_db("proposed"));
    const double prop_drop_min = min_finite(drop.loss_db("proposed"));
    const double gm_min = min_finite(drop.loss_db("gmphd"));
    const bool ok = std::abs(L.detection_loss_db - kDetectionLossDb) <= kDetectionLossTolDb &&
                    std::abs(L.total_db - kLedgerTotalDb) <= kLedgerTotalTolDb && prop_min >= 0.0 && gm_min < 0.0;
    report("AC6", ok,
           fmt("detection loss %.2f dB (%.1f +- %.1f), short-term %.2f dB, fractions %.3f / %.3f, total %.2f dB "
               "(%.1f +- %.1f); min per-snapshot loss proposed %.2f dB (>= 0); dropout run: gmphd %.2f dB (< 0), "
               "proposed %.2f dB",
               L.detection_loss_db, kDetectionLossDb, kDetectionLossTolDb, L.short_term_loss_db,
               L.non_full_lifetime_fraction, L.long_term_unassociated_fraction, L.total_db, kLedgerTotalDb,
               kLedgerTotalTolDb, prop_min, gm_min, prop_drop_min));
}

// ---------------------------------------------------------------------------

Track linear_track(const SounderConfig& cfg, std::size_t start, double tau0, double m, double gain_db)
{
    Track t;
    t.start_snapshot = start;
    for (std::size_t i = 0; i < cfg.snapshots_per_set; ++i)
    {
        t.states.push_back({gain_db, tau0 + m * cfg.timestamp(start + i)});
        t.members.push_back(0);
    }
    t.doppler_hz = doppler_estimate(t, cfg);
    return t;
}

// Doppler from the carrier phase rotation of the truth gains, independent of delays.
double phase_doppler(const GroundTruthMpc& g, const SounderConfig& cfg)
{
    const cplx r = g.gains[1] / g.gains[0];
    return std::arg(r) / (2.0 * std::numbers::pi * (cfg.timestamp(g.birth + 1) - cfg.timestamp(g.birth)));
}

void ac7()
{
    SounderConfig cfg;
    double worst = 0.0;
    for (double m : {1e-7, -1e-7, 1e-6, -1e-6})
    {
        const auto t = linear_track(cfg, 0, 120e-9, m, -90.0);
        worst = std::max(worst, std::abs(t.doppler_hz + m * cfg.carrier_hz) / std::abs(m * cfg.carrier_hz));
    }
    const bool doppler_ok = worst <= kDopplerRelTol;

    // linear motion across sets; slopes within the 1 ns set-to-set delay gate
    cfg.num_sets = 6;
    const std::vector<double> slopes{1e-7, -1e-7, 5e-8, -5e-8, 2e-8, 0.0};
    std::vector<Track> tracks;
    for (std::size_t k = 0; k < cfg.num_sets; ++k)
        for (std::size_t p = 0; p < slopes.size(); ++p)
            tracks.push_back(linear_track(cfg, k * cfg.snapshots_per_set, (60.0 + 6.0 * static_cast<double>(p)) * 1e-9,
                                          slopes[p], -95.0 - static_cast<double>(p)));
    std::size_t expected = 0;
    std::size_t finest = 0;
    for (std::size_t k = 0; k + 1 < cfg.num_sets; ++k)
    {
        const auto a = summarize_set(tracks, k, cfg);
        const auto b = summarize_set(tracks, k + 1, cfg);
        expected += slopes.size();
        for (const auto& l : link_sets(a, b, {}, cfg))
            if (l.from == l.to && l.tier_s <= kFinestTierS)
                ++finest;
    }
    const bool link_ok = finest == expected;

    // sign: receding and approaching receivers against the carrier-phase Doppler
    bool sign_ok = true;
    double geo_worst = 0.0;
    for (double v : {12.0, -12.0})
    {
        TxRxKinematics k;
        k.tx.position = {0.0, 0.0};
        k.rx.position = {30.0, 0.0};
        k.rx.velocity = {v, 0.0};
        std::vector<ScattererSpec> none;
        SounderConfig one;
        const Dataset ds = geometry_scenario(none, k, one, 3);
        const auto& los = ds.truth.front();
        Track t;
        for (std::size_t i = 0; i < one.snapshots_per_set; ++i)
            t.states.push_back({-90.0, los.delay_at(los.birth + i)});
        const double nu = doppler_estimate(t, one);
        const double ref = phase_doppler(los, one);
        sign_ok = sign_ok && (v > 0 ? nu < 0.0 : nu > 0.0) && std::signbit(nu) == std::signbit(ref);
        geo_worst = std::max(geo_worst, std::abs(nu - ref) / std::abs(ref));
    }
    sign_ok = sign_ok && geo_worst <= kGeometryDopplerRelTol;

    report("AC7", doppler_ok && link_ok && sign_ok,
           fmt("Doppler worst relative error %.2e (<= %.0e); %zu/%zu continuations at tier <= %.1f ns; geometry sign "
               "%s, delay vs carrier-phase Doppler within %.2e (<= %.0e)",
               worst, kDopplerRelTol, finest, expected, kFinestTierS * 1e9, sign_ok ? "consistent" : "WRONG",
               geo_worst, kGeometryDopplerRelTol));
}

// ---------------------------------------------------------------------------

void ac8()
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> count(1, 3);
    std::uniform_real_distribution<double> mag(0.2, 1.0);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    const std::size_t u = 64;
    const std::size_t z = 5;
    int agree = 0;
    double worst_gain = 0.0;
    for (int trial = 0; trial < kGridOracleCases; ++trial)
    {
        const auto pulse = mpct::testing::compact_pulse(rng, z);
        DetectConfig cfg;
        cfg.windowing = false;
        cfg.subbin_refine = false;
        cfg.tail_fraction = 0.5;
        cfg.block_width_s = static_cast<double>(z) * pulse.delay_bin_s;
        const std::size_t k = count(rng);
        std::vector<std::size_t> delays;
        std::uniform_int_distribution<std::size_t> pos(z / 2, u / 2 - z / 2 - 1);
        while (delays.size() < k)
        {
            const std::size_t d = pos(rng);
            bool ok = true;
            for (auto e : delays)
                ok = ok && (d > e ? d - e : e - d) >= z;
            if (ok)
                delays.push_back(d);
        }
        std::vector<cplx> h(u);
        for (auto d : delays)
        {
            const cplx g = std::polar(mag(rng), ph(rng));
            const auto atom = pulse.place(u, static_cast<double>(d));
            for (std::size_t i = 0; i < u; ++i)
                h[i] += g * atom[i];
        }
        const auto oracle = mpct::testing::exhaustive_oracle(h, pulse, 3);
        auto found = detect_mpcs(CirSnapshot{h, 0, 0.0}, pulse, cfg);
        std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.delay_s < b.delay_s; });
        bool ok = found.size() == oracle.delays.size();
        for (std::size_t i = 0; ok && i < found.size(); ++i)
        {
            ok = std::llround(found[i].delay_s / pulse.delay_bin_s) == static_cast<long long>(oracle.delays[i]) &&
                 std::abs(found[i].delay_s / pulse.delay_bin_s - static_cast<double>(oracle.delays[i])) < 1e-9;
            const double rel = std::abs(found[i].gain - oracle.gains[i]) / std::abs(oracle.gains[i]);
            worst_gain = std::max(worst_gain, rel);
            ok = ok && rel <= kGainRelTol;
        }
        agree += ok ? 1 : 0;
    }
    report("AC8", agree == kGridOracleCases,
           fmt("%d/%d cases match the exhaustive oracle, worst gain error %.1e (<= %.0e)", agree, kGridOracleCases,
               worst_gain, kGainRelTol));
}

// ---------------------------------------------------------------------------

void ac9()
{
    SounderConfig cfg;
    cfg.snapshots_per_set = 40;
    cfg.set_period_s = 40 * cfg.snapshot_period_s;
    GmphdParams p;
    p.p_detect = 1.0;
    p.clutter_intensity = 0.0;

    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, p.meas_noise_std);
    Detections d(cfg.snapshots_per_set);
    std::vector<double> z;
    for (std::size_t n = 0; n < d.size(); ++n)
    {
        const double dist = 30.0 + 4.0 * cfg.timestamp(n) + noise(rng);
        z.push_back(dist);
        d[n].push_back({db_to_amplitude(-100.0), dist / kSpeedOfLight, 0.0, n});
    }
    const auto tracks = gmphd_track(d, p, cfg);

    // scalar-form Kalman filter: born from the first scan, updated from the second on
    double x0 = z[0];
    double x1 = 0.0;
    double p00 = p.birth_pos_std * p.birth_pos_std;
    double p01 = 0.0;
    double p11 = p.birth_vel_std * p.birth_vel_std;
    const double r = p.meas_noise_std * p.meas_noise_std;
    const double q = p.process_noise_std * p.process_noise_std;
    std::vector<double> expected;
    for (std::size_t n = 1; n < d.size(); ++n)
    {
        if (n > 1)
        {
            const double dt = cfg.timestamp(n) - cfg.timestamp(n - 1);
            x0 += dt * x1;
            const double n00 = p00 + 2.0 * dt * p01 + dt * dt * p11 + q * std::pow(dt, 4) / 4.0;
            const double n01 = p01 + dt * p11 + q * std::pow(dt, 3) / 2.0;
            const double n11 = p11 + q * dt * dt;
            p00 = n00;
            p01 = n01;
            p11 = n11;
        }
        const double s = p00 + r;
        const double k0 = p00 / s;
        const double k1 = p01 / s;
        const double innov = z[n] - x0;
        x0 += k0 * innov;
        x1 += k1 * innov;
        const double m00 = p00 - k0 * p00;
        const double m01 = p01 - k0 * p01;
        const double m11 = p11 - k1 * p01;
        p00 = m00;
        p01 = m01;
        p11 = m11;
        expected.push_back(x0);
    }
    double worst = std::numeric_limits<double>::infinity();
    if (tracks.size() == 1 && tracks[0].start_snapshot == 1 && tracks[0].states.size() == expected.size())
    {
        worst = 0.0;
        for (std::size_t i = 0; i < expected.size(); ++i)
            worst = std::max(worst, std::abs(tracks[0].states[i].delay_s * kSpeedOfLight - expected[i]));
    }
    const bool kalman_ok = worst <= kKalmanTol;

    // empty scan and pruning on random mixtures
    GmphdParams dflt;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool scan_ok = true;
    bool prune_ok = true;
    for (int trial = 0; trial < 100; ++trial)
    {
        GaussianMixture m;
        const std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * 20);
        std::set<std::size_t> keep;
        for (std::size_t i = 0; i < n; ++i)
        {
            GaussianComponent c;
            c.weight = std::pow(10.0, -3.0 * unit(rng));
            c.mean = Eigen::Vector2d(10.0 * static_cast<double>(i), 0.0); // far apart: nothing merges
            c.cov = Eigen::Vector2d(1e-4, 1e-2).asDiagonal();
            c.label = i;
            m.components.push_back(c);
            if (c.weight >= dflt.truncation_threshold)
                keep.insert(i);
        }
        const auto e = gmphd_update(m, {}, dflt);
        for (std::size_t i = 0; i < n; ++i)
            scan_ok = scan_ok && std::abs(e.components[i].weight - kMissProbability * m.components[i].weight) <=
                                     kMissScaleRelTol * m.components[i].weight;
        std::set<std::size_t> kept;
        for (const auto& c : prune_merge(m, dflt).components)
            kept.insert(c.label);
        prune_ok = prune_ok && kept == keep;
    }
    report("AC9", kalman_ok && scan_ok && prune_ok,
           fmt("track vs Kalman max deviation %.2e m (<= %.0e); empty-scan scaling by %.2f %s; pruning at w < %.0e %s",
               worst, kKalmanTol, kMissProbability, scan_ok ? "within 1e-12" : "WRONG", dflt.truncation_threshold,
               prune_ok ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------------------

void ac10()
{
    // property cases live in the unit test binary; each runs >= 100 generated cases
    const char* cases = "exclusivity*,*cdf against a counting oracle,*round trip over random*,"
                        "covariances stay symmetric*,*blocking distance*,linear motion is associated*";
    const std::string cmd = std::string(MPCT_TESTS_PATH) + " --test-case=\"" + cases + "\" --no-intro > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    report("AC10", ok,
           "property suites: exclusivity, determinism, gate soundness, gain-offset invariance, tier nesting, CDF "
           "monotonicity, dataset and pulse file round trips (100 cases each)");
}

} // namespace

int main(int argc, char** argv)
{
    // optional arguments select criteria, e.g. "AC6 AC9"
    const std::set<std::string> only(argv + 1, argv + argc);
    auto wanted = [&](const char* id) { return only.empty() || only.contains(id); };
    std::printf("acceptance: artificial channel at %.0f dB noise\n", kNoiseDb);
    if (wanted("AC1"))
        ac1();
    if (wanted("AC2") || wanted("AC3") || wanted("AC4"))
    {
        const auto sweeps = run_sweeps();
        if (wanted("AC2"))
            ac2(sweeps);
        if (wanted("AC3"))
            ac3(sweeps);
        if (wanted("AC4"))
            ac4(sweeps);
    }
    const std::vector<std::pair<const char*, void (*)()>> rest{{"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7},
                                                              {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
    for (const auto& [id, f] : rest)
        if (wanted(id))
            f();
    std::printf("acceptance: %d passed, %d failed\n", passed, failed);
    return 0;
}
