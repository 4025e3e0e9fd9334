// SPDX-License-Identifier: Apache-2.0

#include "mpct/error.hpp"
#include "mpct/synth.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mpct;

namespace
{

constexpr double kC = 299792458.0;

SounderConfig small_config(std::size_t u)
{
    SounderConfig c;
    c.seq_len = u;
    return c;
}

GroundTruthMpc constant_mpc(double delay_s, cplx gain, std::size_t count)
{
    GroundTruthMpc t;
    t.delays_s.assign(count, delay_s);
    t.gains.assign(count, gain);
    return t;
}

// 10 dB width of sin(pi x)/(pi x), by root finding
double sinc_width_10db()
{
    auto f = [](double x) { return std::sin(std::numbers::pi * x) / (std::numbers::pi * x) - std::pow(10.0, -0.5); };
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto r = boost::math::tools::bisect(f, 0.5, 0.99, tol);
    return r.first + r.second;
}

} // namespace

TEST_SUITE("synth")
{
    TEST_CASE("flat band pulse is sinc shaped")
    {
        const auto p = synth_pulse(SounderConfig{}, 0.0);
        CHECK(std::abs(p.samples[p.peak_index]) == doctest::Approx(1.0));
        // integer-bin samples of a sinc vanish, so the first zero is at one bin
        CHECK(std::abs(p.samples[p.peak_index + 1]) < 1e-9);
        CHECK(std::abs(p.samples[p.peak_index - 1]) < 1e-9);
        CHECK(p.width_10db_s == doctest::Approx(sinc_width_10db() * 1e-9).epsilon(2e-3));
        CHECK(p.width_10db_s < p.duration_s());
    }

    TEST_CASE("kaiser shaped pulse matches the shaped spectrum")
    {
        const SounderConfig cfg;
        const std::size_t u = cfg.seq_len;
        const double a = 6.0;
        const auto p = synth_pulse(cfg, a);
        // oracle: the Kaiser weights, peak normalised in the delay domain
        double sum_w = 0.0;
        double sum_w2 = 0.0;
        for (std::size_t k = 0; k < u; ++k)
        {
            const double r = 2.0 * static_cast<double>(k) / static_cast<double>(u - 1) - 1.0;
            const double w = boost::math::cyl_bessel_i(0, std::numbers::pi * a * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                             boost::math::cyl_bessel_i(0, std::numbers::pi * a);
            sum_w += w;
            sum_w2 += w * w;
        }
        const double peak = sum_w / static_cast<double>(u);
        const double parseval = sum_w2 / static_cast<double>(u) / (peak * peak);
        CHECK(p.energy() == doctest::Approx(parseval).epsilon(1e-6));

        // wider main lobe than the flat band
        CHECK(p.width_10db_s > synth_pulse(cfg, 0.0).width_10db_s);
        CHECK(p.width_10db_s < p.duration_s());
    }

    TEST_CASE("kaiser-shaped band has the sounder's 10 dB width scale")
    {
        const auto p = synth_pulse(SounderConfig{}, 6.0 / std::numbers::pi);
        CHECK(p.width_10db_s >= 2.0e-9);
        CHECK(p.width_10db_s <= 3.0e-9);
        CHECK(p.samples.size() <= SounderConfig{}.seq_len);
        const auto flat = sounder_pulse(SounderConfig{});
        CHECK(flat.width_10db_s < p.width_10db_s);
    }

    TEST_CASE("width grows with the shape parameter")
    {
        double prev = 0.0;
        for (double a : {0.0, 0.5, 1.0, 2.0, 3.0, 6.0})
        {
            const double w = synth_pulse(SounderConfig{}, a).width_10db_s;
            CHECK(w > prev);
            prev = w;
        }
    }

    TEST_CASE("pulse file round trip over random pulses")
    {
        std::mt19937_64 rng(21);
        std::uniform_int_distribution<std::size_t> len(1, 300);
        std::normal_distribution<double> g;
        for (int i = 0; i < 100; ++i)
        {
            std::vector<cplx> s(len(rng));
            for (auto& v : s)
                v = {g(rng), g(rng)};
            const auto p = PulseModel::from_samples(s, 1e-9);
            const auto q = parse_pulse(format_pulse(p));
            REQUIRE(q.samples.size() == p.samples.size());
            CHECK(q.peak_index == p.peak_index);
            CHECK(q.delay_bin_s == p.delay_bin_s);
            for (std::size_t k = 0; k < p.samples.size(); ++k)
                CHECK(std::abs(q.samples[k] - p.samples[k]) <= 1e-15);
            CHECK(q.width_10db_s == doctest::Approx(p.width_10db_s));
        }
    }

    TEST_CASE("pulse file errors carry offsets")
    {
        const std::string good = format_pulse(synth_pulse(small_config(64), 2.0));
        const std::string truncated = good.substr(0, good.size() - 30);
        try
        {
            parse_pulse(truncated);
            FAIL("truncated file accepted");
        }
        catch (const ParseError& e)
        {
            CHECK(e.offset() >= truncated.size() - 30);
        }
        CHECK_THROWS_AS(parse_pulse("wpls 2\nz 1\ntb 1e-9\n1 0\n"), ParseError);
        CHECK_THROWS_AS(parse_pulse("wplx 1\n"), ParseError);
        CHECK_THROWS_AS(parse_pulse("wpls 1\nz 2\ntb 1e-9\n1 0\nabc 0\n"), ParseError);
        try
        {
            parse_pulse("wpls 1\nz 1\ntb -1\n1 0\n");
            FAIL("negative delay bin accepted");
        }
        catch (const ParseError& e)
        {
            CHECK(e.offset() == 14);
        }
    }

    TEST_CASE("stored pulse is normalised on load")
    {
        const auto p = parse_pulse("wpls 1\nz 3\ntb 1e-9\n0.5 0\n4 0\n1 1\n");
        CHECK(p.peak_index == 1);
        CHECK(std::abs(p.samples[1]) == doctest::Approx(1.0));
        CHECK(p.samples[0].real() == doctest::Approx(0.125));
    }

    TEST_CASE("noiseless snapshot equals the shifted pulse")
    {
        const auto cfg = small_config(256);
        const auto pulse = synth_pulse(cfg, 2.0);
        const std::vector<GroundTruthMpc> truth{constant_mpc(100e-9, 1.0, 1)};
        const auto s = render_snapshot(truth, 0, pulse, -400.0, cfg, 1);
        const auto ref = pulse.place(256, 100.0);
        for (std::size_t u = 0; u < 256; ++u)
            CHECK(std::abs(s.samples[u] - ref[u]) < 1e-9);
        CHECK(std::abs(s.samples[100]) == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("noise floor power")
    {
        const auto cfg = small_config(4096);
        const auto s = render_snapshot({}, 0, synth_pulse(cfg, 2.0), -140.0, cfg, 7);
        CHECK(power_to_db(energy(s.samples) / 4096.0) == doctest::Approx(-140.0).epsilon(0.5 / 140.0));
    }

    TEST_CASE("peak magnitude and per-bin SNR of separated pulses")
    {
        const SounderConfig cfg;
        const auto pulse = sounder_pulse(cfg);
        const double amp = db_to_amplitude(-116.0);
        const std::vector<GroundTruthMpc> truth{constant_mpc(100e-9, std::polar(amp, 0.3), 1),
                                                constant_mpc(300e-9, std::polar(amp, -1.1), 1)};
        const auto clean = render_snapshot(truth, 0, pulse, -400.0, cfg, 3);
        CHECK(std::abs(clean.samples[100]) == doctest::Approx(amp).epsilon(1e-6));
        CHECK(std::abs(clean.samples[300]) == doctest::Approx(amp).epsilon(1e-6));
        CHECK(power_db(clean.samples[100]) - (-140.0) == doctest::Approx(24.0));
    }

    TEST_CASE("rendering is linear in the gains")
    {
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> delay(5.0, 200.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const auto cfg = small_config(256);
        const auto pulse = synth_pulse(cfg, 2.0);
        for (int i = 0; i < 100; ++i)
        {
            std::vector<GroundTruthMpc> truth;
            for (int l = 0; l < 3; ++l)
                truth.push_back(constant_mpc(delay(rng) * 1e-9, std::polar(unit(rng), 6.0 * unit(rng)), 1));
            const double c = 0.1 + 10.0 * unit(rng);
            auto scaled = truth;
            for (auto& t : scaled)
                t.gains[0] *= c;
            const auto a = render_snapshot(truth, 0, pulse, -400.0, cfg, 1);
            const auto b = render_snapshot(scaled, 0, pulse, -400.0, cfg, 1);
            double err = 0.0;
            double ref = 0.0;
            for (std::size_t u = 0; u < 256; ++u)
            {
                err = std::max(err, std::abs(b.samples[u] - c * a.samples[u]));
                ref = std::max(ref, std::abs(c * a.samples[u]));
            }
            CHECK(err <= 1e-12 * ref);
        }
    }

    TEST_CASE("noise is keyed by seed and snapshot")
    {
        SounderConfig cfg = small_config(128);
        cfg.num_sets = 2;
        const auto pulse = synth_pulse(cfg, 2.0);
        const auto ds = render_dataset(cfg, {}, pulse, -140.0, 5);
        const auto direct = render_snapshot({}, 7, pulse, -140.0, cfg, 5);
        CHECK(ds.snapshots[7].samples == direct.samples);
        CHECK(render_snapshot({}, 7, pulse, -140.0, cfg, 6).samples != direct.samples);
        CHECK_THROWS_AS(render_snapshot(std::vector<GroundTruthMpc>{constant_mpc(200e-9, 1.0, 1)}, 0, pulse, -140.0,
                                        cfg, 1),
                        std::invalid_argument);
    }

    TEST_CASE("dataset timestamps follow the set structure")
    {
        SounderConfig cfg = small_config(64);
        cfg.num_sets = 3;
        const auto ds = render_dataset(cfg, {}, synth_pulse(cfg, 2.0), -140.0, 1);
        REQUIRE(ds.snapshots.size() == 18);
        for (std::size_t n = 1; n < 18; ++n)
        {
            const double dt = ds.snapshots[n].timestamp_s - ds.snapshots[n - 1].timestamp_s;
            if (n % 6 == 0)
                CHECK(dt == doctest::Approx(10e-3 - 5 * 0.717e-3));
            else
                CHECK(dt == doctest::Approx(0.717e-3));
        }
    }

    TEST_CASE("two-track scenario truth")
    {
        const SounderConfig cfg;
        TwoTrackOptions opt;
        opt.seed = 4;
        const auto ds = two_track_scenario(-116.0, -140.0, 30e-9, 0.0, 200, cfg, opt);
        REQUIRE(ds.truth.size() == 2);
        REQUIRE(ds.snapshots.size() == 200);
        const auto& fixed = ds.truth[0];
        const auto& moving = ds.truth[1];
        CHECK(moving.delays_s.front() - fixed.delays_s.front() == doctest::Approx(30e-9));
        CHECK(moving.delays_s.back() - fixed.delays_s.back() == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(power_db(fixed.gains[10]) == doctest::Approx(-116.0));
        // phase follows the delay change at the carrier
        const double dtau = moving.delays_s[1] - moving.delays_s[0];
        const double dphi = std::arg(moving.gains[1] / moving.gains[0]);
        CHECK(std::remainder(dphi + 2.0 * std::numbers::pi * cfg.carrier_hz * dtau, 2.0 * std::numbers::pi) ==
              doctest::Approx(0.0).epsilon(1e-6));

        const auto parallel = two_track_scenario(-116.0, -140.0, 10e-9, 10e-9, 50, cfg, opt);
        for (std::size_t n = 0; n < 50; ++n)
            CHECK(parallel.truth[1].delays_s[n] - parallel.truth[0].delays_s[n] == doctest::Approx(10e-9));
        CHECK_THROWS_AS(two_track_scenario(-116.0, -140.0, 1e-9, 2e-9, 50, cfg, opt), std::invalid_argument);
    }

    TEST_CASE("grid snapping records the rounding")
    {
        const SounderConfig cfg;
        TwoTrackOptions opt;
        opt.snap_to_grid = true;
        const auto ds = two_track_scenario(-116.0, -140.0, 30e-9, 0.0, 20, cfg, opt);
        for (const auto& t : ds.truth)
        {
            REQUIRE(t.rounding_s.size() == t.delays_s.size());
            for (std::size_t i = 0; i < t.delays_s.size(); ++i)
            {
                const double bins = t.delays_s[i] / cfg.delay_bin_s;
                CHECK(bins == doctest::Approx(std::round(bins)).epsilon(1e-12));
                CHECK(std::abs(t.rounding_s[i]) <= 0.5e-9 + 1e-18);
            }
        }
    }

    TEST_CASE("geometry: static scene gives a constant delay")
    {
        SounderConfig cfg;
        cfg.num_sets = 2;
        TxRxKinematics k;
        k.tx.position = {30.0, 0.0};
        ScattererSpec s;
        s.body.position = {15.0, 10.0};
        const std::vector<ScattererSpec> scat{s};
        GeometryOptions opt;
        opt.noise_floor_db = -200.0;
        const auto ds = geometry_scenario(scat, k, cfg, 1, opt);
        REQUIRE(ds.truth.size() == 2);
        for (const auto& t : ds.truth)
            for (double d : t.delays_s)
                CHECK(d == doctest::Approx(t.delays_s.front()));
        CHECK(ds.truth[0].delays_s[0] == doctest::Approx(30.0 / kC));
        CHECK(ds.truth[1].delays_s[0] == doctest::Approx(2.0 * std::hypot(15.0, 10.0) / kC));
    }

    TEST_CASE("geometry: receding receiver gives delay slope v/c")
    {
        SounderConfig cfg;
        TxRxKinematics k;
        k.tx.position = {0.0, 0.0};
        k.rx.position = {20.0, 0.0};
        k.rx.velocity = {25.0, 0.0};
        GeometryOptions opt;
        opt.noise_floor_db = -200.0;
        const auto ds = geometry_scenario({}, k, cfg, 1, opt);
        REQUIRE(ds.truth.size() == 1);
        const auto& t = ds.truth[0];
        const double slope = (t.delays_s.back() - t.delays_s.front()) /
                             (ds.snapshots.back().timestamp_s - ds.snapshots.front().timestamp_s);
        CHECK(slope == doctest::Approx(25.0 / kC).epsilon(1e-9));
    }

    TEST_CASE("diffuse floor reports the injected power")
    {
        SounderConfig cfg = small_config(512);
        const auto pulse = synth_pulse(cfg, 2.0);
        auto ds = render_dataset(cfg, {}, pulse, -400.0, 1);
        const double injected = add_diffuse_floor(ds, {100e-9, 200e-9, -150.0}, pulse, 2);
        const double expect = 100.0 * db_to_power(-150.0) * pulse.energy();
        CHECK(injected == doctest::Approx(expect));
        double mean = 0.0;
        for (const auto& s : ds.snapshots)
            mean += energy(s.samples);
        mean /= static_cast<double>(ds.snapshots.size());
        // random phases: total power fluctuates around the sum of the pulse energies
        CHECK(mean == doctest::Approx(expect).epsilon(0.5));
    }
}
