// SPDX-License-Identifier: Apache-2.0

#include "mpct/synth.hpp"

#include "mpct/error.hpp"
#include "mpct/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mpct
{

namespace
{

bool is_integer_delay(double delay_bins)
{
    return std::abs(delay_bins - std::round(delay_bins)) <= 1e-9;
}

std::size_t argmax_abs(std::span<const cplx> x)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) > std::abs(x[best]))
            best = i;
    return best;
}

// Pulse samples placed circularly in a length-n buffer, peak on index 0.
std::vector<cplx> circular_placement(std::span<const cplx> samples, std::size_t peak_index, std::size_t n)
{
    std::vector<cplx> buf(n);
    const auto ln = static_cast<long>(n);
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        long pos = (static_cast<long>(i) - static_cast<long>(peak_index)) % ln;
        if (pos < 0)
            pos += ln;
        buf[static_cast<std::size_t>(pos)] += samples[i];
    }
    return buf;
}

} // namespace

double Mover::speed() const
{
    return std::hypot(velocity.x, velocity.y);
}

double measure_width_10db(std::span<const cplx> samples, std::size_t peak_index, double delay_bin_s)
{
    constexpr std::size_t kOversample = 32;
    std::size_t n = 64;
    while (n < 4 * samples.size())
        n *= 2;
    const auto spec = forward_dft(circular_placement(samples, peak_index, n));
    const std::size_t m = n * kOversample;
    std::vector<cplx> padded(m);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double s = signed_bin(k, n);
        if (n % 2 == 0 && k == n / 2)
        {
            // split the Nyquist bin between both ends
            padded[n / 2] += 0.5 * spec[k];
            padded[m - n / 2] += 0.5 * spec[k];
            continue;
        }
        const long idx = s >= 0 ? static_cast<long>(s) : static_cast<long>(m) + static_cast<long>(s);
        padded[static_cast<std::size_t>(idx)] = spec[k];
    }
    auto fine = inverse_dft(padded);
    const double scale = static_cast<double>(kOversample);
    std::vector<double> mag(m);
    for (std::size_t j = 0; j < m; ++j)
        mag[j] = std::abs(fine[j]) * scale;

    // the band-limited peak may sit slightly off sample 0
    std::size_t peak = 0;
    for (std::size_t j = 0; j < kOversample; ++j)
    {
        if (mag[j] > mag[peak])
            peak = j;
        if (mag[m - 1 - j] > mag[peak])
            peak = m - 1 - j;
    }
    const double level = mag[peak] * std::pow(10.0, -0.5);
    auto at = [&](long j) { return mag[static_cast<std::size_t>(((j % static_cast<long>(m)) + static_cast<long>(m)) % static_cast<long>(m))]; };
    const long p = static_cast<long>(peak);
    double right = 0.0;
    double left = 0.0;
    for (long j = 1; j < static_cast<long>(m / 2); ++j)
    {
        if (at(p + j) < level)
        {
            const double a = at(p + j - 1);
            const double b = at(p + j);
            right = static_cast<double>(j - 1) + (a - level) / (a - b);
            break;
        }
    }
    for (long j = 1; j < static_cast<long>(m / 2); ++j)
    {
        if (at(p - j) < level)
        {
            const double a = at(p - j + 1);
            const double b = at(p - j);
            left = static_cast<double>(j - 1) + (a - level) / (a - b);
            break;
        }
    }
    return (left + right) / scale * delay_bin_s;
}

PulseModel PulseModel::from_samples(std::vector<cplx> samples, double delay_bin_s)
{
    if (samples.empty())
        throw std::invalid_argument("PulseModel: empty pulse");
    if (!(delay_bin_s > 0.0))
        throw std::invalid_argument("PulseModel: delay bin must be positive");
    PulseModel p;
    p.peak_index = argmax_abs(samples);
    const double peak = std::abs(samples[p.peak_index]);
    if (!(peak > 0.0) || !std::isfinite(peak))
        throw std::invalid_argument("PulseModel: pulse has no finite non-zero peak");
    for (auto& s : samples)
        s /= peak;
    p.samples = std::move(samples);
    p.delay_bin_s = delay_bin_s;
    p.width_10db_s = measure_width_10db(p.samples, p.peak_index, delay_bin_s);
    return p;
}

std::vector<cplx> PulseModel::spectrum(std::size_t seq_len) const
{
    return forward_dft(circular_placement(samples, peak_index, seq_len));
}

std::vector<cplx> PulseModel::place(std::size_t seq_len, double delay_bins) const
{
    std::vector<cplx> out(seq_len);
    if (is_integer_delay(delay_bins))
    {
        const long d = std::lround(delay_bins);
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const long pos = d - static_cast<long>(peak_index) + static_cast<long>(i);
            if (pos >= 0 && pos < static_cast<long>(seq_len))
                out[static_cast<std::size_t>(pos)] = samples[i];
        }
        return out;
    }
    auto spec = spectrum(seq_len);
    const double w = -2.0 * std::numbers::pi * delay_bins / static_cast<double>(seq_len);
    for (std::size_t k = 0; k < seq_len; ++k)
        spec[k] *= std::polar(1.0, w * signed_bin(k, seq_len));
    return inverse_dft(spec);
}

PulseModel synth_pulse(const SounderConfig& config, double window_shape)
{
    config.validate();
    const std::size_t n = config.seq_len;
    const auto window = band_centered(kaiser_window(n, window_shape));
    std::vector<cplx> spec(window.begin(), window.end());
    auto full = inverse_dft(spec);
    const double peak = std::abs(full[0]);
    // keep the part above -120 dB around the circular peak at index 0
    const double keep = 1e-6 * peak;
    std::size_t right = 0;
    std::size_t left = 0;
    for (std::size_t j = 1; j < n / 2; ++j)
        if (std::abs(full[j]) >= keep)
            right = j;
    for (std::size_t j = 1; j < n / 2; ++j)
        if (std::abs(full[n - j]) >= keep)
            left = j;
    // a flat band samples to a lone spike; keep the neighbouring zeros so the
    // pulse still spans its 10 dB width
    const std::size_t min_half = std::min<std::size_t>(2, n / 2 > 0 ? n / 2 - 1 : 0);
    left = std::max(left, min_half);
    right = std::max(right, min_half);
    std::vector<cplx> samples;
    samples.reserve(left + right + 1);
    for (std::size_t j = left; j > 0; --j)
        samples.push_back(full[n - j]);
    for (std::size_t j = 0; j <= right; ++j)
        samples.push_back(full[j]);
    return PulseModel::from_samples(std::move(samples), config.delay_bin_s);
}

PulseModel sounder_pulse(const SounderConfig& config)
{
    return synth_pulse(config, kSounderPulseShape);
}

std::string format_pulse(const PulseModel& pulse)
{
    std::ostringstream os;
    os.precision(17);
    os << "wpls 1\n"
       << "z " << pulse.samples.size() << "\n"
       << "tb " << pulse.delay_bin_s << "\n";
    for (const auto& s : pulse.samples)
        os << s.real() << ' ' << s.imag() << '\n';
    return os.str();
}

namespace
{

class TokenCursor
{
public:
    explicit TokenCursor(std::string_view text) : text_(text) {}

    std::size_t offset() const { return pos_; }

    std::string_view token(const char* what)
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ >= text_.size())
            throw ParseError(std::string("unexpected end of file, expected ") + what, pos_);
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        last_ = start;
        return text_.substr(start, pos_ - start);
    }

    void expect(std::string_view word)
    {
        const auto t = token(std::string(word).c_str());
        if (t != word)
            throw ParseError("expected '" + std::string(word) + "'", last_);
    }

    template <typename T>
    T number(const char* what)
    {
        const auto t = token(what);
        T value{};
        const auto* end = t.data() + t.size();
        const auto res = std::from_chars(t.data(), end, value);
        if (res.ec != std::errc{} || res.ptr != end)
            throw ParseError(std::string("malformed ") + what, last_);
        return value;
    }

    std::size_t last() const { return last_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t last_ = 0;
};

} // namespace

PulseModel parse_pulse(std::string_view text)
{
    TokenCursor cur(text);
    cur.expect("wpls");
    if (cur.number<int>("version") != 1)
        throw ParseError("unsupported WPLS version", cur.last());
    cur.expect("z");
    const auto z = cur.number<std::size_t>("sample count");
    if (z == 0)
        throw ParseError("sample count must be positive", cur.last());
    cur.expect("tb");
    const double tb = cur.number<double>("delay bin");
    if (!(tb > 0.0))
        throw ParseError("delay bin must be positive", cur.last());
    std::vector<cplx> samples;
    samples.reserve(z);
    for (std::size_t i = 0; i < z; ++i)
    {
        const double re = cur.number<double>("real part");
        const double im = cur.number<double>("imaginary part");
        samples.emplace_back(re, im);
    }
    const std::size_t at = cur.offset();
    try
    {
        return PulseModel::from_samples(std::move(samples), tb);
    }
    catch (const std::invalid_argument& e)
    {
        throw ParseError(e.what(), at);
    }
}

PulseModel load_pulse(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open pulse file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pulse(ss.str());
}

void save_pulse(const PulseModel& pulse, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write pulse file " + path.string());
    out << format_pulse(pulse);
}

CirSnapshot render_snapshot(std::span<const GroundTruthMpc> truth, std::size_t n, const PulseModel& pulse,
                            double noise_floor_db, const SounderConfig& config, std::uint64_t seed)
{
    const std::size_t len = config.seq_len;
    const double range = static_cast<double>(len) * config.delay_bin_s;
    std::vector<cplx> h(len);
    std::vector<cplx> fractional(len);
    std::vector<cplx> spec;
    bool any_fractional = false;
    for (const auto& mpc : truth)
    {
        if (!mpc.active(n))
            continue;
        const double tau = mpc.delay_at(n);
        if (!(tau >= 0.0) || !(tau < range))
            throw std::invalid_argument("render_snapshot: delay outside the delay range");
        const cplx alpha = mpc.gain_at(n);
        const double d = tau / config.delay_bin_s;
        if (is_integer_delay(d))
        {
            const auto placed = pulse.place(len, d);
            for (std::size_t u = 0; u < len; ++u)
                h[u] += alpha * placed[u];
            continue;
        }
        if (spec.empty())
            spec = pulse.spectrum(len);
        any_fractional = true;
        const double w = -2.0 * std::numbers::pi * d / static_cast<double>(len);
        for (std::size_t k = 0; k < len; ++k)
            fractional[k] += alpha * spec[k] * std::polar(1.0, w * signed_bin(k, len));
    }
    if (any_fractional)
    {
        const auto shifted = inverse_dft(fractional);
        for (std::size_t u = 0; u < len; ++u)
            h[u] += shifted[u];
    }
    if (std::isfinite(noise_floor_db))
    {
        const double sigma = std::sqrt(db_to_power(noise_floor_db) / 2.0);
        CounterRng rng(seed, n);
        for (auto& v : h)
        {
            const double re = rng.normal();
            const double im = rng.normal();
            v += cplx(sigma * re, sigma * im);
        }
    }
    return CirSnapshot{std::move(h), n, config.timestamp(n)};
}

Dataset render_dataset(const SounderConfig& config, std::vector<GroundTruthMpc> truth, const PulseModel& pulse,
                       double noise_floor_db, std::uint64_t seed)
{
    config.validate();
    Dataset ds;
    ds.config = config;
    ds.truth = std::move(truth);
    const std::size_t m = config.num_snapshots();
    ds.snapshots.reserve(m);
    for (std::size_t n = 0; n < m; ++n)
        ds.snapshots.push_back(render_snapshot(ds.truth, n, pulse, noise_floor_db, config, seed));
    return ds;
}

void snap_truth_to_grid(std::vector<GroundTruthMpc>& truth, const SounderConfig& config)
{
    for (auto& mpc : truth)
    {
        mpc.rounding_s.assign(mpc.delays_s.size(), 0.0);
        for (std::size_t i = 0; i < mpc.delays_s.size(); ++i)
        {
            const double snapped = std::round(mpc.delays_s[i] / config.delay_bin_s) * config.delay_bin_s;
            mpc.rounding_s[i] = snapped - mpc.delays_s[i];
            mpc.delays_s[i] = snapped;
        }
    }
}

double add_diffuse_floor(Dataset& dataset, const DiffuseFloor& floor, const PulseModel& pulse, std::uint64_t seed)
{
    const auto& cfg = dataset.config;
    const std::size_t len = cfg.seq_len;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(floor.start_s / cfg.delay_bin_s)));
    const auto last = std::min(len, static_cast<std::size_t>(std::max(0.0, std::ceil(floor.stop_s / cfg.delay_bin_s))));
    const double amp = db_to_amplitude(floor.power_db_per_bin);
    for (auto& snap : dataset.snapshots)
    {
        CounterRng rng(seed ^ 0xD1FF05Eull, snap.snapshot_index);
        std::vector<cplx> coeffs(len);
        for (std::size_t u = first; u < last; ++u)
            coeffs[u] = std::polar(amp, 2.0 * std::numbers::pi * rng.uniform());
        // convolve the on-grid coefficients with the pulse
        for (std::size_t u = first; u < last; ++u)
            for (std::size_t i = 0; i < pulse.samples.size(); ++i)
            {
                const long pos = static_cast<long>(u) - static_cast<long>(pulse.peak_index) + static_cast<long>(i);
                if (pos >= 0 && pos < static_cast<long>(len))
                    snap.samples[static_cast<std::size_t>(pos)] += coeffs[u] * pulse.samples[i];
            }
    }
    return last > first ? static_cast<double>(last - first) * amp * amp * pulse.energy() : 0.0;
}

Dataset two_track_scenario(double mpc_power_db, double noise_db, double delay_gap_start_s, double delay_gap_stop_s,
                           std::size_t num_snapshots, const SounderConfig& config, const TwoTrackOptions& options)
{
    if (delay_gap_stop_s < 0.0 || delay_gap_start_s < delay_gap_stop_s)
        throw std::invalid_argument("two_track_scenario: need gap_start >= gap_stop >= 0");
    SounderConfig cfg = config;
    cfg.snapshots_per_set = num_snapshots;
    cfg.num_sets = 1;
    cfg.set_period_s = std::max(cfg.set_period_s, static_cast<double>(num_snapshots) * cfg.snapshot_period_s);
    cfg.validate();

    CounterRng rng(options.seed, 0x7770ull);
    const double base =
        options.base_delay_s + (options.random_subbin_offset ? rng.uniform() * cfg.delay_bin_s : 0.0);
    const double amp = db_to_amplitude(mpc_power_db);
    const double phase_fixed = 2.0 * std::numbers::pi * rng.uniform();
    const double phase_moving = 2.0 * std::numbers::pi * rng.uniform();

    GroundTruthMpc fixed;
    GroundTruthMpc moving;
    const double steps = num_snapshots > 1 ? static_cast<double>(num_snapshots - 1) : 1.0;
    for (std::size_t n = 0; n < num_snapshots; ++n)
    {
        const double frac = static_cast<double>(n) / steps;
        const double gap = delay_gap_start_s + (delay_gap_stop_s - delay_gap_start_s) * frac;
        fixed.delays_s.push_back(base);
        fixed.gains.push_back(std::polar(amp, phase_fixed));
        const double tau = base + gap;
        moving.delays_s.push_back(tau);
        const double dtau = tau - (base + delay_gap_start_s);
        moving.gains.push_back(std::polar(amp, phase_moving - 2.0 * std::numbers::pi * cfg.carrier_hz * dtau));
    }
    std::vector<GroundTruthMpc> truth{fixed, moving};
    if (options.snap_to_grid)
        snap_truth_to_grid(truth, cfg);
    const PulseModel pulse = options.pulse ? *options.pulse : sounder_pulse(cfg);
    return render_dataset(cfg, std::move(truth), pulse, noise_db, options.seed);
}

Dataset geometry_scenario(std::span<const ScattererSpec> scatterers, const TxRxKinematics& kinematics,
                          const SounderConfig& config, std::uint64_t seed, const GeometryOptions& options)
{
    config.validate();
    const std::size_t m = config.num_snapshots();
    const double lambda = kSpeedOfLight / config.carrier_hz;
    const double max_delay = options.max_delay_fraction * static_cast<double>(config.seq_len) * config.delay_bin_s;

    struct Path
    {
        std::optional<std::size_t> scatterer;
        double loss_db;
    };
    std::vector<Path> paths;
    if (kinematics.line_of_sight)
        paths.push_back({std::nullopt, kinematics.los_extra_loss_db});
    for (std::size_t s = 0; s < scatterers.size(); ++s)
        paths.push_back({s, scatterers[s].reflection_loss_db});

    std::vector<GroundTruthMpc> truth;
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        CounterRng rng(seed, 0xFADE0000ull + p);
        const double rho_time = options.fading_corr_s;
        double fade_db = options.fading_std_db * rng.normal();
        double last_t = 0.0;
        std::optional<GroundTruthMpc> run;
        auto flush = [&]() {
            if (run && run->delays_s.size() > 0)
                truth.push_back(std::move(*run));
            run.reset();
        };
        for (std::size_t n = 0; n < m; ++n)
        {
            const double t = config.timestamp(n);
            if (n > 0 && options.fading_std_db > 0.0)
            {
                const double rho = std::exp(-(t - last_t) / rho_time);
                fade_db = rho * fade_db + std::sqrt(1.0 - rho * rho) * options.fading_std_db * rng.normal();
            }
            last_t = t;
            const Vec2 tx = kinematics.tx.at(t);
            const Vec2 rx = kinematics.rx.at(t);
            double length = 0.0;
            bool alive = true;
            if (!paths[p].scatterer)
            {
                length = std::hypot(tx.x - rx.x, tx.y - rx.y);
            }
            else
            {
                const auto& sc = scatterers[*paths[p].scatterer];
                alive = t >= sc.birth_s && t < sc.death_s;
                const Vec2 s = sc.body.at(t);
                length = std::hypot(tx.x - s.x, tx.y - s.y) + std::hypot(s.x - rx.x, s.y - rx.y);
            }
            const double tau = length / kSpeedOfLight;
            if (!alive || tau >= max_delay || length <= 0.0)
            {
                flush();
                continue;
            }
            const double amp = db_to_amplitude(-paths[p].loss_db + fade_db) * lambda / (4.0 * std::numbers::pi * length);
            const cplx gain = std::polar(amp, -2.0 * std::numbers::pi * config.carrier_hz * tau);
            if (!run)
            {
                run.emplace();
                run->birth = n;
            }
            run->delays_s.push_back(tau);
            run->gains.push_back(gain);
        }
        flush();
    }
    if (options.snap_to_grid)
        snap_truth_to_grid(truth, config);
    const PulseModel pulse = options.pulse ? *options.pulse : sounder_pulse(config);
    return render_dataset(config, std::move(truth), pulse, options.noise_floor_db, seed);
}

std::vector<ScattererSpec> convoy_scatterers(const ConvoySpec& spec, double duration_s, std::uint64_t seed)
{
    CounterRng rng(seed, 0xC0417ull);
    std::vector<ScattererSpec> out;
    // walls span the stretch the convoy covers, with margin on both ends
    const double travel = spec.speed_mps * duration_s;
    const double x0 = -20.0;
    const double x1 = spec.separation_m + travel + 20.0;
    for (std::size_t i = 0; i < spec.wall_scatterers; ++i)
    {
        ScattererSpec s;
        const double frac = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(spec.wall_scatterers);
        s.body.position = {x0 + (x1 - x0) * frac, (i % 2 == 0 ? 1.0 : -1.0) * spec.tunnel_half_width_m};
        s.reflection_loss_db = spec.reflection_loss_db + 6.0 * rng.uniform();
        if (spec.lifetime_s > 0.0)
        {
            s.birth_s = (rng.uniform() - 0.5) * spec.lifetime_s + duration_s * rng.uniform();
            s.death_s = s.birth_s + spec.lifetime_s;
        }
        out.push_back(s);
    }
    return out;
}

TxRxKinematics convoy_kinematics(const ConvoySpec& spec)
{
    TxRxKinematics k;
    k.rx.position = {0.0, -1.0};
    k.rx.velocity = {spec.speed_mps, 0.0};
    k.tx.position = {spec.separation_m, -1.0};
    k.tx.velocity = {spec.speed_mps, 0.0};
    return k;
}

} // namespace mpct
