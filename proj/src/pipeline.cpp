// SPDX-License-Identifier: Apache-2.0

#include "mpct/pipeline.hpp"

#include "mpct/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>

namespace mpct
{

namespace
{

// Field lists shared by encoding and decoding.
template <typename T>
struct Fields;

template <>
struct Fields<SounderConfig>
{
    template <typename F>
    static void each(SounderConfig& c, F&& f)
    {
        f("carrier_hz", c.carrier_hz);
        f("bandwidth_hz", c.bandwidth_hz);
        f("delay_bin_s", c.delay_bin_s);
        f("seq_len", c.seq_len);
        f("snapshot_period_s", c.snapshot_period_s);
        f("snapshots_per_set", c.snapshots_per_set);
        f("set_period_s", c.set_period_s);
        f("num_sets", c.num_sets);
    }
};

template <>
struct Fields<DetectConfig>
{
    template <typename F>
    static void each(DetectConfig& c, F&& f)
    {
        f("noise_margin_db", c.noise_margin_db);
        f("block_width_s", c.block_width_s);
        f("window_shape_a", c.window_shape_a);
        f("windowing", c.windowing);
        f("max_peaks", c.max_peaks);
        f("tail_fraction", c.tail_fraction);
        f("zero_before_window", c.zero_before_window);
        f("subbin_refine", c.subbin_refine);
        f("estimate_on_raw", c.estimate_on_raw);
        f("joint_sweeps", c.joint_sweeps);
        f("dynamic_range_db", c.dynamic_range_db);
    }
};

template <>
struct Fields<ChangeGate>
{
    template <typename F>
    static void each(ChangeGate& c, F&& f)
    {
        f("max_gain_change_db", c.max_gain_change_db);
        f("max_delay_change_s", c.max_delay_change_s);
    }
};

template <>
struct Fields<SearchTolerance>
{
    template <typename F>
    static void each(SearchTolerance& c, F&& f)
    {
        f("gain_tol_db", c.gain_tol_db);
        f("delay_tol_s", c.delay_tol_s);
    }
};

template <>
struct Fields<LongGate>
{
    template <typename F>
    static void each(LongGate& c, F&& f)
    {
        f("max_delay_change_s", c.max_delay_change_s);
        f("max_gain_change_db", c.max_gain_change_db);
    }
};

template <>
struct Fields<GmphdParams>
{
    template <typename F>
    static void each(GmphdParams& c, F&& f)
    {
        f("process_noise_std", c.process_noise_std);
        f("meas_noise_std", c.meas_noise_std);
        f("p_survival", c.p_survival);
        f("p_detect", c.p_detect);
        f("truncation_threshold", c.truncation_threshold);
        f("merge_threshold", c.merge_threshold);
        f("min_weight", c.min_weight);
        f("clutter_intensity", c.clutter_intensity);
        f("birth_weight", c.birth_weight);
        f("birth_pos_std", c.birth_pos_std);
        f("birth_vel_std", c.birth_vel_std);
        f("max_components", c.max_components);
        f("max_gain_change_db", c.max_gain_change_db);
        f("max_delay_change_s", c.max_delay_change_s);
    }
};

template <>
struct Fields<ConvoySpec>
{
    template <typename F>
    static void each(ConvoySpec& c, F&& f)
    {
        f("speed_mps", c.speed_mps);
        f("separation_m", c.separation_m);
        f("tunnel_half_width_m", c.tunnel_half_width_m);
        f("wall_scatterers", c.wall_scatterers);
        f("reflection_loss_db", c.reflection_loss_db);
        f("lifetime_s", c.lifetime_s);
    }
};

template <>
struct Fields<DiffuseFloor>
{
    template <typename F>
    static void each(DiffuseFloor& c, F&& f)
    {
        f("start_s", c.start_s);
        f("stop_s", c.stop_s);
        f("power_db_per_bin", c.power_db_per_bin);
    }
};

template <>
struct Fields<ScenarioSpec>
{
    template <typename F>
    static void each(ScenarioSpec& c, F&& f)
    {
        f("kind", c.kind);
        f("mpc_power_db", c.mpc_power_db);
        f("noise_db", c.noise_db);
        f("gap_start_s", c.gap_start_s);
        f("gap_stop_s", c.gap_stop_s);
        f("num_snapshots", c.num_snapshots);
        f("convoy", c.convoy);
        f("fading_std_db", c.fading_std_db);
        f("diffuse", c.diffuse);
        f("dataset_path", c.dataset_path);
        f("pulse_path", c.pulse_path);
    }
};

template <>
struct Fields<EvalSpec>
{
    template <typename F>
    static void each(EvalSpec& c, F&& f)
    {
        f("power_sweep_db", c.power_sweep_db);
        f("windowing", c.windowing);
        f("algorithms", c.algorithms);
        f("seeds_per_point", c.seeds_per_point);
    }
};

template <>
struct Fields<PipelineConfig>
{
    template <typename F>
    static void each(PipelineConfig& c, F&& f)
    {
        f("sounder", c.sounder);
        f("detect", c.detect);
        f("gate", c.gate);
        f("tol", c.tol);
        f("long_gate", c.long_gate);
        f("gmphd", c.gmphd);
        f("scenario", c.scenario);
        f("eval", c.eval);
        f("seed", c.seed);
        f("out", c.out);
        f("stages", c.stages);
        f("threads", c.threads);
    }
};

struct NoopField
{
    template <typename V>
    void operator()(const char*, V&) const
    {
    }
};

template <typename T>
concept HasFields = requires(T& t) { Fields<T>::each(t, NoopField{}); };

template <typename T>
struct IsOptional : std::false_type
{
};
template <typename T>
struct IsOptional<std::optional<T>> : std::true_type
{
};

template <typename T>
struct IsVector : std::false_type
{
};
template <typename T>
struct IsVector<std::vector<T>> : std::true_type
{
};

template <typename T>
json encode(const T& value)
{
    if constexpr (HasFields<T>)
    {
        json j = json::object();
        Fields<T>::each(const_cast<T&>(value), [&](const char* key, auto& member) { j[key] = encode(member); });
        return j;
    }
    else if constexpr (IsOptional<T>::value)
    {
        return value ? encode(*value) : json(nullptr);
    }
    else if constexpr (IsVector<T>::value)
    {
        json j = json::array();
        for (const auto& v : value)
            j.push_back(encode(static_cast<typename T::value_type>(v)));
        return j;
    }
    else
    {
        return json(value);
    }
}

[[noreturn]] void bad_type(const std::string& path, const char* expected)
{
    throw ConfigError("config key '" + path + "': expected " + expected);
}

template <typename T>
void decode(const json& j, T& value, const std::string& path)
{
    if constexpr (HasFields<T>)
    {
        if (!j.is_object())
            bad_type(path, "an object");
        std::set<std::string> known;
        Fields<T>::each(value, [&](const char* key, auto&) { known.insert(key); });
        for (const auto& [key, v] : j.items())
            if (!known.contains(key))
                throw ConfigError("unknown config key '" + (path.empty() ? key : path + "." + key) + "'");
        Fields<T>::each(value, [&](const char* key, auto& member) {
            if (j.contains(key))
                decode(j.at(key), member, path.empty() ? std::string(key) : path + "." + key);
        });
    }
    else if constexpr (IsOptional<T>::value)
    {
        if (j.is_null())
            value.reset();
        else
        {
            typename T::value_type inner{};
            decode(j, inner, path);
            value = inner;
        }
    }
    else if constexpr (IsVector<T>::value)
    {
        if (!j.is_array())
            bad_type(path, "an array");
        value.clear();
        for (std::size_t i = 0; i < j.size(); ++i)
        {
            typename T::value_type v{};
            decode(j[i], v, path + "[" + std::to_string(i) + "]");
            value.push_back(v);
        }
    }
    else if constexpr (std::is_same_v<T, bool>)
    {
        if (!j.is_boolean())
            bad_type(path, "a boolean");
        value = j.get<bool>();
    }
    else if constexpr (std::is_integral_v<T>)
    {
        if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0))
            bad_type(path, "a non-negative integer");
        value = j.get<T>();
    }
    else if constexpr (std::is_floating_point_v<T>)
    {
        if (!j.is_number())
            bad_type(path, "a number");
        value = j.get<T>();
    }
    else
    {
        if (!j.is_string())
            bad_type(path, "a string");
        value = j.get<T>();
    }
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

json effective_json(const PipelineConfig& config)
{
    json j = config_to_json(config);
    j.erase("out");
    j.erase("threads");
    j.erase("stages");
    return j;
}

Algorithm parse_algorithm(const std::string& name)
{
    if (name == "proposed")
        return Algorithm::proposed;
    if (name == "gmphd")
        return Algorithm::gmphd;
    throw ConfigError("unknown algorithm '" + name + "'");
}

// ---------------------------------------------------------------------------
// artifact files

namespace files
{
constexpr const char* dataset = "dataset.wcir";
constexpr const char* pulse = "pulse.wpls";
constexpr const char* truth = "truth.json";
constexpr const char* detections = "detections.json";
constexpr const char* tracks = "tracks.json";
constexpr const char* summaries = "summaries.json";
constexpr const char* associations = "associations.json";
constexpr const char* eval = "eval.csv";
constexpr const char* gains = "gains.csv";
constexpr const char* stats = "stats.json";
constexpr const char* manifest = "manifest.json";
} // namespace files

const std::vector<std::string> kArtifacts{files::dataset,   files::pulse,        files::truth,
                                          files::detections, files::tracks,      files::summaries,
                                          files::associations, files::eval,      files::gains,
                                          files::stats};

std::string producer_of(const std::string& file)
{
    if (file == files::dataset || file == files::pulse || file == files::truth)
        return "synth";
    if (file == files::detections)
        return "detect";
    if (file == files::tracks)
        return "track";
    if (file == files::summaries || file == files::associations)
        return "longtrack";
    return "eval";
}

class StageContext
{
public:
    StageContext(std::string stage, const PipelineConfig& config)
        : stage_(std::move(stage)), config_(config), dir_(config.out)
    {
    }

    std::filesystem::path path(const char* name) const { return dir_ / name; }

    std::filesystem::path require(const char* name) const
    {
        const auto p = path(name);
        if (!std::filesystem::exists(p))
            throw StageError(stage_, std::string("missing input ") + name + " (run stage '" + producer_of(name) +
                                         "' first)");
        return p;
    }

    json read_json(const char* name) const { return parse_json(read_text(require(name))); }

    void write_json(const char* name, const json& j) const { write_text(path(name), j.dump(1) + "\n"); }

    Dataset dataset() const { return read_dataset(require(files::dataset)); }
    PulseModel pulse() const { return parse_pulse(read_text(require(files::pulse))); }

    const PipelineConfig& config() const { return config_; }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
    const PipelineConfig& config_;
    std::filesystem::path dir_;
};

SounderConfig sounder_from_json(const json& j)
{
    SounderConfig c;
    decode(j, c, "config");
    return c;
}

json with_header(json body, const SounderConfig& sounder)
{
    body["schema_version"] = kSchemaVersion;
    body["config"] = to_json(sounder);
    return body;
}

PulseModel scenario_pulse(const PipelineConfig& cfg, const SounderConfig& sounder)
{
    if (!cfg.scenario.pulse_path.empty())
        return load_pulse(cfg.scenario.pulse_path);
    return sounder_pulse(sounder);
}

void stage_synth(const StageContext& ctx)
{
    const auto& cfg = ctx.config();
    const auto& sc = cfg.scenario;
    Dataset ds;
    PulseModel pulse;
    if (sc.kind == "file")
    {
        ds = read_dataset(sc.dataset_path);
        pulse = scenario_pulse(cfg, ds.config);
    }
    else
    {
        pulse = scenario_pulse(cfg, cfg.sounder);
        if (sc.kind == "two_track")
        {
            TwoTrackOptions opt;
            opt.pulse = pulse;
            opt.seed = cfg.seed;
            ds = two_track_scenario(sc.mpc_power_db, sc.noise_db, sc.gap_start_s, sc.gap_stop_s, sc.num_snapshots,
                                    cfg.sounder, opt);
        }
        else
        {
            const auto& s = cfg.sounder;
            const double duration = s.timestamp(s.num_snapshots() - 1) + s.snapshot_period_s;
            const auto scatterers = convoy_scatterers(sc.convoy, duration, cfg.seed);
            GeometryOptions opt;
            opt.pulse = pulse;
            opt.noise_floor_db = sc.noise_db;
            opt.fading_std_db = sc.fading_std_db;
            ds = geometry_scenario(scatterers, convoy_kinematics(sc.convoy), s, cfg.seed, opt);
        }
        if (sc.diffuse.stop_s > sc.diffuse.start_s)
            add_diffuse_floor(ds, sc.diffuse, pulse, cfg.seed ^ 0xD1FFull);
    }
    write_dataset(ds, ctx.path(files::dataset));
    write_text(ctx.path(files::pulse), format_pulse(pulse));
    json mpcs = json::array();
    for (const auto& t : ds.truth)
        mpcs.push_back(to_json(t));
    ctx.write_json(files::truth, with_header({{"mpcs", mpcs}}, ds.config));
}

Detector make_detector(const StageContext& ctx, const PulseModel& pulse, const SounderConfig& sounder)
{
    return Detector(pulse, sounder.seq_len, ctx.config().detect);
}

void stage_detect(const StageContext& ctx)
{
    const Dataset ds = ctx.dataset();
    const PulseModel pulse = ctx.pulse();
    const Detector detector = make_detector(ctx, pulse, ds.config);
    const auto detections = detect_all(ds.snapshots, detector, ctx.config().threads);
    json j = detections_json(detections);
    j["reference_energy"] = detector.reference().energy();
    ctx.write_json(files::detections, with_header(j, ds.config));
}

json tracks_array(std::span<const Track> tracks)
{
    json a = json::array();
    for (const auto& t : tracks)
        a.push_back(to_json(t));
    return a;
}

void store_tracks(const StageContext& ctx, const char* key, std::span<const Track> tracks, const SounderConfig& s)
{
    json j = json::object();
    const auto p = ctx.path(files::tracks);
    if (std::filesystem::exists(p))
    {
        j = parse_json(read_text(p));
        if (!j.is_object() || j.value("config", json()) != to_json(s))
            j = json::object();
    }
    j[key] = tracks_array(tracks);
    ctx.write_json(files::tracks, with_header(j, s));
}

void stage_track(const StageContext& ctx)
{
    const json dj = ctx.read_json(files::detections);
    const SounderConfig s = sounder_from_json(dj.at("config"));
    const auto detections = detections_from_json(dj);
    const auto& cfg = ctx.config();
    store_tracks(ctx, "proposed", track_sets(detections, s, cfg.gate, cfg.tol), s);
}

void stage_gmphd(const StageContext& ctx)
{
    const json dj = ctx.read_json(files::detections);
    const SounderConfig s = sounder_from_json(dj.at("config"));
    const auto detections = detections_from_json(dj);
    store_tracks(ctx, "gmphd", gmphd_track(detections, ctx.config().gmphd, s), s);
}

std::vector<Track> load_tracks(const StageContext& ctx, const json& tj, const char* key)
{
    if (!tj.contains(key))
        throw StageError(ctx.stage(), std::string("tracks.json has no '") + key + "' tracks (run stage '" +
                                          (std::string(key) == "proposed" ? "track" : "gmphd") + "' first)");
    return tracks_from_json(tj.at(key));
}

void stage_longtrack(const StageContext& ctx)
{
    const json tj = ctx.read_json(files::tracks);
    const SounderConfig s = sounder_from_json(tj.at("config"));
    const auto tracks = load_tracks(ctx, tj, "proposed");
    json sets = json::array();
    json boundaries = json::array();
    std::vector<std::vector<SetSummary>> summaries;
    for (std::size_t i = 0; i < s.num_sets; ++i)
    {
        summaries.push_back(summarize_set(tracks, i, s));
        json list = json::array();
        for (const auto& x : summaries.back())
            list.push_back(to_json(x));
        sets.push_back(list);
    }
    for (std::size_t i = 0; i + 1 < summaries.size(); ++i)
    {
        json list = json::array();
        for (const auto& a : link_sets(summaries[i], summaries[i + 1], ctx.config().long_gate, s))
            list.push_back(to_json(a));
        boundaries.push_back(list);
    }
    ctx.write_json(files::summaries, with_header({{"sets", sets}}, s));
    ctx.write_json(files::associations, with_header({{"boundaries", boundaries}}, s));
}

std::map<std::string, std::vector<Track>> all_tracks(const json& tj)
{
    std::map<std::string, std::vector<Track>> out;
    for (const char* key : {"proposed", "gmphd"})
        if (tj.contains(key))
            out[key] = tracks_from_json(tj.at(key));
    return out;
}

struct GainInputs
{
    Dataset dataset;
    std::vector<std::vector<DetectedMpc>> detections;
    std::map<std::string, std::vector<Track>> tracks;
    GainSeries series;
};

GainInputs gain_inputs(const StageContext& ctx)
{
    GainInputs g;
    g.dataset = ctx.dataset();
    const PulseModel pulse = ctx.pulse();
    g.detections = detections_from_json(ctx.read_json(files::detections));
    const json tj = ctx.read_json(files::tracks);
    g.tracks = all_tracks(tj);
    if (!g.tracks.contains("proposed"))
        load_tracks(ctx, tj, "proposed");
    const Detector detector = make_detector(ctx, pulse, g.dataset.config);
    try
    {
        g.series = channel_gain_series(g.dataset, detector, g.detections, g.tracks);
    }
    catch (const std::invalid_argument& e)
    {
        throw StageError(ctx.stage(), std::string("inputs are from different runs: ") + e.what());
    }
    return g;
}

void stage_eval(const StageContext& ctx)
{
    const auto& cfg = ctx.config();
    // the gain capture needs the run's artifacts; check them before the sweep
    const GainInputs g = gain_inputs(ctx);

    ArtificialOptions opt;
    opt.noise_db = cfg.scenario.noise_db;
    opt.gap_start_s = cfg.scenario.gap_start_s;
    opt.gap_stop_s = cfg.scenario.gap_stop_s;
    opt.num_snapshots = cfg.scenario.num_snapshots;
    opt.detect = cfg.detect;
    opt.gate = cfg.gate;
    opt.tol = cfg.tol;
    opt.gmphd = cfg.gmphd;
    opt.pulse = scenario_pulse(cfg, cfg.sounder);
    std::vector<Algorithm> algs;
    for (const auto& a : cfg.eval.algorithms)
        algs.push_back(parse_algorithm(a));
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < cfg.eval.seeds_per_point; ++i)
        seeds.push_back(cfg.seed + i);
    // std::vector<bool> has no contiguous storage to span over
    const auto& w = cfg.eval.windowing;
    const auto windowing = std::make_unique<bool[]>(w.size());
    std::copy(w.begin(), w.end(), windowing.get());
    const auto points = evaluate_artificial(cfg.eval.power_sweep_db, std::span<const bool>(windowing.get(), w.size()),
                                            algs, seeds, cfg.sounder, opt);
    write_text(ctx.path(files::eval), eval_csv(points));
    write_text(ctx.path(files::gains), gains_csv(g.series));
}

json cdf_or_null(const std::optional<Cdf>& c)
{
    return c ? to_json(*c) : json(nullptr);
}

void stage_stats(const StageContext& ctx)
{
    const auto& cfg = ctx.config();
    const GainInputs g = gain_inputs(ctx);
    const SounderConfig& s = g.dataset.config;
    const auto summaries = summaries_from_json(ctx.read_json(files::summaries));
    const auto associations = associations_from_json(ctx.read_json(files::associations));
    const auto& proposed = g.tracks.at("proposed");

    json j = json::object();
    const auto pstd = power_std_cdf(proposed, s.snapshots_per_set);
    j["power_std_cdf"] = {{"all", to_json(pstd.all)}, {"full_lifetime", to_json(pstd.full_lifetime)}};
    j["mpc_count_cdf"] = to_json(mpc_count_cdf(summaries));

    std::optional<Cdf> birth;
    std::optional<Cdf> death;
    if (cfg.scenario.kind == "convoy" && !associations.empty())
    {
        // both vehicles move at the convoy speed over each set interval
        const std::vector<double> displacement(associations.size(),
                                               2.0 * cfg.scenario.convoy.speed_mps * s.set_period_s);
        const auto bd = birth_death_rate(summaries, associations, displacement);
        birth = bd.birth;
        death = bd.death;
    }
    j["birth_rate_per_m_cdf"] = cdf_or_null(birth);
    j["death_rate_per_m_cdf"] = cdf_or_null(death);
    j["power_loss_ledger"] =
        to_json(power_loss_ledger(g.series, proposed, summaries, associations, s.snapshots_per_set));
    json mse = json::object();
    for (const auto& [name, tracks] : g.tracks)
    {
        const double v = loss_mse(g.series, name);
        mse[name] = std::isfinite(v) ? json(v) : json(nullptr);
    }
    j["loss_mse_db2"] = mse;
    ctx.write_json(files::stats, with_header(j, s));
}

void write_manifest(const PipelineConfig& config)
{
    const std::filesystem::path dir(config.out);
    json produced = json::object();
    for (const auto& name : kArtifacts)
    {
        const auto p = dir / name;
        if (std::filesystem::exists(p))
            produced[name] = hex64(fnv1a(read_text(p)));
    }
    json seeds = json::array();
    for (std::size_t i = 0; i < config.eval.seeds_per_point; ++i)
        seeds.push_back(config.seed + i);
    json m = {{"schema_version", kSchemaVersion},
              {"config_hash", hex64(config_hash(config))},
              {"seed", config.seed},
              {"eval_seeds", seeds},
              {"config", effective_json(config)},
              {"files", produced}};
    write_text(dir / files::manifest, m.dump(1) + "\n");
}

} // namespace

void PipelineConfig::validate() const
{
    try
    {
        sounder.validate();
        detect.validate();
        gmphd.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
    if (!(gate.max_gain_change_db > 0.0) || !(gate.max_delay_change_s > 0.0))
        throw ConfigError("gate thresholds must be positive");
    if (!(tol.gain_tol_db > 0.0) || !(tol.delay_tol_s > 0.0))
        throw ConfigError("tol thresholds must be positive");
    if (!(long_gate.max_gain_change_db > 0.0) || !(long_gate.max_delay_change_s > 0.0))
        throw ConfigError("long_gate thresholds must be positive");
    const auto& k = scenario.kind;
    if (k != "two_track" && k != "convoy" && k != "file")
        throw ConfigError("scenario.kind must be two_track, convoy or file");
    if (k == "file" && scenario.dataset_path.empty())
        throw ConfigError("scenario.dataset_path is required for the file scenario");
    if (scenario.num_snapshots < 3)
        throw ConfigError("scenario.num_snapshots must be at least 3");
    if (scenario.gap_stop_s < 0.0 || scenario.gap_start_s < scenario.gap_stop_s)
        throw ConfigError("scenario gaps need gap_start_s >= gap_stop_s >= 0");
    if (eval.power_sweep_db.empty() || eval.windowing.empty() || eval.algorithms.empty())
        throw ConfigError("eval sweep lists must be non-empty");
    if (eval.seeds_per_point == 0)
        throw ConfigError("eval.seeds_per_point must be positive");
    for (const auto& a : eval.algorithms)
        parse_algorithm(a);
    for (const auto& s : stages)
        if (std::find(kStages.begin(), kStages.end(), s) == kStages.end())
            throw ConfigError("unknown stage '" + s + "'");
    if (out.empty())
        throw ConfigError("out directory is required");
}

json config_to_json(const PipelineConfig& config)
{
    return encode(config);
}

PipelineConfig config_from_json(const json& overrides)
{
    PipelineConfig c;
    if (overrides.is_null())
        return c;
    decode(overrides, c, "");
    return c;
}

std::uint64_t config_hash(const PipelineConfig& config)
{
    return fnv1a(effective_json(config).dump());
}

void run_stage(const std::string& stage, const PipelineConfig& config)
{
    const StageContext ctx(stage, config);
    try
    {
        std::filesystem::create_directories(config.out);
        if (stage == "synth")
            stage_synth(ctx);
        else if (stage == "detect")
            stage_detect(ctx);
        else if (stage == "track")
            stage_track(ctx);
        else if (stage == "gmphd")
            stage_gmphd(ctx);
        else if (stage == "longtrack")
            stage_longtrack(ctx);
        else if (stage == "eval")
            stage_eval(ctx);
        else if (stage == "stats")
            stage_stats(ctx);
        else
            throw ConfigError("unknown stage '" + stage + "'");
        write_manifest(config);
    }
    catch (const StageError&)
    {
        throw;
    }
    catch (const ConfigError&)
    {
        throw;
    }
    catch (const ParseError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        throw StageError(stage, e.what());
    }
}

void run_pipeline(const PipelineConfig& config)
{
    config.validate();
    for (const auto& stage : kStages)
        if (std::find(config.stages.begin(), config.stages.end(), stage) != config.stages.end())
            run_stage(stage, config);
}

} // namespace mpct
