// SPDX-License-Identifier: Apache-2.0

#include "mpct/io.hpp"

#include "mpct/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mpct
{

namespace
{

constexpr std::size_t kHeaderBytes = 4 + 2 + 8 + 8 + 4 + 8 + 2 + 8 + 8 + 4;

template <typename T>
void put(std::string& out, T value)
{
    static_assert(std::endian::native == std::endian::little, "WCIR writer assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader
{
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what)
    {
        if (pos_ + sizeof(T) > bytes_.size())
            throw ParseError(std::string("truncated WCIR file reading ") + what, pos_);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string format_double(double v)
{
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_or_neg_inf(const json& j)
{
    return j.is_null() ? kNegInf : j.get<double>();
}

void check_schema(const json& j, const char* what)
{
    if (!j.is_object() || !j.contains("schema_version"))
        throw ParseError(std::string(what) + ": missing schema_version", 0);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw ParseError(std::string(what) + ": unsupported schema_version", 0);
}

} // namespace

std::string encode_dataset(const Dataset& dataset)
{
    const auto& c = dataset.config;
    c.validate();
    if (dataset.snapshots.size() != c.num_snapshots())
        throw std::invalid_argument("encode_dataset: snapshot count does not match the configuration");
    std::string out;
    out.reserve(kHeaderBytes + dataset.snapshots.size() * c.seq_len * 8);
    out.append("WCIR", 4);
    put<std::uint16_t>(out, kWcirVersion);
    put<double>(out, c.carrier_hz);
    put<double>(out, c.bandwidth_hz);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.seq_len));
    put<double>(out, c.delay_bin_s);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(c.snapshots_per_set));
    put<double>(out, c.snapshot_period_s);
    put<double>(out, c.set_period_s);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.num_sets));
    for (const auto& s : dataset.snapshots)
    {
        if (s.samples.size() != c.seq_len)
            throw std::invalid_argument("encode_dataset: snapshot length mismatch");
        for (const auto& v : s.samples)
        {
            put<float>(out, static_cast<float>(v.real()));
            put<float>(out, static_cast<float>(v.imag()));
        }
    }
    return out;
}

Dataset decode_dataset(std::string_view bytes)
{
    Reader r(bytes);
    if (bytes.size() < 4 || bytes.substr(0, 4) != "WCIR")
        throw ParseError("bad WCIR magic", 0);
    r.get<std::uint32_t>("magic");
    const std::size_t version_at = r.offset();
    if (r.get<std::uint16_t>("version") != kWcirVersion)
        throw ParseError("unsupported WCIR version", version_at);
    Dataset ds;
    auto& c = ds.config;
    c.carrier_hz = r.get<double>("carrier");
    c.bandwidth_hz = r.get<double>("bandwidth");
    c.seq_len = r.get<std::uint32_t>("sequence length");
    c.delay_bin_s = r.get<double>("delay bin");
    c.snapshots_per_set = r.get<std::uint16_t>("snapshots per set");
    c.snapshot_period_s = r.get<double>("snapshot period");
    c.set_period_s = r.get<double>("set period");
    c.num_sets = r.get<std::uint32_t>("set count");
    const std::size_t header_end = r.offset();
    try
    {
        c.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ParseError(e.what(), header_end);
    }
    const std::size_t expected = c.num_snapshots() * c.seq_len * 8;
    if (r.remaining() != expected)
        throw ParseError("WCIR payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                             std::to_string(expected),
                         header_end);
    ds.snapshots.reserve(c.num_snapshots());
    for (std::size_t n = 0; n < c.num_snapshots(); ++n)
    {
        CirSnapshot s;
        s.snapshot_index = n;
        s.timestamp_s = c.timestamp(n);
        s.samples.resize(c.seq_len);
        for (auto& v : s.samples)
        {
            const std::size_t at = r.offset();
            const float re = r.get<float>("sample");
            const float im = r.get<float>("sample");
            if (!std::isfinite(re) || !std::isfinite(im))
                throw ParseError("non-finite sample", at);
            v = cplx(re, im);
        }
        ds.snapshots.push_back(std::move(s));
    }
    return ds;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path)
{
    write_text(path, encode_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path)
{
    return decode_dataset(read_text(path));
}

json parse_json(std::string_view text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ParseError(e.what(), e.byte);
    }
}

json to_json(const SounderConfig& c)
{
    return {{"carrier_hz", c.carrier_hz},
            {"bandwidth_hz", c.bandwidth_hz},
            {"delay_bin_s", c.delay_bin_s},
            {"seq_len", c.seq_len},
            {"snapshot_period_s", c.snapshot_period_s},
            {"snapshots_per_set", c.snapshots_per_set},
            {"set_period_s", c.set_period_s},
            {"num_sets", c.num_sets}};
}

json to_json(const DetectedMpc& m)
{
    return {{"re", m.gain.real()}, {"im", m.gain.imag()}, {"delay_s", m.delay_s}, {"gain_db", m.gain_db()},
            {"phase_rad", m.phase_rad}};
}

json to_json(const Track& t)
{
    json states = json::array();
    for (const auto& s : t.states)
        states.push_back({finite_or_null(s.gain_db), s.delay_s});
    json members = json::array();
    for (auto m : t.members)
        members.push_back(m == kCoasted ? json(nullptr) : json(m));
    return {{"id", t.id},
            {"start_snapshot", t.start_snapshot},
            {"lifetime", t.lifetime()},
            {"doppler_hz", t.doppler_hz},
            {"states", states},
            {"members", members}};
}

json to_json(const SetSummary& s)
{
    return {{"mean_gain_db", s.mean_gain_db}, {"mean_delay_s", s.mean_delay_s}, {"lifetime", s.lifetime},
            {"doppler_hz", s.doppler_hz},     {"set_index", s.set_index},       {"source_track_id", s.source_track_id},
            {"power", s.power}};
}

json to_json(const Association& a)
{
    return {{"from", a.from},
            {"to", a.to},
            {"tier_s", a.tier_s},
            {"forward_error_s", a.forward_error_s},
            {"backward_error_s", a.backward_error_s}};
}

json to_json(const GroundTruthMpc& t)
{
    json delays = t.delays_s;
    json gains = json::array();
    for (const auto& g : t.gains)
        gains.push_back({g.real(), g.imag()});
    json j = {{"birth", t.birth}, {"delays_s", delays}, {"gains", gains}};
    if (!t.rounding_s.empty())
        j["rounding_s"] = t.rounding_s;
    return j;
}

json to_json(const Cdf& c)
{
    return {{"x", c.x}, {"p", c.p}};
}

json to_json(const PowerLossLedger& l)
{
    return {{"detection_loss_db", finite_or_null(l.detection_loss_db)},
            {"short_term_loss_db", finite_or_null(l.short_term_loss_db)},
            {"non_full_lifetime_fraction", l.non_full_lifetime_fraction},
            {"long_term_unassociated_fraction", l.long_term_unassociated_fraction},
            {"total_db", finite_or_null(l.total_db)}};
}

json detections_json(std::span<const std::vector<DetectedMpc>> detections)
{
    json snaps = json::array();
    for (const auto& d : detections)
    {
        json list = json::array();
        for (const auto& m : d)
            list.push_back(to_json(m));
        snaps.push_back(list);
    }
    return {{"schema_version", kSchemaVersion}, {"snapshots", snaps}};
}

std::vector<std::vector<DetectedMpc>> detections_from_json(const json& j)
{
    check_schema(j, "detections");
    std::vector<std::vector<DetectedMpc>> out;
    for (std::size_t n = 0; n < j.at("snapshots").size(); ++n)
    {
        std::vector<DetectedMpc> list;
        for (const auto& m : j.at("snapshots")[n])
        {
            DetectedMpc d;
            d.gain = cplx(m.at("re").get<double>(), m.at("im").get<double>());
            d.delay_s = m.at("delay_s").get<double>();
            d.phase_rad = m.at("phase_rad").get<double>();
            d.snapshot_index = n;
            list.push_back(d);
        }
        out.push_back(std::move(list));
    }
    return out;
}

std::vector<Track> tracks_from_json(const json& j)
{
    std::vector<Track> out;
    for (const auto& tj : j)
    {
        Track t;
        t.id = tj.at("id").get<std::size_t>();
        t.start_snapshot = tj.at("start_snapshot").get<std::size_t>();
        t.doppler_hz = tj.at("doppler_hz").get<double>();
        for (const auto& s : tj.at("states"))
            t.states.push_back({number_or_neg_inf(s.at(0)), s.at(1).get<double>()});
        for (const auto& m : tj.at("members"))
            t.members.push_back(m.is_null() ? kCoasted : m.get<std::size_t>());
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::vector<SetSummary>> summaries_from_json(const json& j)
{
    check_schema(j, "summaries");
    std::vector<std::vector<SetSummary>> out;
    for (const auto& set : j.at("sets"))
    {
        std::vector<SetSummary> list;
        for (const auto& s : set)
        {
            SetSummary x;
            x.mean_gain_db = s.at("mean_gain_db").get<double>();
            x.mean_delay_s = s.at("mean_delay_s").get<double>();
            x.lifetime = s.at("lifetime").get<std::size_t>();
            x.doppler_hz = s.at("doppler_hz").get<double>();
            x.set_index = s.at("set_index").get<std::size_t>();
            x.source_track_id = s.at("source_track_id").get<std::size_t>();
            x.power = s.at("power").get<double>();
            list.push_back(x);
        }
        out.push_back(std::move(list));
    }
    return out;
}

std::vector<std::vector<Association>> associations_from_json(const json& j)
{
    check_schema(j, "associations");
    std::vector<std::vector<Association>> out;
    for (const auto& b : j.at("boundaries"))
    {
        std::vector<Association> list;
        for (const auto& a : b)
            list.push_back({a.at("from").get<std::size_t>(), a.at("to").get<std::size_t>(), a.at("tier_s").get<double>(),
                            a.at("forward_error_s").get<double>(), a.at("backward_error_s").get<double>()});
        out.push_back(std::move(list));
    }
    return out;
}

std::vector<GroundTruthMpc> truth_from_json(const json& j)
{
    check_schema(j, "truth");
    std::vector<GroundTruthMpc> out;
    for (const auto& tj : j.at("mpcs"))
    {
        GroundTruthMpc t;
        t.birth = tj.at("birth").get<std::size_t>();
        t.delays_s = tj.at("delays_s").get<std::vector<double>>();
        for (const auto& g : tj.at("gains"))
            t.gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
        if (tj.contains("rounding_s"))
            t.rounding_s = tj.at("rounding_s").get<std::vector<double>>();
        out.push_back(std::move(t));
    }
    return out;
}

std::string eval_csv(std::span<const EvalCurvePoint> points)
{
    std::ostringstream os;
    os << "# schema_version=" << kSchemaVersion << "\n";
    os << "mpc_power_db,windowing,algorithm,num_tracks_detected,mean_delay_error_s,seeds,seeds_with_two,min_tracks,"
          "max_tracks\n";
    for (const auto& p : points)
        os << format_double(p.mpc_power_db) << ',' << (p.windowing ? "on" : "off") << ','
           << algorithm_name(p.algorithm) << ',' << format_double(p.num_tracks_detected) << ','
           << format_double(p.mean_delay_error_s) << ',' << p.seeds << ',' << p.seeds_with_two << ','
           << p.min_tracks << ',' << p.max_tracks << '\n';
    return os.str();
}

std::string gains_csv(const GainSeries& series)
{
    std::ostringstream os;
    os << "# schema_version=" << kSchemaVersion << "\n";
    os << "snapshot,original_db,detected_db";
    for (const auto& [name, v] : series.tracked_db)
        os << ",tracked_" << name << "_db";
    for (const auto& [name, v] : series.tracked_db)
        os << ",loss_" << name << "_db";
    os << '\n';
    std::map<std::string, std::vector<double>> losses;
    for (const auto& [name, v] : series.tracked_db)
        losses[name] = series.loss_db(name);
    for (std::size_t n = 0; n < series.original_db.size(); ++n)
    {
        os << n << ',' << format_double(series.original_db[n]) << ',' << format_double(series.detected_db[n]);
        for (const auto& [name, v] : series.tracked_db)
            os << ',' << format_double(v[n]);
        for (const auto& [name, v] : losses)
            os << ',' << format_double(v[n]);
        os << '\n';
    }
    return os.str();
}

} // namespace mpct
