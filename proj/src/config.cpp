#include "rydmimo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rydmimo {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + it.key() + ": unknown field");
}

template <typename T> T get_field(const json& obj, const std::string& key, const std::string& path, T fallback)
{
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + key + ": wrong type");
    }
}

template <typename T> T require_field(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.contains(key))
        throw ConfigError(path + key + ": required field missing");
    return get_field<T>(obj, key, path, T{});
}

CurveKind parse_kind(const std::string& s, const std::string& path)
{
    for (CurveKind k : {CurveKind::Rydberg, CurveKind::UpaPC, CurveKind::NonUpaPC, CurveKind::IdealDigitalReuse,
                        CurveKind::IdealDigitalNoReuse})
        if (to_string(k) == s)
            return k;
    throw ConfigError(path + ": unknown curve kind '" + s + "'");
}

SweepAxis parse_axis(const std::string& s, const std::string& path)
{
    for (SweepAxis a : {SweepAxis::Snr, SweepAxis::Chains, SweepAxis::LoDepth, SweepAxis::Iteration})
        if (to_string(a) == s)
            return a;
    throw ConfigError(path + ": unknown sweep axis '" + s + "'");
}

SolverChoice parse_solver(const std::string& s, const std::string& path)
{
    if (s == "auto")
        return SolverChoice::Auto;
    if (s == "altmin")
        return SolverChoice::AltMin;
    if (s == "direct")
        return SolverChoice::Direct;
    throw ConfigError(path + ": unknown solver '" + s + "'");
}

std::string solver_name(SolverChoice s)
{
    switch (s) {
    case SolverChoice::Auto: return "auto";
    case SolverChoice::AltMin: return "altmin";
    case SolverChoice::Direct: return "direct";
    }
    return "auto";
}

} // namespace

ExperimentSpec spec_from_json(const json& doc)
{
    if (!doc.is_object())
        throw ConfigError("<root>: expected a JSON object");
    reject_unknown(doc, {"name", "channel", "n_blocks", "n_streams", "snr_db", "sweep", "trials", "seed",
                         "optimizer", "curves", "threads"},
                   "");

    ExperimentSpec spec;
    spec.name = get_field<std::string>(doc, "name", "", spec.name);

    if (doc.contains("channel")) {
        const json& ch = doc.at("channel");
        if (!ch.is_object())
            throw ConfigError("channel: expected an object");
        reject_unknown(ch, {"n_tx", "n_clusters", "n_rays", "cluster_powers", "angular_spread_deg", "block_spacing",
                            "intra_spacing", "tx_spacing"},
                       "channel.");
        auto& c = spec.channel;
        c.n_tx = get_field<long>(ch, "n_tx", "channel.", c.n_tx);
        c.n_clusters = get_field<long>(ch, "n_clusters", "channel.", c.n_clusters);
        c.n_rays = get_field<long>(ch, "n_rays", "channel.", c.n_rays);
        c.cluster_powers = get_field<std::vector<double>>(
            ch, "cluster_powers", "channel.",
            std::vector<double>(static_cast<std::size_t>(std::max<long>(c.n_clusters, 0)), 1.0));
        c.angular_spread_deg = get_field<double>(ch, "angular_spread_deg", "channel.", c.angular_spread_deg);
        c.block_spacing = get_field<double>(ch, "block_spacing", "channel.", c.block_spacing);
        c.intra_spacing = get_field<double>(ch, "intra_spacing", "channel.", 0.1 * c.block_spacing);
        c.tx_spacing = get_field<double>(ch, "tx_spacing", "channel.", c.tx_spacing);
    }

    spec.n_blocks = get_field<long>(doc, "n_blocks", "", spec.n_blocks);
    spec.n_streams = get_field<long>(doc, "n_streams", "", spec.n_streams);
    spec.snr_db = get_field<std::vector<double>>(doc, "snr_db", "", spec.snr_db);
    spec.trials = get_field<long>(doc, "trials", "", spec.trials);
    spec.seed = get_field<std::uint64_t>(doc, "seed", "", spec.seed);
    spec.threads = get_field<unsigned>(doc, "threads", "", spec.threads);

    if (doc.contains("sweep")) {
        const json& sw = doc.at("sweep");
        if (!sw.is_object())
            throw ConfigError("sweep: expected an object");
        reject_unknown(sw, {"axis", "values"}, "sweep.");
        if (sw.contains("axis"))
            spec.axis = parse_axis(get_field<std::string>(sw, "axis", "sweep.", ""), "sweep.axis");
        spec.sweep_values = get_field<std::vector<double>>(sw, "values", "sweep.", {});
    }

    if (doc.contains("optimizer")) {
        const json& op = doc.at("optimizer");
        if (!op.is_object())
            throw ConfigError("optimizer: expected an object");
        reject_unknown(op, {"epsilon", "max_iterations", "finite_start"}, "optimizer.");
        spec.optimizer.epsilon = get_field<double>(op, "epsilon", "optimizer.", spec.optimizer.epsilon);
        spec.optimizer.max_iterations =
            get_field<long>(op, "max_iterations", "optimizer.", spec.optimizer.max_iterations);
        const auto start = get_field<std::string>(op, "finite_start", "optimizer.", "warm");
        if (start == "warm")
            spec.optimizer.finite_start = FiniteStart::ContinuousWarmStart;
        else if (start == "random")
            spec.optimizer.finite_start = FiniteStart::Random;
        else
            throw ConfigError("optimizer.finite_start: expected \"warm\" or \"random\"");
    }

    if (!doc.contains("curves") || !doc.at("curves").is_array())
        throw ConfigError("curves: required array missing");
    const json& curves = doc.at("curves");
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const std::string path = "curves[" + std::to_string(i) + "].";
        const json& cj = curves[i];
        if (!cj.is_object())
            throw ConfigError(path.substr(0, path.size() - 1) + ": expected an object");
        reject_unknown(cj, {"label", "kind", "lo_depth", "apd_depth", "bits", "solver"}, path);
        CurveSpec c;
        c.kind = parse_kind(get_field<std::string>(cj, "kind", path, "rydberg"), path + "kind");
        c.label = get_field<std::string>(cj, "label", path, to_string(c.kind));
        c.lo_depth = get_field<long>(cj, "lo_depth", path, 1);
        c.apd_depth = get_field<long>(cj, "apd_depth", path, 1);
        if (cj.contains("bits") && !cj.at("bits").is_null()) {
            const int bits = get_field<int>(cj, "bits", path, 0);
            if (bits < 1 || bits > 30)
                throw ConfigError(path + "bits: must be in [1, 30] or null for continuous phases");
            c.resolution = PhaseResolution::finite(bits);
        }
        c.solver = parse_solver(get_field<std::string>(cj, "solver", path, "auto"), path + "solver");
        spec.curves.push_back(c);
    }
    return spec;
}

json spec_to_json(const ExperimentSpec& spec)
{
    json doc;
    doc["name"] = spec.name;
    doc["channel"] = {{"n_tx", spec.channel.n_tx},
                      {"n_clusters", spec.channel.n_clusters},
                      {"n_rays", spec.channel.n_rays},
                      {"cluster_powers", spec.channel.cluster_powers},
                      {"angular_spread_deg", spec.channel.angular_spread_deg},
                      {"block_spacing", spec.channel.block_spacing},
                      {"intra_spacing", spec.channel.intra_spacing},
                      {"tx_spacing", spec.channel.tx_spacing}};
    doc["n_blocks"] = spec.n_blocks;
    doc["n_streams"] = spec.n_streams;
    doc["snr_db"] = spec.snr_db;
    doc["sweep"] = {{"axis", to_string(spec.axis)}, {"values", spec.sweep_values}};
    doc["trials"] = spec.trials;
    doc["seed"] = spec.seed;
    doc["optimizer"] = {
        {"epsilon", spec.optimizer.epsilon},
        {"max_iterations", spec.optimizer.max_iterations},
        {"finite_start", spec.optimizer.finite_start == FiniteStart::Random ? "random" : "warm"}};
    json curves = json::array();
    for (const auto& c : spec.curves) {
        json cj = {{"label", c.label},
                   {"kind", to_string(c.kind)},
                   {"lo_depth", c.lo_depth},
                   {"apd_depth", c.apd_depth},
                   {"solver", solver_name(c.solver)}};
        cj["bits"] = c.resolution.bits ? json(*c.resolution.bits) : json(nullptr);
        curves.push_back(cj);
    }
    doc["curves"] = curves;
    return doc;
}

ExperimentSpec parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: malformed JSON in '" + path.string() + "': " + e.what());
    }
    ExperimentSpec spec = spec_from_json(doc);
    try {
        spec.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

} // namespace rydmimo
