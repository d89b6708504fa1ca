#include "htbandit/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace htbandit {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw InvalidInput("config: " + path + ": " + message);
}

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.at(key).is_number()) fail(path + key, "expected a number");
    return obj.at(key).get<double>();
}

long get_integer(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.at(key).is_number_integer()) fail(path + key, "expected an integer");
    return obj.at(key).get<long>();
}

EnvConfig parse_env(const json& e, const std::string& path) {
    if (!e.is_object()) fail(path, "expected an object");
    require_keys(e, path,
                 {"kind", "alpha", "sigma", "means", "arms", "base_mean", "gaps", "optimal_arm",
                  "drift", "mean_pattern"});
    for (const char* key : {"kind", "alpha", "sigma"})
        if (!e.contains(key)) fail(path + "." + key, "missing required key");

    EnvConfig env;
    env.kind = e.at("kind").get<std::string>();
    if (env.kind != "stochastic" && env.kind != "constrained" && env.kind != "adversarial")
        fail(path + ".kind", "must be one of stochastic|constrained|adversarial");
    env.alpha = get_number(e, path + ".", "alpha");
    env.sigma = get_number(e, path + ".", "sigma");
    if (!(env.alpha > 1.0) || !(env.alpha <= 2.0)) fail(path + ".alpha", "must lie in (1, 2]");
    if (!(env.sigma > 0.0)) fail(path + ".sigma", "must be > 0");

    auto reject = [&](const char* key, const std::string& why) {
        if (e.contains(key)) fail(path + "." + key, why);
    };

    if (env.kind == "stochastic") {
        reject("base_mean", "only valid for kind=constrained");
        reject("gaps", "only valid for kind=constrained");
        reject("optimal_arm", "only valid for kind=constrained");
        reject("drift", "only valid for kind=constrained");
        reject("mean_pattern", "only valid for kind=adversarial");
        if (e.contains("means") == e.contains("arms"))
            fail(path, "stochastic environment needs exactly one of means|arms");
        if (e.contains("means")) env.means = e.at("means").get<std::vector<double>>();
        if (e.contains("arms")) {
            std::vector<std::vector<std::pair<double, double>>> arms;
            for (const auto& arm : e.at("arms")) {
                if (!arm.is_object() || !arm.contains("atoms") || arm.size() != 1)
                    fail(path + ".arms", "each arm must be {\"atoms\": [[value, prob], ...]}");
                std::vector<std::pair<double, double>> atoms;
                for (const auto& a : arm.at("atoms")) {
                    if (!a.is_array() || a.size() != 2) fail(path + ".arms.atoms", "expected [value, prob] pairs");
                    atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
                }
                arms.push_back(std::move(atoms));
            }
            env.arms = std::move(arms);
        }
    } else if (env.kind == "constrained") {
        reject("means", "only valid for kind=stochastic");
        reject("arms", "only valid for kind=stochastic");
        reject("mean_pattern", "only valid for kind=adversarial");
        for (const char* key : {"base_mean", "gaps", "optimal_arm"})
            if (!e.contains(key)) fail(path + "." + key, "missing required key");
        env.base_mean = get_number(e, path + ".", "base_mean");
        env.gaps = e.at("gaps").get<std::vector<double>>();
        env.optimal_arm = static_cast<int>(get_integer(e, path + ".", "optimal_arm"));
        if (e.contains("drift")) {
            const auto& d = e.at("drift");
            require_keys(d, path + ".drift", {"amplitude", "period"});
            DriftPattern drift;
            if (d.contains("amplitude")) drift.amplitude = get_number(d, path + ".drift.", "amplitude");
            if (d.contains("period")) drift.period = get_integer(d, path + ".drift.", "period");
            if (!(drift.amplitude >= 0.0)) fail(path + ".drift.amplitude", "must be >= 0");
            if (drift.period < 1) fail(path + ".drift.period", "must be >= 1");
            env.drift = drift;
        }
    } else {  // adversarial
        reject("means", "only valid for kind=stochastic");
        reject("arms", "only valid for kind=stochastic");
        reject("base_mean", "only valid for kind=constrained");
        reject("gaps", "only valid for kind=constrained");
        reject("optimal_arm", "only valid for kind=constrained");
        reject("drift", "only valid for kind=constrained");
        if (!e.contains("mean_pattern")) fail(path + ".mean_pattern", "missing required key");
        env.mean_pattern = e.at("mean_pattern").get<std::vector<std::vector<double>>>();
        if (env.mean_pattern->empty()) fail(path + ".mean_pattern", "must be non-empty");
    }
    return env;
}

}  // namespace

std::vector<long> default_checkpoints(long horizon) {
    std::vector<long> out;
    for (long c = 1; c < horizon; c *= 2) out.push_back(c);
    if (horizon >= 1) out.push_back(horizon);
    return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw InvalidInput(std::string("config: not valid JSON: ") + err.what());
    }
    if (!root.is_object()) throw InvalidInput("config: top level must be an object");
    require_keys(root, "",
                 {"policy", "alpha", "sigma", "T", "K", "replicates", "base_seed", "checkpoints",
                  "write_trace", "output_dir", "env"});
    for (const char* key : {"policy", "T", "K", "replicates", "base_seed", "env"})
        if (!root.contains(key)) fail(key, "missing required key");

    ExperimentConfig config;
    const std::string policy_name = root.at("policy").get<std::string>();
    const auto kind = policy_kind_from_name(policy_name);
    if (!kind) fail("policy", "unknown policy '" + policy_name + "'");
    config.policy = *kind;

    if (config.policy == PolicyKind::Htinf) {
        for (const char* key : {"alpha", "sigma"})
            if (!root.contains(key)) fail(key, "required for policy 'htinf'");
        config.alpha = get_number(root, "", "alpha");
        config.sigma = get_number(root, "", "sigma");
        if (!(*config.alpha > 1.0) || !(*config.alpha <= 2.0)) fail("alpha", "must lie in (1, 2]");
        if (!(*config.sigma > 0.0)) fail("sigma", "must be > 0");
    } else {
        for (const char* key : {"alpha", "sigma"})
            if (root.contains(key))
                fail(key, "not accepted by policy '" + policy_name + "' (htinf only)");
    }

    config.horizon = get_integer(root, "", "T");
    if (config.horizon < 1) fail("T", "must be >= 1");
    config.num_arms = static_cast<int>(get_integer(root, "", "K"));
    if (config.num_arms < 1) fail("K", "must be >= 1");
    config.replicates = static_cast<int>(get_integer(root, "", "replicates"));
    if (config.replicates < 1) fail("replicates", "must be >= 1");
    if (!root.at("base_seed").is_number_unsigned() && !root.at("base_seed").is_number_integer())
        fail("base_seed", "expected an integer");
    config.base_seed = root.at("base_seed").get<std::uint64_t>();

    if (root.contains("checkpoints")) {
        config.checkpoints = root.at("checkpoints").get<std::vector<long>>();
        long prev = 0;
        for (long c : config.checkpoints) {
            if (c <= prev) fail("checkpoints", "must be strictly increasing");
            prev = c;
        }
        if (config.checkpoints.empty() || config.checkpoints.back() != config.horizon)
            fail("checkpoints", "last checkpoint must equal T");
    } else {
        config.checkpoints = default_checkpoints(config.horizon);
    }

    if (root.contains("write_trace")) {
        if (!root.at("write_trace").is_boolean()) fail("write_trace", "expected a boolean");
        config.write_trace = root.at("write_trace").get<bool>();
    }
    if (root.contains("output_dir")) config.output_dir = root.at("output_dir").get<std::string>();

    json env = root.at("env");
    if (env.is_object() && env.contains("file")) {
        require_keys(env, "env", {"file"});
        const std::string rel = env.at("file").get<std::string>();
        const std::string full =
            base_dir.empty() ? rel : (std::filesystem::path(base_dir) / rel).string();
        std::ifstream in(full);
        if (!in) fail("env.file", "cannot open '" + full + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            env = json::parse(buffer.str());
        } catch (const json::parse_error& err) {
            fail("env.file", std::string("not valid JSON: ") + err.what());
        }
    }
    config.env = parse_env(env, "env");

    // Arm-count cross-checks against K.
    const auto check_k = [&](std::size_t n, const std::string& where) {
        if (static_cast<int>(n) != config.num_arms) fail(where, "length must equal K");
    };
    if (config.env.means) check_k(config.env.means->size(), "env.means");
    if (config.env.arms) check_k(config.env.arms->size(), "env.arms");
    if (config.env.gaps) check_k(config.env.gaps->size(), "env.gaps");
    if (config.env.optimal_arm &&
        (*config.env.optimal_arm < 1 || *config.env.optimal_arm > config.num_arms))
        fail("env.optimal_arm", "must lie in [1, K]");
    if (config.env.mean_pattern)
        for (const auto& row : *config.env.mean_pattern) check_k(row.size(), "env.mean_pattern");

    return config;
}

std::string serialize_config(const ExperimentConfig& config) {
    ordered_json root;
    root["policy"] = std::string(policy_kind_name(config.policy));
    if (config.alpha) root["alpha"] = *config.alpha;
    if (config.sigma) root["sigma"] = *config.sigma;
    root["T"] = config.horizon;
    root["K"] = config.num_arms;
    root["replicates"] = config.replicates;
    root["base_seed"] = config.base_seed;
    root["checkpoints"] = config.checkpoints;
    root["write_trace"] = config.write_trace;
    root["output_dir"] = config.output_dir;

    ordered_json env;
    env["kind"] = config.env.kind;
    env["alpha"] = config.env.alpha;
    env["sigma"] = config.env.sigma;
    if (config.env.means) env["means"] = *config.env.means;
    if (config.env.arms) {
        ordered_json arms = ordered_json::array();
        for (const auto& atoms : *config.env.arms) {
            ordered_json arm;
            ordered_json list = ordered_json::array();
            for (const auto& [value, prob] : atoms) list.push_back({value, prob});
            arm["atoms"] = std::move(list);
            arms.push_back(std::move(arm));
        }
        env["arms"] = std::move(arms);
    }
    if (config.env.base_mean) env["base_mean"] = *config.env.base_mean;
    if (config.env.gaps) env["gaps"] = *config.env.gaps;
    if (config.env.optimal_arm) env["optimal_arm"] = *config.env.optimal_arm;
    if (config.env.drift) {
        env["drift"] = {{"amplitude", config.env.drift->amplitude},
                        {"period", config.env.drift->period}};
    }
    if (config.env.mean_pattern) env["mean_pattern"] = *config.env.mean_pattern;
    root["env"] = std::move(env);
    return root.dump(2) + "\n";
}

EnvironmentSpec build_environment(const ExperimentConfig& config) {
    const HeavyTailParams tail(config.env.alpha, config.env.sigma);
    if (config.env.kind == "stochastic") {
        if (config.env.means) return make_stochastic(*config.env.means, tail, config.horizon);
        // Explicit atoms: one stochastic row, gap profile derived when the
        // lowest mean is unique.
        std::vector<LossDistributionSpec> row;
        for (const auto& atoms : *config.env.arms) {
            std::vector<LossDistributionSpec::Atom> list;
            for (const auto& [value, prob] : atoms) list.push_back({value, prob});
            row.push_back(LossDistributionSpec(std::move(list)));
        }
        std::vector<double> means;
        for (const auto& d : row) means.push_back(d.mean());
        std::optional<GapProfile> gaps;
        std::size_t best = 0;
        for (std::size_t i = 1; i < means.size(); ++i)
            if (means[i] < means[best]) best = i;
        bool unique = means.size() > 1;
        for (std::size_t i = 0; i < means.size(); ++i)
            if (i != best && means[i] == means[best]) unique = false;
        if (unique) {
            GapProfile g;
            g.optimal_arm = static_cast<int>(best) + 1;
            for (double m : means) g.deltas.push_back(m - means[best]);
            gaps = std::move(g);
        }
        return EnvironmentSpec(EnvKind::Stochastic, config.horizon, {std::move(row)}, tail,
                               std::move(gaps));
    }
    if (config.env.kind == "constrained") {
        GapProfile gaps;
        gaps.optimal_arm = *config.env.optimal_arm;
        gaps.deltas = *config.env.gaps;
        return make_constrained_schedule(config.num_arms, config.horizon, gaps,
                                         *config.env.base_mean,
                                         config.env.drift.value_or(DriftPattern{}), tail);
    }
    return make_adversarial(*config.env.mean_pattern, tail, config.horizon);
}

}  // namespace htbandit
