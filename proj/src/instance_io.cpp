#include "naclab/instance_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace naclab {

using nlohmann::json;

Instance Instance::with_defaults(Mdp mdp, std::optional<Matrix> features,
                                 std::optional<Matrix> behavior) {
    FeatureMap fm = features ? FeatureMap(std::move(*features))
                             : FeatureMap::identity(mdp.num_pairs());
    BehaviorPolicy bp = behavior
                            ? BehaviorPolicy(std::move(*behavior))
                            : BehaviorPolicy(uniform_table(mdp.num_states(),
                                                          mdp.num_actions()));
    if (fm.num_rows() != mdp.num_pairs())
        throw ConfigError("features: expected " + std::to_string(mdp.num_pairs()) +
                          " rows, got " + std::to_string(fm.num_rows()));
    if (bp.num_states() != mdp.num_states() || bp.num_actions() != mdp.num_actions())
        throw ConfigError("behavior_policy: shape mismatch with the MDP");
    return Instance{std::move(mdp), std::move(fm), std::move(bp)};
}

namespace {

Matrix parse_matrix(const json& j, const std::string& key, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ConfigError(key + ": expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(key + ": row " + std::to_string(r) + " must have " +
                              std::to_string(cols) + " entries");
        for (int c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ConfigError(key + ": row " + std::to_string(r) +
                                  " entry " + std::to_string(c) + " is not a number");
            m(r, c) = row[c].get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& origin) {
    if (!j.contains(key))
        throw ConfigError(origin + ": missing required key `" + key + "`");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(origin + ": key `" + key + "` has the wrong type");
    }
}

} // namespace

Instance load_instance(std::istream& is, const std::string& origin) {
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    int S = require<int>(j, "num_states", origin);
    int A = require<int>(j, "num_actions", origin);
    if (S < 1 || A < 1) throw ConfigError(origin + ": num_states/num_actions must be >= 1");
    double gamma = require<double>(j, "gamma", origin);

    if (!j.contains("transitions") || !j["transitions"].is_array() ||
        static_cast<int>(j["transitions"].size()) != A)
        throw ConfigError(origin + ": `transitions` must list one SxS matrix per action");
    std::vector<Matrix> trans;
    for (int a = 0; a < A; ++a)
        trans.push_back(parse_matrix(j["transitions"][a],
                                     origin + ": transitions[" + std::to_string(a) + "]",
                                     S, S));
    Matrix rewards = parse_matrix(j.contains("rewards") ? j["rewards"] : json(),
                                  origin + ": rewards", S, A);

    std::optional<Matrix> features;
    if (j.contains("features")) {
        const json& f = j["features"];
        if (!f.is_array() || f.empty() || !f[0].is_array())
            throw ConfigError(origin + ": `features` must be a matrix with |S||A| rows");
        features = parse_matrix(f, origin + ": features", S * A,
                                static_cast<int>(f[0].size()));
    }
    std::optional<Matrix> behavior;
    if (j.contains("behavior_policy"))
        behavior = parse_matrix(j["behavior_policy"], origin + ": behavior_policy", S, A);

    try {
        return Instance::with_defaults(Mdp(std::move(trans), std::move(rewards), gamma),
                                       std::move(features), std::move(behavior));
    } catch (const std::runtime_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

Instance load_instance_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open instance file");
    return load_instance(is, path);
}

void save_instance(const Instance& inst, std::ostream& os) {
    json j;
    j["num_states"] = inst.mdp.num_states();
    j["num_actions"] = inst.mdp.num_actions();
    j["gamma"] = inst.mdp.discount();
    json trans = json::array();
    for (int a = 0; a < inst.mdp.num_actions(); ++a)
        trans.push_back(matrix_to_json(inst.mdp.transition(a)));
    j["transitions"] = std::move(trans);
    j["rewards"] = matrix_to_json(inst.mdp.rewards());
    j["features"] = matrix_to_json(inst.features.matrix());
    j["behavior_policy"] = matrix_to_json(inst.behavior.table());
    os << std::setprecision(17) << j.dump(2) << "\n";
}

std::string instance_hash(const Instance& inst) {
    std::ostringstream os;
    save_instance(inst, os);
    std::string s = os.str();
    // FNV-1a 64-bit over the canonical serialization
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

} // namespace naclab
