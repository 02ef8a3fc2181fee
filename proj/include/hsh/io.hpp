#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hsh/dynamics.hpp"
#include "hsh/scenarios.hpp"

namespace hsh {

//! Version stamp carried by every file this library reads or writes. A
//! mismatch is a hard error, never a silent default.
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

inline void check_schema(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("schema_version"))
        throw invalid_input_error(what + ": missing schema_version");
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw invalid_input_error(what + ": unsupported schema_version " +
                                  j.at("schema_version").dump());
}

inline Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3)
        throw invalid_input_error("vector literal must be an array of three numbers");
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Json to_json(const Tolerances& tol) {
    Json j;
    j["conservation_rel"] = tol.conservation_rel;
    j["involution"] = tol.involution;
    j["grazing"] = tol.grazing;
    j["simultaneity"] = tol.simultaneity;
    j["overlap_slack"] = tol.overlap_slack;
    j["min_gap_slack"] = tol.min_gap_slack;
    j["reversibility"] = tol.reversibility;
    j["semigroup"] = tol.semigroup;
    j["event_vs_oracle"] = tol.event_vs_oracle;
    j["oracle_step"] = tol.oracle_step;
    j["theorem_residual"] = tol.theorem_residual;
    j["composed_semigroup"] = tol.composed_semigroup;
    j["audit_match"] = tol.audit_match;
    j["jacobian_n1"] = tol.jacobian_n1;
    j["jacobian_n2"] = tol.jacobian_n2;
    j["fd_step"] = tol.fd_step;
    j["kernel_min"] = tol.kernel_min;
    j["ebf_round_trip"] = tol.ebf_round_trip;
    j["enskog_half_rel"] = tol.enskog_half_rel;
    j["renormalized_residual"] = tol.renormalized_residual;
    j["coincidence"] = tol.coincidence;
    j["endpoint_separation"] = tol.endpoint_separation;
    j["partition_margin"] = tol.partition_margin;
    j["event_cap"] = tol.event_cap;
    j["branch_cap"] = tol.branch_cap;
    return j;
}

//! Reads a tolerance block: defaults overridden key by key, so an unknown key
//! is a hard error and a partial block is completed with the pinned values.
inline Tolerances tolerances_from_json(const Json& j) {
    Tolerances tol;
    if (j.is_null()) return tol;
    if (!j.is_object()) throw invalid_input_error("tolerances must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        tol.override(it.key(), it.value().get<double>());
    return tol;
}

inline Json to_json(const Scenario& sc) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["epsilon"] = sc.initial.epsilon;
    j["horizon"] = sc.horizon;
    Json particles = Json::array();
    for (const auto& p : sc.initial.particles) {
        Json row;
        row["x"] = to_json(p.x);
        row["v"] = to_json(p.v);
        particles.push_back(std::move(row));
    }
    j["particles"] = std::move(particles);
    j["partition"] = sc.partition;
    j["seed"] = sc.seed;
    j["tolerances"] = to_json(sc.tolerances);
    return j;
}

inline Scenario scenario_from_json(const Json& j) {
    check_schema(j, "scenario");
    Scenario sc;
    sc.initial.epsilon = j.at("epsilon").get<double>();
    if (!(sc.initial.epsilon > 0.0)) throw invalid_input_error("scenario: epsilon must be positive");
    sc.horizon = j.at("horizon").get<double>();
    if (!(sc.horizon > 0.0)) throw invalid_input_error("scenario: horizon must be positive");
    if (!j.at("particles").is_array() || j.at("particles").empty())
        throw invalid_input_error("scenario: particles must be a non-empty array");
    for (const auto& row : j.at("particles"))
        sc.initial.particles.push_back({vec3_from_json(row.at("x")), vec3_from_json(row.at("v"))});
    if (j.contains("partition"))
        for (const auto& b : j.at("partition")) sc.partition.push_back(b.get<double>());
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
    sc.tolerances = tolerances_from_json(j.contains("tolerances") ? j.at("tolerances") : Json());
    return sc;
}

//! Canonical file rendering: two-space indent plus a trailing newline, so the
//! same scenario always writes the same bytes.
inline std::string render(const Json& j) { return j.dump(2) + "\n"; }

inline void save_json(const Json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw invalid_input_error("cannot open for writing: " + path);
    os << render(j);
}

inline Json load_json(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw invalid_input_error("cannot open for reading: " + path);
    return Json::parse(is);
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
    save_json(to_json(sc), path);
}

inline Scenario load_scenario(const std::string& path) {
    return scenario_from_json(load_json(path));
}

//! Identity of a scenario for reports: FNV-1a over the canonical rendering.
inline std::uint64_t scenario_hash(const Scenario& sc) { return fnv1a64(render(to_json(sc))); }

inline Json to_json(const CollisionEvent& e) {
    Json j;
    j["time"] = e.time;
    j["i"] = e.i;
    j["k"] = e.k;
    j["omega"] = to_json(e.omega);
    j["vi_before"] = to_json(e.vi_before);
    j["vk_before"] = to_json(e.vk_before);
    j["vi_after"] = to_json(e.vi_after);
    j["vk_after"] = to_json(e.vk_after);
    return j;
}

//! Event report of a run: initial data, horizon, and the processed collisions.
inline Json events_to_json(const TrajectoryLog& log) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["epsilon"] = log.initial.epsilon;
    j["horizon"] = log.horizon;
    j["events"] = Json::array();
    for (const auto& e : log.events) j["events"].push_back(to_json(e));
    return j;
}

}  // namespace hsh
