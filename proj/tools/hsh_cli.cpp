#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsh/io.hpp"

namespace {

// Exit codes: 0 success, 2 verification failure, 3 pathology, 4 config error.
constexpr int kExitOk = 0;
constexpr int kExitVerification = 2;
constexpr int kExitPathology = 3;
constexpr int kExitConfig = 4;

struct Options {
    std::string scenario_path;
    std::string out = ".";
    std::uint64_t seed = 0;
    std::size_t budget = 200000;
    std::string target_literal;
    std::vector<std::string> tol_overrides;
};

hsh::Tolerances overridden_tolerances(hsh::Tolerances tol,
                                      const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw hsh::invalid_input_error("tolerance override must be KEY=VALUE: " + kv);
        tol.override(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
    }
    return tol;
}

hsh::Scenario load_with_overrides(const Options& opt) {
    hsh::Scenario sc = hsh::load_scenario(opt.scenario_path);
    sc.tolerances = overridden_tolerances(sc.tolerances, opt.tol_overrides);
    return sc;
}

// Parses "(2,3),(1,2)" (whitespace-tolerant) into a collision sequence target.
hsh::CollisionSequenceTarget parse_target(const std::string& literal) {
    hsh::CollisionSequenceTarget target;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < literal.size() && (literal[pos] == ' ' || literal[pos] == ',')) ++pos;
    };
    while (skip_ws(), pos < literal.size()) {
        if (literal[pos] != '(')
            throw hsh::invalid_input_error("target literal: expected '(' in " + literal);
        const auto close = literal.find(')', pos);
        if (close == std::string::npos)
            throw hsh::invalid_input_error("target literal: unbalanced parenthesis");
        const std::string body = literal.substr(pos + 1, close - pos - 1);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw hsh::invalid_input_error("target literal: pair needs two indices");
        target.push_back({std::stoi(body.substr(0, comma)), std::stoi(body.substr(comma + 1))});
        pos = close + 1;
    }
    if (target.empty()) throw hsh::invalid_input_error("target literal: no pairs in " + literal);
    return target;
}

int cmd_simulate(const Options& opt) {
    hsh::Scenario sc = load_with_overrides(opt);
    auto log = hsh::evolve(sc.initial, sc.horizon, sc.tolerances);
    hsh::write_trajectory_csv_file(log, opt.out + "/trajectory.csv");
    hsh::Json events = hsh::events_to_json(log);
    events["scenario_hash"] = hsh::scenario_hash(sc);
    hsh::save_json(events, opt.out + "/events.json");
    std::printf("simulate: %zu events over horizon %.17g -> %s\n", log.events.size(), sc.horizon,
                opt.out.c_str());
    return kExitOk;
}

int cmd_search(const Options& opt) {
    const auto target = parse_target(opt.target_literal);
    hsh::Scenario sc = hsh::search_collision_sequence(target, opt.seed, opt.budget);
    hsh::save_scenario(sc, opt.out + "/scenario.json");
    std::printf("search: found %zu-collision scenario, horizon %.17g -> %s/scenario.json\n",
                target.size(), sc.horizon, opt.out.c_str());
    return kExitOk;
}

int cmd_partition(const Options& opt) {
    hsh::Scenario sc = load_with_overrides(opt);
    sc.partition = hsh::build_partition(sc);
    hsh::save_scenario(sc, opt.out + "/scenario.json");
    std::printf("partition: %zu intervals -> %s/scenario.json\n", sc.partition.size() - 1,
                opt.out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hard-sphere hierarchy workbench"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", opt.scenario_path, "Scenario JSON path")->required();
        cmd->add_option("--out", opt.out, "Output directory");
        cmd->add_option("--seed", opt.seed, "Master seed");
        cmd->add_option("--tol-override", opt.tol_overrides, "Tolerance override KEY=VALUE");
    };

    auto* simulate = app.add_subcommand("simulate", "Run a scenario; write trajectory + events");
    add_common(simulate, true);
    auto* search = app.add_subcommand("search", "Find a configuration matching a collision sequence");
    add_common(search, false);
    search->add_option("--target", opt.target_literal, "Collision sequence, e.g. (2,3),(1,2)")
        ->required();
    search->add_option("--budget", opt.budget, "Total climb iterations across restarts");
    auto* partition = app.add_subcommand("partition", "Build the interval partition of a scenario");
    add_common(partition, true);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (search->parsed()) return cmd_search(opt);
        if (partition->parsed()) return cmd_partition(opt);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const hsh::pathology_error& e) {
        std::fprintf(stderr, "pathology: %s\n", e.what());
        return kExitPathology;
    } catch (const hsh::invalid_input_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const hsh::error& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return kExitVerification;
    }
}
