#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "hsh/errors.hpp"

namespace hsh {

// Every numeric threshold used by the library, pinned in one place. Scale
// conventions are part of each entry's contract:
//   grazing        : |omega.V| < grazing * (1 + |V|)          classifies a contact as grazing
//   simultaneity   : two event times within simultaneity*(1+t) are simultaneous
//   overlap_slack  : gap >= -overlap_slack * epsilon           accepted as "touching"
//   min_gap_slack  : sampled gaps must stay >= epsilon*(1 - min_gap_slack)
// The rest are plain absolute or relative bounds named after the check that
// consumes them.
struct Tolerances {
    double conservation_rel = 1e-12;   // momentum/energy drift, relative
    double involution = 1e-12;         // scatter twice == identity
    double grazing = 1e-10;
    double simultaneity = 1e-11;
    double overlap_slack = 1e-12;
    double min_gap_slack = 1e-9;
    double reversibility = 1e-8;       // forward-then-backward round trip
    double semigroup = 1e-9;           // evolve(t1+t2) vs evolve(t1);evolve(t2)
    double event_vs_oracle = 1e-8;     // event times vs dense-stepping oracle, * t
    double oracle_step = 1e-6;         // oracle step, * t
    double theorem_residual = 1e-9;    // hierarchy identity residual, * scale
    double composed_semigroup = 1e-8;  // interval-composed expansion vs direct
    double audit_match = 1e-8;         // endpoint matching in the cancellation audit
    double jacobian_n1 = 1e-5;         // |det| relative error, one creation
    double jacobian_n2 = 1e-4;         // |det| relative error, two creations
    double fd_step = 1e-6;             // central-difference step
    double kernel_min = 1e-6;          // |kernel factor| floor for jacobian sampling
    double ebf_round_trip = 1e-9;
    double enskog_half_rel = 1e-3;     // the -1/2 contraction value, relative
    double renormalized_residual = 1e-9;
    double coincidence = 1e-9;         // contact times within coincidence*(1+t) coincide
    double endpoint_separation = 1e-6; // distinct branch endpoints must differ by more
    double partition_margin = 1e-10;   // minimal usable interval margin, * t
    std::int64_t event_cap = 10000;
    std::int64_t branch_cap = 4096;

    // Applies "name=value" overrides; unknown names are a hard error.
    void override(const std::string& name, double value);
};

inline void Tolerances::override(const std::string& name, double value) {
    static const std::map<std::string, double Tolerances::*> keys = {
        {"conservation_rel", &Tolerances::conservation_rel},
        {"involution", &Tolerances::involution},
        {"grazing", &Tolerances::grazing},
        {"simultaneity", &Tolerances::simultaneity},
        {"overlap_slack", &Tolerances::overlap_slack},
        {"min_gap_slack", &Tolerances::min_gap_slack},
        {"reversibility", &Tolerances::reversibility},
        {"semigroup", &Tolerances::semigroup},
        {"event_vs_oracle", &Tolerances::event_vs_oracle},
        {"oracle_step", &Tolerances::oracle_step},
        {"theorem_residual", &Tolerances::theorem_residual},
        {"composed_semigroup", &Tolerances::composed_semigroup},
        {"audit_match", &Tolerances::audit_match},
        {"jacobian_n1", &Tolerances::jacobian_n1},
        {"jacobian_n2", &Tolerances::jacobian_n2},
        {"fd_step", &Tolerances::fd_step},
        {"kernel_min", &Tolerances::kernel_min},
        {"ebf_round_trip", &Tolerances::ebf_round_trip},
        {"enskog_half_rel", &Tolerances::enskog_half_rel},
        {"renormalized_residual", &Tolerances::renormalized_residual},
        {"coincidence", &Tolerances::coincidence},
        {"endpoint_separation", &Tolerances::endpoint_separation},
        {"partition_margin", &Tolerances::partition_margin},
    };
    if (name == "event_cap") {
        event_cap = static_cast<std::int64_t>(value);
        return;
    }
    if (name == "branch_cap") {
        branch_cap = static_cast<std::int64_t>(value);
        return;
    }
    auto it = keys.find(name);
    if (it == keys.end()) throw invalid_input_error("unknown tolerance key: " + name);
    this->*(it->second) = value;
}

}  // namespace hsh
