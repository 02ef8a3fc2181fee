#pragma once

#include <stdexcept>
#include <string>

namespace hsh {

// Base class for every failure the library can signal. Catching hsh::error is
// enough to map any internal failure onto a process exit code.
struct error : std::runtime_error {
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// A configuration violates the pairwise non-overlap constraint.
struct overlap_error : error {
    using error::error;
};

// Malformed argument: non-unit contact normal, non-positive horizon, bad
// literal syntax, schema mismatch, and similar caller mistakes.
struct invalid_input_error : error {
    using error::error;
};

// An event budget was exhausted (event cap, branch cap, search budget).
struct runaway_error : error {
    using error::error;
};

// Backward reconstruction asked for a preimage that does not exist.
struct no_preimage_error : error {
    using error::error;
};

// A hierarchy term was requested at an ambiguous point (coincident contact
// times with no regularization policy to resolve them).
struct ambiguity_error : error {
    using error::error;
};

// A term's endpoint has no well-defined value (tangential required contact,
// the degenerate triple-contact family).
struct undefined_endpoint_error : error {
    using error::error;
};

// A finite-difference sample straddled a discontinuity of the flow map and
// must be re-drawn.
struct degenerate_sample_error : error {
    using error::error;
};

// Monte Carlo rejection rate implausibly high: the sampler does not match the
// phase-space constraints.
struct sampler_mismatch_error : error {
    using error::error;
};

// No interval partition with the required properties exists for the scenario.
struct invalid_partition_error : error {
    using error::error;
};

// A randomized search exhausted its budget without meeting its target.
struct not_found_error : error {
    using error::error;
};

}  // namespace hsh
