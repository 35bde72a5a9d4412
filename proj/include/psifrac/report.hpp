#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace psifrac {

// FNV-1a 64-bit over a byte range; the digest convention for configs and
// search histories. Chain calls by passing the previous digest as the seed.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 14695981039346656037ull);

// One row of a convergence sweep. The leading column is the sweep parameter
// (the penalty epsilon for approximate controllability, the Tikhonov weight
// lambda for the quadratic-cost problem); unused fields stay at their
// defaults for sweeps that do not produce them.
struct SweepRow {
    double eps = 0.0;              // sweep parameter, stored as given
    double endpoint_miss = 0.0;    // simulated ||q(b) - x1||
    double closed_form_miss = 0.0; // ||eps (eps I + R)^{-1} N|| when available
    double energy = 0.0;           // control energy of the synthesized control
    int iterations = 0;            // fixed-point iterations (0 for linear runs)
    bool converged = true;
};

// A sweep table plus provenance. The numeric rows are produced by the module
// that ran the sweep; the meta fields are filled in by the runner when the
// report is serialized.
struct ConvergenceReport {
    std::string kind;           // "sweep", "optimal", "inclusion", ...
    std::vector<SweepRow> rows; // ordered by the sweep parameter, descending
    std::string config_digest;
    std::string timestamp;
    std::string code_version;
};

} // namespace psifrac
