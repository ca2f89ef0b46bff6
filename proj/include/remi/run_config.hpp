#pragma once

#include <cstdint>
#include <string>

#include "remi/framing.hpp"
#include "remi/ingestion.hpp"
#include "remi/model_selection.hpp"
#include "remi/simulator.hpp"

namespace remi {

// One experiment, fully described: a data source (exactly one of simulator
// or cohort files), the framing and selection settings and the output
// location. All randomness derives from the single seed.
struct RunConfig {
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int jobs = 1;

    bool has_simulator = false;
    SimConfig simulator;

    bool has_cohort = false;
    CohortSource cohort;

    InclusionCriteria inclusion;
    FramingConfig framing;
    SelectionConfig selection;
    double explain_percentile = 95.0;
};

// key = value lines with [section] headers; '#' lines are comments. Unknown
// sections or keys are errors, as are missing framing window lengths.
// origin names the source in error messages. When no output_dir is given the
// REMI_OUTPUT_DIR environment variable applies, then "out".
RunConfig parse_run_config(const std::string& text, const std::string& origin);

RunConfig load_run_config(const std::string& path);

// Fully resolved echo of the config; parsing it back reproduces the run.
std::string serialize_run_config(const RunConfig& config);

void validate(const RunConfig& config);

} // namespace remi
