#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "remi/types.hpp"

namespace remi {

// The dosing rule planted into synthetic cohorts: raise the target when the
// trailing up_window of SAP is high or rising fast, lower it when the
// trailing down_window is low and flat. Conditions are edge-triggered (they
// fire when becoming true) and act after reaction_delay.
struct PlantedPolicy {
    double up_window_s = 120.0;
    double up_sap_threshold = 140.0;   // mmHg, trailing mean
    double up_slope_threshold = 10.0;  // mmHg/min, trailing trend slope
    double down_window_s = 360.0;
    double down_sap_threshold = 116.0; // mmHg, trailing mean
    double down_slope_band = 2.0;      // mmHg/min, |slope| below this counts as flat
    double target_min = 2.0;           // ng/mL
    double target_max = 6.0;
    double step = 0.2;
    double reaction_delay_s = 30.0;
};

struct SimConfig {
    int n_patients = 10;
    std::uint64_t seed = 0;
    double case_duration_s = 10800.0;
    double stimulus_rate_per_h = 6.0; // Poisson rate of pressure surges
    PlantedPolicy policy;
    double noise_sd_sap = 4.0;
    double noise_sd_map = 2.5;
    double noise_sd_dap = 2.0;
    double noise_sd_hr = 3.0;
    double noise_sd_bis = 2.0;
    double grid_step_s = 30.0;
};

// Deterministic in config (patients draw from sub-seeds of the master seed,
// so parallel and serial generation agree). SAP is a mean-reverting process
// plus stimulus surges, attenuated by the current target; MAP/DAP are affine
// in SAP plus noise; HR and BIS are independent mean-reverting processes;
// RemiTarget follows the planted policy; one Incision event at 600 s.
std::vector<PatientRecord> generate_cohort(const SimConfig& config);

// Replays the policy against the stored SAP samples alone and returns every
// (time, signed step) it fires; equals the change log of the stored
// RemiTarget series for any record this simulator generated.
std::vector<std::pair<double, double>> policy_oracle_labels(const PatientRecord& record,
                                                            const PlantedPolicy& policy);

} // namespace remi
