#pragma once

#include <string>
#include <vector>

#include "remi/types.hpp"

namespace remi {

// Cohort tables on disk:
//   vitals:  patient_id,time_s,signal,value
//   statics: patient_id,age,bmi,asa,sex,duration_s,invasive_ap,tci_remi
//   events:  patient_id,time_s,event,drug   (drug empty except BOLUS)
// sex is F or M; invasive_ap/tci_remi are 0/1.

struct CohortSource {
    std::string vitals_path;
    std::string statics_path;
    std::string events_path;
    double grid_step_s = 30.0;
    // Records whose SAP/MAP/DAP raw samples cover less of the case duration
    // than this fraction (counted as grid bins holding at least one raw
    // sample, before any carry-forward fill) are dropped.
    double min_ap_coverage = 0.9;
};

struct LoadReport {
    std::vector<std::string> dropped; // "<id>: <why>" for records not returned
};

// Reads the three tables, assembles one record per statics row sorted by
// patient id, applies the coverage policy, resamples every series onto the
// grid and drops records that fail validation (reasons logged, not fatal).
// Schema problems are hard errors naming file, line and column.
std::vector<PatientRecord> load_cohort(const CohortSource& source, LoadReport* report = nullptr);

// Uniform grid at multiples of step covering the input span. Level signals
// average their samples over [t, t+step) bins, empty bins carry the previous
// value forward, and the grid ends at floor(t_max/step). The target series is
// a setpoint, so it takes the last observation at or before each grid point
// instead (leading gap backfilled with the first value) and the grid extends
// to ceil(t_max/step) so the final step is representable. Idempotent on
// already-gridded input.
VitalSeries resample_series(const VitalSeries& series, double grid_step_s);

struct InclusionCriteria {
    double min_duration_s = 5400.0;
    int min_age = 18; // strict: kept when age > min_age
    bool require_invasive_ap = true;
    bool require_tci_remi = true;
    // Case-insensitive match against Bolus drug names; empty list disables
    // the bolus exclusion.
    std::vector<std::string> confounder_drugs = {
        "propofol", "midazolam", "fentanyl", "ephedrine",
        "phenylephrine", "epinephrine", "sufentanil",
    };
};

struct InclusionDecision {
    std::string patient_id;
    bool included = true;
    std::string reason; // first failed criterion
};

// Checks in order: min_duration, min_age, invasive_ap, tci_remi,
// confounder_bolus. Never increases the record count.
std::vector<InclusionDecision> apply_inclusion(const std::vector<PatientRecord>& records,
                                               const InclusionCriteria& criteria);

std::vector<PatientRecord> filter_included(std::vector<PatientRecord> records,
                                           const std::vector<InclusionDecision>& decisions);

// Cuts every series, the events and the duration at the first ECC start,
// keeping samples at the cut point and removing the ECC event itself.
// Records without ECC pass through unchanged.
PatientRecord truncate_at_ecc(PatientRecord record);

// Fraction of grid bins over [0, duration) holding at least one sample.
double grid_coverage(const VitalSeries& series, double duration_s, double grid_step_s);

std::string cohort_vitals_csv(const std::vector<PatientRecord>& records);
std::string cohort_statics_csv(const std::vector<PatientRecord>& records);
std::string cohort_events_csv(const std::vector<PatientRecord>& records);

} // namespace remi
