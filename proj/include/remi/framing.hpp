#pragma once

#include <string>
#include <vector>

#include "remi/types.hpp"

namespace remi {

enum class Direction { Increase, Decrease };

std::string_view direction_name(Direction d);

struct FramingConfig {
    double obs_len_s = 120.0;
    double pred_len_s = 60.0;
    double stride_s = 30.0;
    Direction direction = Direction::Increase;
    double incision_guard_s = 300.0;
    double min_change = 0.0; // ng/mL; float equality guarded by 1e-9 regardless
};

// Grid times where the target series steps; changes are attributed to the
// grid point where the new value first appears.
std::vector<double> target_change_times(const PatientRecord& record, double min_change);

// Sliding windows obs_start = k*stride with pred_end <= duration. The label
// is RemiTarget(pred_end) - RemiTarget(obs_end); steps within the float guard
// (or below min_change) collapse to 0.
std::vector<Segment> enumerate_segments(const PatientRecord& record, const FramingConfig& config);

struct ExclusionCounts {
    long first_change = 0;   // prediction window overlaps [0, first change]
    long incision_guard = 0; // prediction window intersects [incision-guard, incision]
    long multi_change = 0;   // >= 2 changes in the prediction window
    long change_in_obs = 0;  // any change in the observation window
    long bolus = 0;          // any Bolus event in [obs_start, pred_end]
    long kept = 0;

    long excluded() const {
        return first_change + incision_guard + multi_change + change_in_obs + bolus;
    }
};

// Rules apply in the order above; each removal is counted under the first
// matching rule. Windows are half-open for change attribution:
// observation (obs_start, obs_end], prediction (obs_end, pred_end].
std::pair<std::vector<Segment>, ExclusionCounts> apply_exclusions(
    const std::vector<Segment>& segments, const PatientRecord& record,
    const FramingConfig& config);

// increase: drop negative labels, keep +delta/0. decrease: drop positive
// labels, relabel as |delta|. No-change segments appear in both datasets.
std::vector<Segment> build_direction_dataset(const std::vector<Segment>& segments,
                                             Direction direction);

// Fraction of segments with a nonzero label; empty input is an error.
double prevalence(const std::vector<Segment>& segments);

std::string segments_csv(const std::vector<Segment>& segments);

} // namespace remi
