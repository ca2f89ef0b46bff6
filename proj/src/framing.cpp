#include "remi/framing.hpp"

#include "remi/csv.hpp"
#include "remi/errors.hpp"
#include "remi/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace remi {

std::string_view direction_name(Direction d) {
    return d == Direction::Increase ? "increase" : "decrease";
}

namespace {

double change_eps(double min_change) { return std::max(min_change, kChangeEps); }

// Step-valued lookup: value of the last grid sample at or before t.
double target_at(const VitalSeries& target, double t) {
    const double* begin = target.timestamps.data();
    const double* end = begin + target.timestamps.size();
    const double* it = std::upper_bound(begin, end, t + 1e-9);
    if (it == begin) return target.values[0];
    return target.values[(it - begin) - 1];
}

long count_in(const std::vector<double>& times, double lo_excl, double hi_incl) {
    long n = 0;
    for (double t : times)
        if (t > lo_excl + 1e-9 && t <= hi_incl + 1e-9) ++n;
    return n;
}

} // namespace

std::vector<double> target_change_times(const PatientRecord& record, double min_change) {
    const VitalSeries& target = record.signal(SignalKind::RemiTarget);
    std::vector<double> times;
    const double eps = change_eps(min_change);
    for (Eigen::Index i = 1; i < target.size(); ++i)
        if (std::fabs(target.values[i] - target.values[i - 1]) > eps)
            times.push_back(target.timestamps[i]);
    return times;
}

std::vector<Segment> enumerate_segments(const PatientRecord& record, const FramingConfig& config) {
    if (!(config.obs_len_s > 0.0 && config.pred_len_s > 0.0 && config.stride_s > 0.0))
        throw ConfigError("framing lengths must be positive");
    const VitalSeries& target = record.signal(SignalKind::RemiTarget);
    if (target.empty()) throw DataError(record.statics.id + ": no target series");

    const double eps = change_eps(config.min_change);
    std::vector<Segment> out;
    for (long k = 0;; ++k) {
        Segment seg;
        seg.patient_id = record.statics.id;
        seg.obs_start_s = static_cast<double>(k) * config.stride_s;
        seg.obs_end_s = seg.obs_start_s + config.obs_len_s;
        seg.pred_end_s = seg.obs_end_s + config.pred_len_s;
        if (seg.pred_end_s > record.duration_s + 1e-9) break;
        const double delta = target_at(target, seg.pred_end_s) - target_at(target, seg.obs_end_s);
        seg.label = std::fabs(delta) > eps ? delta : 0.0;
        out.push_back(std::move(seg));
    }
    return out;
}

std::pair<std::vector<Segment>, ExclusionCounts> apply_exclusions(
    const std::vector<Segment>& segments, const PatientRecord& record,
    const FramingConfig& config) {
    const auto changes = target_change_times(record, config.min_change);
    const double first_change = changes.empty() ? -1.0 : changes.front();

    double incision = -1.0;
    for (const CaseEvent& ev : record.events)
        if (ev.kind == EventKind::Incision && (incision < 0.0 || ev.time_s < incision))
            incision = ev.time_s;

    std::vector<double> bolus_times;
    for (const CaseEvent& ev : record.events)
        if (ev.kind == EventKind::Bolus) bolus_times.push_back(ev.time_s);

    std::vector<Segment> kept;
    ExclusionCounts counts;
    for (const Segment& seg : segments) {
        if (first_change >= 0.0 && seg.obs_end_s < first_change - 1e-9) {
            ++counts.first_change;
            continue;
        }
        if (incision >= 0.0 && seg.obs_end_s < incision - 1e-9
            && seg.pred_end_s >= incision - config.incision_guard_s - 1e-9) {
            ++counts.incision_guard;
            continue;
        }
        if (count_in(changes, seg.obs_end_s, seg.pred_end_s) >= 2) {
            ++counts.multi_change;
            continue;
        }
        if (count_in(changes, seg.obs_start_s, seg.obs_end_s) > 0) {
            ++counts.change_in_obs;
            continue;
        }
        bool has_bolus = false;
        for (double t : bolus_times)
            if (t >= seg.obs_start_s - 1e-9 && t <= seg.pred_end_s + 1e-9) { has_bolus = true; break; }
        if (has_bolus) {
            ++counts.bolus;
            continue;
        }
        kept.push_back(seg);
        ++counts.kept;
    }
    return {std::move(kept), counts};
}

std::vector<Segment> build_direction_dataset(const std::vector<Segment>& segments,
                                             Direction direction) {
    std::vector<Segment> out;
    for (const Segment& seg : segments) {
        if (direction == Direction::Increase) {
            if (seg.label < 0.0) continue;
            out.push_back(seg);
        } else {
            if (seg.label > 0.0) continue;
            Segment copy = seg;
            copy.label = std::fabs(copy.label);
            out.push_back(std::move(copy));
        }
    }
    return out;
}

double prevalence(const std::vector<Segment>& segments) {
    if (segments.empty()) throw DataError("prevalence of empty segment list");
    long changed = 0;
    for (const Segment& seg : segments)
        if (std::fabs(seg.label) > kChangeEps) ++changed;
    return static_cast<double>(changed) / static_cast<double>(segments.size());
}

std::string segments_csv(const std::vector<Segment>& segments) {
    std::string out = "patient_id,obs_start_s,obs_end_s,pred_end_s,label\n";
    for (const Segment& seg : segments) {
        out += seg.patient_id;
        out += ',';
        out += format_double(seg.obs_start_s);
        out += ',';
        out += format_double(seg.obs_end_s);
        out += ',';
        out += format_double(seg.pred_end_s);
        out += ',';
        out += format_double(seg.label);
        out += '\n';
    }
    return out;
}

} // namespace remi
