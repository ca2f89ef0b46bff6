#include "remi/ingestion.hpp"

#include "remi/csv.hpp"
#include "remi/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace remi {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct RawSeries {
    std::vector<double> t;
    std::vector<double> v;
};

} // namespace

VitalSeries resample_series(const VitalSeries& series, double grid_step_s) {
    if (series.empty()) throw DataError("resample of empty series");
    if (!(grid_step_s > 0.0)) throw ConfigError("grid step must be positive");

    const double t_min = series.timestamps[0];
    const double t_max = series.timestamps[series.size() - 1];
    const long k_start = static_cast<long>(std::floor(t_min / grid_step_s));
    const bool locf = series.kind == SignalKind::RemiTarget;
    const long k_end = locf ? static_cast<long>(std::ceil(t_max / grid_step_s))
                            : static_cast<long>(std::floor(t_max / grid_step_s));

    std::vector<double> out_t, out_v;
    if (locf) {
        Eigen::Index i = 0;
        double held = series.values[0]; // leading gap backfills the first value
        for (long k = k_start; k <= k_end; ++k) {
            const double t = static_cast<double>(k) * grid_step_s;
            while (i < series.size() && series.timestamps[i] <= t + 1e-9)
                held = series.values[i++];
            out_t.push_back(t);
            out_v.push_back(held);
        }
    } else {
        Eigen::Index i = 0;
        double held = series.values[0];
        for (long k = k_start; k <= k_end; ++k) {
            const double t = static_cast<double>(k) * grid_step_s;
            double sum = 0.0;
            long count = 0;
            while (i < series.size() && series.timestamps[i] < t + grid_step_s - 1e-9) {
                sum += series.values[i++];
                ++count;
            }
            if (count > 0) held = sum / static_cast<double>(count);
            out_t.push_back(t);
            out_v.push_back(held);
        }
    }
    return make_series(series.kind, std::move(out_t), std::move(out_v));
}

double grid_coverage(const VitalSeries& series, double duration_s, double grid_step_s) {
    if (!(duration_s > 0.0) || !(grid_step_s > 0.0)) return 0.0;
    const long bins = static_cast<long>(std::ceil(duration_s / grid_step_s));
    std::vector<char> hit(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        const long k = static_cast<long>(std::floor(series.timestamps[i] / grid_step_s));
        if (k >= 0 && k < bins) hit[static_cast<std::size_t>(k)] = 1;
    }
    long covered = 0;
    for (char h : hit) covered += h;
    return static_cast<double>(covered) / static_cast<double>(bins);
}

std::vector<PatientRecord> load_cohort(const CohortSource& source, LoadReport* report) {
    const CsvTable statics = read_csv(source.statics_path,
        {"patient_id", "age", "bmi", "asa", "sex", "duration_s", "invasive_ap", "tci_remi"});
    const CsvTable vitals = read_csv(source.vitals_path,
        {"patient_id", "time_s", "signal", "value"});
    const CsvTable events = read_csv(source.events_path,
        {"patient_id", "time_s", "event", "drug"});

    std::map<std::string, PatientRecord> by_id;
    for (std::size_t r = 0; r < statics.rows.size(); ++r) {
        PatientRecord rec;
        rec.statics.id = csv_str(statics, r, 0);
        rec.statics.age = static_cast<int>(csv_long(statics, r, 1));
        rec.statics.bmi = csv_double(statics, r, 2);
        rec.statics.asa = static_cast<int>(csv_long(statics, r, 3));
        const std::string& sex = csv_str(statics, r, 4);
        if (sex == "F") rec.statics.sex = Sex::Female;
        else if (sex == "M") rec.statics.sex = Sex::Male;
        else throw DataError(statics.path + ":" + std::to_string(r + 2) + ":5: bad sex '" + sex + "'");
        rec.duration_s = csv_double(statics, r, 5);
        rec.invasive_ap = csv_long(statics, r, 6) != 0;
        rec.tci_remi = csv_long(statics, r, 7) != 0;
        if (by_id.count(rec.statics.id))
            throw DataError(statics.path + ": duplicate patient " + rec.statics.id);
        by_id.emplace(rec.statics.id, std::move(rec));
    }

    std::map<std::string, std::array<RawSeries, kNumSignals>> raw;
    for (std::size_t r = 0; r < vitals.rows.size(); ++r) {
        const std::string& id = csv_str(vitals, r, 0);
        if (!by_id.count(id))
            throw DataError(vitals.path + ":" + std::to_string(r + 2)
                            + ":1: patient " + id + " not in statics");
        const double t = csv_double(vitals, r, 1);
        const auto kind = parse_signal(csv_str(vitals, r, 2));
        if (!kind)
            throw DataError(vitals.path + ":" + std::to_string(r + 2)
                            + ":3: unknown signal '" + vitals.rows[r][2] + "'");
        const double v = csv_double(vitals, r, 3);
        RawSeries& s = raw[id][static_cast<std::size_t>(*kind)];
        if (!s.t.empty() && !(t > s.t.back()))
            throw DataError(vitals.path + ":" + std::to_string(r + 2)
                            + ":2: timestamps for " + id + "/" + vitals.rows[r][2]
                            + " not increasing");
        s.t.push_back(t);
        s.v.push_back(v);
    }

    for (std::size_t r = 0; r < events.rows.size(); ++r) {
        const std::string& id = csv_str(events, r, 0);
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataError(events.path + ":" + std::to_string(r + 2)
                            + ":1: patient " + id + " not in statics");
        CaseEvent ev;
        ev.time_s = csv_double(events, r, 1);
        const auto kind = parse_event(csv_str(events, r, 2));
        if (!kind)
            throw DataError(events.path + ":" + std::to_string(r + 2)
                            + ":3: unknown event '" + events.rows[r][2] + "'");
        ev.kind = *kind;
        ev.drug = events.rows[r][3];
        if (ev.kind == EventKind::Bolus && ev.drug.empty())
            throw DataError(events.path + ":" + std::to_string(r + 2)
                            + ":4: BOLUS without drug name");
        it->second.events.push_back(std::move(ev));
    }

    std::vector<PatientRecord> out;
    for (auto& [id, rec] : by_id) {
        std::sort(rec.events.begin(), rec.events.end(),
                  [](const CaseEvent& a, const CaseEvent& b) { return a.time_s < b.time_s; });

        const auto raw_it = raw.find(id);
        bool covered = true;
        for (SignalKind kind : {SignalKind::SAP, SignalKind::MAP, SignalKind::DAP}) {
            VitalSeries probe;
            probe.kind = kind;
            if (raw_it != raw.end()) {
                const RawSeries& rs = raw_it->second[static_cast<std::size_t>(kind)];
                probe = make_series(kind, rs.t, rs.v);
            }
            if (grid_coverage(probe, rec.duration_s, source.grid_step_s) < source.min_ap_coverage) {
                covered = false;
                break;
            }
        }
        if (!covered) {
            if (report)
                report->dropped.push_back(id + ": arterial pressure coverage below "
                                          + format_double(source.min_ap_coverage));
            continue;
        }

        if (raw_it != raw.end()) {
            for (SignalKind kind : kAllSignals) {
                const RawSeries& rs = raw_it->second[static_cast<std::size_t>(kind)];
                if (rs.t.empty()) continue;
                rec.signal(kind) = resample_series(make_series(kind, rs.t, rs.v),
                                                   source.grid_step_s);
            }
        }

        const auto violations = validate_record(rec);
        if (!violations.empty()) {
            if (report)
                for (const std::string& v : violations) report->dropped.push_back(v);
            continue;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<InclusionDecision> apply_inclusion(const std::vector<PatientRecord>& records,
                                               const InclusionCriteria& criteria) {
    std::vector<std::string> confounders;
    for (const std::string& d : criteria.confounder_drugs) confounders.push_back(lower(d));

    std::vector<InclusionDecision> out;
    for (const PatientRecord& rec : records) {
        InclusionDecision d;
        d.patient_id = rec.statics.id;
        if (rec.duration_s < criteria.min_duration_s) {
            d.included = false;
            d.reason = "min_duration";
        } else if (rec.statics.age <= criteria.min_age) {
            d.included = false;
            d.reason = "min_age";
        } else if (criteria.require_invasive_ap && !rec.invasive_ap) {
            d.included = false;
            d.reason = "invasive_ap";
        } else if (criteria.require_tci_remi && !rec.tci_remi) {
            d.included = false;
            d.reason = "tci_remi";
        } else if (!confounders.empty()) {
            for (const CaseEvent& ev : rec.events) {
                if (ev.kind != EventKind::Bolus) continue;
                const std::string drug = lower(ev.drug);
                if (std::find(confounders.begin(), confounders.end(), drug) != confounders.end()) {
                    d.included = false;
                    d.reason = "confounder_bolus:" + drug;
                    break;
                }
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<PatientRecord> filter_included(std::vector<PatientRecord> records,
                                           const std::vector<InclusionDecision>& decisions) {
    std::map<std::string, bool> keep;
    for (const InclusionDecision& d : decisions) keep[d.patient_id] = d.included;
    std::vector<PatientRecord> out;
    for (PatientRecord& rec : records)
        if (keep.count(rec.statics.id) && keep[rec.statics.id]) out.push_back(std::move(rec));
    return out;
}

PatientRecord truncate_at_ecc(PatientRecord record) {
    double t_ecc = -1.0;
    for (const CaseEvent& ev : record.events)
        if (ev.kind == EventKind::EccStart && (t_ecc < 0.0 || ev.time_s < t_ecc))
            t_ecc = ev.time_s;
    if (t_ecc < 0.0) return record;

    for (SignalKind kind : kAllSignals) {
        VitalSeries& s = record.signal(kind);
        if (s.empty()) continue;
        Eigen::Index keep = 0;
        while (keep < s.size() && s.timestamps[keep] <= t_ecc + 1e-9) ++keep;
        s.timestamps.conservativeResize(keep);
        s.values.conservativeResize(keep);
    }
    std::vector<CaseEvent> kept_events;
    for (CaseEvent& ev : record.events)
        if (ev.kind != EventKind::EccStart && ev.time_s <= t_ecc) kept_events.push_back(std::move(ev));
    record.events = std::move(kept_events);
    record.duration_s = t_ecc;
    return record;
}

std::string cohort_vitals_csv(const std::vector<PatientRecord>& records) {
    std::ostringstream os;
    os << "patient_id,time_s,signal,value\n";
    for (const PatientRecord& rec : records)
        for (SignalKind kind : kAllSignals) {
            const VitalSeries& s = rec.signal(kind);
            for (Eigen::Index i = 0; i < s.size(); ++i)
                os << rec.statics.id << ',' << format_double(s.timestamps[i]) << ','
                   << signal_name(kind) << ',' << format_double(s.values[i]) << '\n';
        }
    return os.str();
}

std::string cohort_statics_csv(const std::vector<PatientRecord>& records) {
    std::ostringstream os;
    os << "patient_id,age,bmi,asa,sex,duration_s,invasive_ap,tci_remi\n";
    for (const PatientRecord& rec : records)
        os << rec.statics.id << ',' << rec.statics.age << ',' << format_double(rec.statics.bmi)
           << ',' << rec.statics.asa << ',' << (rec.statics.sex == Sex::Female ? 'F' : 'M') << ','
           << format_double(rec.duration_s) << ',' << (rec.invasive_ap ? 1 : 0) << ','
           << (rec.tci_remi ? 1 : 0) << '\n';
    return os.str();
}

std::string cohort_events_csv(const std::vector<PatientRecord>& records) {
    std::ostringstream os;
    os << "patient_id,time_s,event,drug\n";
    for (const PatientRecord& rec : records)
        for (const CaseEvent& ev : rec.events)
            os << rec.statics.id << ',' << format_double(ev.time_s) << ','
               << event_name(ev.kind) << ',' << ev.drug << '\n';
    return os.str();
}

} // namespace remi
