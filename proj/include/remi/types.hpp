#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace remi {

enum class SignalKind { BIS = 0, HR, SAP, MAP, DAP, RemiTarget };

inline constexpr int kNumSignals = 6;

inline constexpr std::array<SignalKind, kNumSignals> kAllSignals = {
    SignalKind::BIS, SignalKind::HR, SignalKind::SAP,
    SignalKind::MAP, SignalKind::DAP, SignalKind::RemiTarget,
};

std::string_view signal_name(SignalKind kind);
std::optional<SignalKind> parse_signal(std::string_view name);

enum class Sex { Female = 0, Male = 1 };

struct PatientStatics {
    std::string id;
    int age = 0;
    double bmi = 0.0;
    int asa = 0;
    Sex sex = Sex::Female;
};

// One vital channel on a shared time base. Timestamps are seconds from case
// start, strictly increasing, same length as values.
struct VitalSeries {
    SignalKind kind = SignalKind::BIS;
    Eigen::VectorXd timestamps;
    Eigen::VectorXd values;

    Eigen::Index size() const { return timestamps.size(); }
    bool empty() const { return timestamps.size() == 0; }
};

VitalSeries make_series(SignalKind kind, std::vector<double> timestamps, std::vector<double> values);

enum class EventKind { Incision = 0, Bolus, EccStart };

std::string_view event_name(EventKind kind);
std::optional<EventKind> parse_event(std::string_view name);

struct CaseEvent {
    EventKind kind = EventKind::Incision;
    double time_s = 0.0;
    std::string drug; // empty except for Bolus
};

struct PatientRecord {
    PatientStatics statics;
    std::array<VitalSeries, kNumSignals> series{};
    std::vector<CaseEvent> events;
    double duration_s = 0.0;
    // Monitoring-setup flags carried from the statics table; inclusion
    // filtering needs them, the model never sees them.
    bool invasive_ap = true;
    bool tci_remi = true;

    const VitalSeries& signal(SignalKind kind) const {
        return series[static_cast<std::size_t>(kind)];
    }
    VitalSeries& signal(SignalKind kind) {
        return series[static_cast<std::size_t>(kind)];
    }
};

// Structural integrity check. Violations are data facts, not failures:
// an empty list means the record is usable downstream.
std::vector<std::string> validate_record(const PatientRecord& record);

// One observation/prediction window pair. Windows are
// [obs_start, obs_end] and (obs_end, pred_end]; label is the signed target
// step over the prediction window in ng/mL, 0 when the target held.
struct Segment {
    std::string patient_id;
    double obs_start_s = 0.0;
    double obs_end_s = 0.0;
    double pred_end_s = 0.0;
    double label = 0.0;
};

// Dense feature rows with aligned names, labels and row patient ids.
struct FeatureMatrix {
    std::vector<std::string> column_names;
    Eigen::MatrixXd rows;            // n x p
    Eigen::VectorXd labels;          // n
    std::vector<std::string> patient_ids; // n

    Eigen::Index n_rows() const { return rows.rows(); }
    Eigen::Index n_cols() const { return rows.cols(); }
};

} // namespace remi
