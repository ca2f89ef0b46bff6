#include "remi/types.hpp"

#include "remi/errors.hpp"

#include <cmath>
#include <sstream>

namespace remi {

std::string_view signal_name(SignalKind kind) {
    switch (kind) {
        case SignalKind::BIS: return "BIS";
        case SignalKind::HR: return "HR";
        case SignalKind::SAP: return "SAP";
        case SignalKind::MAP: return "MAP";
        case SignalKind::DAP: return "DAP";
        case SignalKind::RemiTarget: return "REMI_TARGET";
    }
    return "?";
}

std::optional<SignalKind> parse_signal(std::string_view name) {
    for (SignalKind kind : kAllSignals)
        if (name == signal_name(kind)) return kind;
    return std::nullopt;
}

std::string_view event_name(EventKind kind) {
    switch (kind) {
        case EventKind::Incision: return "INCISION";
        case EventKind::Bolus: return "BOLUS";
        case EventKind::EccStart: return "ECC_START";
    }
    return "?";
}

std::optional<EventKind> parse_event(std::string_view name) {
    if (name == "INCISION") return EventKind::Incision;
    if (name == "BOLUS") return EventKind::Bolus;
    if (name == "ECC_START") return EventKind::EccStart;
    return std::nullopt;
}

VitalSeries make_series(SignalKind kind, std::vector<double> timestamps, std::vector<double> values) {
    if (timestamps.size() != values.size())
        throw DataError("series timestamps and values differ in length");
    VitalSeries s;
    s.kind = kind;
    s.timestamps = Eigen::Map<const Eigen::VectorXd>(timestamps.data(),
                                                     static_cast<Eigen::Index>(timestamps.size()));
    s.values = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                 static_cast<Eigen::Index>(values.size()));
    return s;
}

std::vector<std::string> validate_record(const PatientRecord& record) {
    std::vector<std::string> violations;
    auto add = [&](const std::string& msg) {
        violations.push_back(record.statics.id + ": " + msg);
    };

    if (record.statics.id.empty()) violations.push_back("empty patient id");
    if (!(record.statics.bmi > 5.0 && record.statics.bmi < 100.0)) {
        std::ostringstream os;
        os << "bmi " << record.statics.bmi << " outside (5, 100)";
        add(os.str());
    }
    if (record.statics.asa < 1 || record.statics.asa > 5) {
        std::ostringstream os;
        os << "asa " << record.statics.asa << " outside [1, 5]";
        add(os.str());
    }
    if (!(record.duration_s > 0.0)) add("non-positive duration");

    for (SignalKind kind : kAllSignals) {
        const VitalSeries& s = record.signal(kind);
        const std::string name(signal_name(kind));
        if (s.empty()) {
            add("missing signal " + name);
            continue;
        }
        if (s.timestamps.size() != s.values.size()) {
            add("signal " + name + ": timestamp/value length mismatch");
            continue;
        }
        bool increasing = true;
        for (Eigen::Index i = 1; i < s.timestamps.size(); ++i)
            if (!(s.timestamps[i] > s.timestamps[i - 1])) { increasing = false; break; }
        if (!increasing) add("signal " + name + ": timestamps not strictly increasing");
        if (s.timestamps.size() > 0 && s.timestamps[0] < 0.0)
            add("signal " + name + ": negative timestamp");
        if (!s.values.allFinite() || !s.timestamps.allFinite())
            add("signal " + name + ": non-finite sample");
        if (s.timestamps.size() > 0 && s.timestamps[s.timestamps.size() - 1] > record.duration_s)
            add("signal " + name + ": sample beyond case duration");
    }

    for (const CaseEvent& ev : record.events) {
        if (!(ev.time_s >= 0.0 && ev.time_s <= record.duration_s)) {
            std::ostringstream os;
            os << "event " << event_name(ev.kind) << " at " << ev.time_s
               << " outside [0, " << record.duration_s << "]";
            add(os.str());
        }
    }
    return violations;
}

} // namespace remi
