#include "remi/simulator.hpp"

#include "remi/errors.hpp"
#include "remi/features.hpp"
#include "remi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace remi {

namespace {

constexpr double kSapMean = 120.0;
constexpr double kHrMean = 70.0;
constexpr double kBisMean = 45.0;
constexpr double kReversionTau = 300.0;  // mean-reversion time constant
constexpr double kSurgeTau = 60.0;       // surge decay; ~5% left after 3 min
constexpr double kSurgeAttenuation = 0.6; // amplitude loss at target_max
constexpr double kIncisionTime = 600.0;

struct Surge {
    double onset = 0.0;
    double amplitude = 0.0; // raw draw; attenuation applies at onset
};

Eigen::VectorXd ou_process(std::mt19937_64& rng, long n, double dt, double mean, double sd) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(n);
    if (sd <= 0.0) {
        x.setConstant(mean);
        for (long i = 0; i < n; ++i) normal(rng); // keep the draw count stable
        return x;
    }
    const double phi = std::exp(-dt / kReversionTau);
    const double innov = sd * std::sqrt(1.0 - phi * phi);
    x[0] = mean + sd * normal(rng);
    for (long i = 1; i < n; ++i)
        x[i] = mean + phi * (x[i - 1] - mean) + innov * normal(rng);
    return x;
}

struct PolicyState {
    double target = 0.0;
    bool up_prev = false;
    bool down_prev = false;
    std::vector<std::pair<double, double>> pending; // (apply time, signed step)
};

// Trailing window (t - W, t]: the last round(W/dt) samples ending at index i.
// Conditions are undefined (false) until the window fills.
struct WindowView {
    long start = 0;
    long count = 0;
};

WindowView trailing_window(long i, double window_s, double dt) {
    const long m = std::lround(window_s / dt);
    if (m < 2 || i + 1 < m) return {0, 0};
    return {i + 1 - m, m};
}

// One policy evaluation at grid index i over the SAP samples so far; fires
// are appended to pending. Shared verbatim by the generator and the oracle
// so that both see identical arithmetic.
void evaluate_policy(const PlantedPolicy& policy, const Eigen::VectorXd& times,
                     const Eigen::VectorXd& sap, long i, double dt, PolicyState& state) {
    bool up_now = false;
    const WindowView up = trailing_window(i, policy.up_window_s, dt);
    if (up.count >= 2) {
        const double mean = sap.segment(up.start, up.count).mean();
        const TrendSummary trend = fit_trend(times.segment(up.start, up.count),
                                             sap.segment(up.start, up.count));
        up_now = mean > policy.up_sap_threshold || trend.slope_per_min > policy.up_slope_threshold;
    }
    bool down_now = false;
    const WindowView down = trailing_window(i, policy.down_window_s, dt);
    if (down.count >= 2) {
        const double mean = sap.segment(down.start, down.count).mean();
        const TrendSummary trend = fit_trend(times.segment(down.start, down.count),
                                             sap.segment(down.start, down.count));
        down_now = mean < policy.down_sap_threshold
            && std::fabs(trend.slope_per_min) < policy.down_slope_band;
    }
    const double t = times[i];
    if (up_now && !state.up_prev)
        state.pending.emplace_back(t + policy.reaction_delay_s, policy.step);
    if (down_now && !state.down_prev)
        state.pending.emplace_back(t + policy.reaction_delay_s, -policy.step);
    state.up_prev = up_now;
    state.down_prev = down_now;
}

// Applies due pending steps, clamped to the target range; returns the actual
// signed change (0 when clamping swallowed it).
double apply_pending(const PlantedPolicy& policy, double t, PolicyState& state) {
    double change = 0.0;
    std::vector<std::pair<double, double>> still;
    for (const auto& [when, step] : state.pending) {
        if (when <= t + 1e-9) {
            const double next = std::clamp(state.target + step,
                                           policy.target_min, policy.target_max);
            change += next - state.target;
            state.target = next;
        } else {
            still.push_back({when, step});
        }
    }
    state.pending = std::move(still);
    return change;
}

} // namespace

std::vector<PatientRecord> generate_cohort(const SimConfig& config) {
    if (config.n_patients <= 0) throw ConfigError("n_patients must be positive");
    if (config.stimulus_rate_per_h < 0.0) throw ConfigError("stimulus rate must be non-negative");
    if (!(config.policy.target_min < config.policy.target_max))
        throw ConfigError("target_min must be below target_max");
    if (!(config.policy.step > 0.0)) throw ConfigError("policy step must be positive");
    if (!(config.grid_step_s > 0.0)) throw ConfigError("grid step must be positive");
    if (!(config.case_duration_s >= 2.0 * config.grid_step_s))
        throw ConfigError("case duration too short for the grid");

    const double dt = config.grid_step_s;
    const long n = static_cast<long>(std::floor(config.case_duration_s / dt)) + 1;
    const std::uint64_t sim_seed = derive_seed(config.seed, SeedStream::Simulation);

    std::vector<PatientRecord> cohort;
    for (int pat = 0; pat < config.n_patients; ++pat) {
        std::mt19937_64 rng(derive_seed(sim_seed, static_cast<std::uint64_t>(pat)));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        PatientRecord rec;
        {
            std::ostringstream id;
            id << "sim_";
            id.width(4);
            id.fill('0');
            id << (pat + 1);
            rec.statics.id = id.str();
        }
        rec.statics.age = 25 + static_cast<int>(uniform(rng) * 61.0);
        rec.statics.bmi = std::round((19.0 + uniform(rng) * 15.0) * 10.0) / 10.0;
        rec.statics.asa = 1 + static_cast<int>(uniform(rng) * 4.0);
        rec.statics.sex = uniform(rng) < 0.5 ? Sex::Female : Sex::Male;
        rec.duration_s = config.case_duration_s;

        Eigen::VectorXd times(n);
        for (long i = 0; i < n; ++i) times[i] = static_cast<double>(i) * dt;

        const Eigen::VectorXd sap_base = ou_process(rng, n, dt, kSapMean, config.noise_sd_sap);
        const Eigen::VectorXd hr = ou_process(rng, n, dt, kHrMean, config.noise_sd_hr);
        const Eigen::VectorXd bis = ou_process(rng, n, dt, kBisMean, config.noise_sd_bis);
        Eigen::VectorXd map_noise(n), dap_noise(n);
        for (long i = 0; i < n; ++i) map_noise[i] = config.noise_sd_map * normal(rng);
        for (long i = 0; i < n; ++i) dap_noise[i] = config.noise_sd_dap * normal(rng);

        std::vector<Surge> surges;
        {
            const double expected = config.stimulus_rate_per_h * config.case_duration_s / 3600.0;
            std::poisson_distribution<int> poisson(expected > 0.0 ? expected : 1e-12);
            const int count = config.stimulus_rate_per_h > 0.0 ? poisson(rng) : 0;
            for (int s = 0; s < count; ++s) {
                Surge surge;
                surge.onset = uniform(rng) * config.case_duration_s;
                surge.amplitude = 25.0 + uniform(rng) * 20.0;
                surges.push_back(surge);
            }
            std::sort(surges.begin(), surges.end(),
                      [](const Surge& a, const Surge& b) { return a.onset < b.onset; });
        }

        PolicyState state;
        state.target = 0.5 * (config.policy.target_min + config.policy.target_max);

        Eigen::VectorXd sap(n), target(n);
        std::vector<std::pair<double, double>> active; // (onset, attenuated amplitude)
        std::size_t next_surge = 0;
        for (long i = 0; i < n; ++i) {
            const double t = times[i];
            apply_pending(config.policy, t, state);
            target[i] = state.target;

            while (next_surge < surges.size() && surges[next_surge].onset <= t) {
                const double span = config.policy.target_max - config.policy.target_min;
                const double frac = (state.target - config.policy.target_min) / span;
                active.emplace_back(surges[next_surge].onset,
                                    surges[next_surge].amplitude
                                        * (1.0 - kSurgeAttenuation * frac));
                ++next_surge;
            }
            double bump = 0.0;
            for (const auto& [onset, amp] : active)
                bump += amp * std::exp(-(t - onset) / kSurgeTau);
            sap[i] = sap_base[i] + bump;

            evaluate_policy(config.policy, times, sap, i, dt, state);
        }

        const Eigen::VectorXd dap = 0.5 * sap.array() + 15.0 + dap_noise.array();
        const Eigen::VectorXd map = 0.65 * sap.array() + 10.0 + map_noise.array();

        auto fill = [&](SignalKind kind, const Eigen::VectorXd& v) {
            VitalSeries& s = rec.signal(kind);
            s.kind = kind;
            s.timestamps = times;
            s.values = v;
        };
        fill(SignalKind::SAP, sap);
        fill(SignalKind::MAP, map);
        fill(SignalKind::DAP, dap);
        fill(SignalKind::HR, hr);
        fill(SignalKind::BIS, bis);
        fill(SignalKind::RemiTarget, target);

        if (kIncisionTime <= rec.duration_s)
            rec.events.push_back({EventKind::Incision, kIncisionTime, ""});

        cohort.push_back(std::move(rec));
    }
    return cohort;
}

std::vector<std::pair<double, double>> policy_oracle_labels(const PatientRecord& record,
                                                            const PlantedPolicy& policy) {
    const VitalSeries& sap_series = record.signal(SignalKind::SAP);
    const VitalSeries& target_series = record.signal(SignalKind::RemiTarget);
    if (sap_series.empty() || target_series.empty())
        throw DataError(record.statics.id + ": needs SAP and target series");
    const long n = sap_series.size();
    if (n < 2) throw DataError(record.statics.id + ": SAP series too short");
    const double dt = sap_series.timestamps[1] - sap_series.timestamps[0];
    for (long i = 1; i < n; ++i)
        if (std::fabs((sap_series.timestamps[i] - sap_series.timestamps[i - 1]) - dt) > 1e-9)
            throw DataError(record.statics.id + ": SAP series not on a uniform grid");

    PolicyState state;
    state.target = target_series.values[0];

    std::vector<std::pair<double, double>> fires;
    for (long i = 0; i < n; ++i) {
        const double t = sap_series.timestamps[i];
        const double change = apply_pending(policy, t, state);
        if (std::fabs(change) > 1e-12) fires.emplace_back(t, change);
        evaluate_policy(policy, sap_series.timestamps, sap_series.values, i, dt, state);
    }
    return fires;
}

} // namespace remi
