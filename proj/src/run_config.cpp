#include "remi/run_config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

#include "remi/csv.hpp"
#include "remi/errors.hpp"

namespace remi {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& value, const std::string& where) {
    double out = 0.0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not a number: '" + value + "'");
    return out;
}

long parse_long(const std::string& value, const std::string& where) {
    long out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not an integer: '" + value + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& where) {
    std::uint64_t out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": not a non-negative integer: '" + value + "'");
    return out;
}

bool parse_bool(const std::string& value, const std::string& where) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ConfigError(where + ": not a flag (use 0/1/true/false): '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t semi = value.find(';', start);
        const std::string item =
            trim(value.substr(start, semi == std::string::npos ? semi : semi - start));
        if (!item.empty()) out.push_back(item);
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return out;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig config;
    bool saw_output_dir = false;
    bool saw_obs = false, saw_pred = false;

    std::string section;
    std::istringstream in(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::string where = origin + ":" + std::to_string(line_no);

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section == "simulator") config.has_simulator = true;
            else if (section == "cohort") config.has_cohort = true;
            else if (section != "inclusion" && section != "framing" && section != "selection"
                     && section != "explain")
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        const std::string at = where + " (" + key + ")";

        if (section.empty()) {
            if (key == "output_dir") { config.output_dir = value; saw_output_dir = true; }
            else if (key == "seed") config.seed = parse_u64(value, at);
            else if (key == "jobs") config.jobs = static_cast<int>(parse_long(value, at));
            else throw ConfigError(at + ": unknown key");
        } else if (section == "simulator") {
            SimConfig& s = config.simulator;
            if (key == "n_patients") s.n_patients = static_cast<int>(parse_long(value, at));
            else if (key == "case_duration_s") s.case_duration_s = parse_double(value, at);
            else if (key == "stimulus_rate_per_h") s.stimulus_rate_per_h = parse_double(value, at);
            else if (key == "grid_step_s") s.grid_step_s = parse_double(value, at);
            else if (key == "noise_sd_sap") s.noise_sd_sap = parse_double(value, at);
            else if (key == "noise_sd_map") s.noise_sd_map = parse_double(value, at);
            else if (key == "noise_sd_dap") s.noise_sd_dap = parse_double(value, at);
            else if (key == "noise_sd_hr") s.noise_sd_hr = parse_double(value, at);
            else if (key == "noise_sd_bis") s.noise_sd_bis = parse_double(value, at);
            else if (key == "up_window_s") s.policy.up_window_s = parse_double(value, at);
            else if (key == "up_sap_threshold") s.policy.up_sap_threshold = parse_double(value, at);
            else if (key == "up_slope_threshold")
                s.policy.up_slope_threshold = parse_double(value, at);
            else if (key == "down_window_s") s.policy.down_window_s = parse_double(value, at);
            else if (key == "down_sap_threshold")
                s.policy.down_sap_threshold = parse_double(value, at);
            else if (key == "down_slope_band") s.policy.down_slope_band = parse_double(value, at);
            else if (key == "target_min") s.policy.target_min = parse_double(value, at);
            else if (key == "target_max") s.policy.target_max = parse_double(value, at);
            else if (key == "target_step") s.policy.step = parse_double(value, at);
            else if (key == "reaction_delay_s")
                s.policy.reaction_delay_s = parse_double(value, at);
            else throw ConfigError(at + ": unknown key");
        } else if (section == "cohort") {
            CohortSource& c = config.cohort;
            if (key == "vitals") c.vitals_path = value;
            else if (key == "statics") c.statics_path = value;
            else if (key == "events") c.events_path = value;
            else if (key == "grid_step_s") c.grid_step_s = parse_double(value, at);
            else if (key == "min_ap_coverage") c.min_ap_coverage = parse_double(value, at);
            else throw ConfigError(at + ": unknown key");
        } else if (section == "inclusion") {
            InclusionCriteria& i = config.inclusion;
            if (key == "min_duration_s") i.min_duration_s = parse_double(value, at);
            else if (key == "min_age") i.min_age = static_cast<int>(parse_long(value, at));
            else if (key == "require_invasive_ap")
                i.require_invasive_ap = parse_bool(value, at);
            else if (key == "require_tci_remi") i.require_tci_remi = parse_bool(value, at);
            else if (key == "confounder_drugs") i.confounder_drugs = split_list(value);
            else throw ConfigError(at + ": unknown key");
        } else if (section == "framing") {
            FramingConfig& f = config.framing;
            if (key == "obs_len_s") { f.obs_len_s = parse_double(value, at); saw_obs = true; }
            else if (key == "pred_len_s") {
                f.pred_len_s = parse_double(value, at);
                saw_pred = true;
            } else if (key == "stride_s") f.stride_s = parse_double(value, at);
            else if (key == "direction") {
                if (value == "increase") f.direction = Direction::Increase;
                else if (value == "decrease") f.direction = Direction::Decrease;
                else throw ConfigError(at + ": direction must be increase or decrease");
            } else if (key == "incision_guard_s") f.incision_guard_s = parse_double(value, at);
            else if (key == "min_change") f.min_change = parse_double(value, at);
            else throw ConfigError(at + ": unknown key");
        } else if (section == "selection") {
            SelectionConfig& s = config.selection;
            if (key == "rfe_tolerance") s.rfe_tolerance = parse_double(value, at);
            else if (key == "poly_tolerance") s.poly_tolerance = parse_double(value, at);
            else if (key == "inner_folds") s.inner_folds = static_cast<int>(parse_long(value, at));
            else if (key == "outer_folds") s.outer_folds = static_cast<int>(parse_long(value, at));
            else if (key == "max_degree") s.max_degree = static_cast<int>(parse_long(value, at));
            else if (key == "max_path_features")
                s.max_path_features = static_cast<int>(parse_long(value, at));
            else if (key == "zscore_threshold") s.zscore_threshold = parse_double(value, at);
            else throw ConfigError(at + ": unknown key");
        } else if (section == "explain") {
            if (key == "percentile") config.explain_percentile = parse_double(value, at);
            else throw ConfigError(at + ": unknown key");
        }
    }

    if (!saw_output_dir) {
        if (const char* env = std::getenv("REMI_OUTPUT_DIR"); env && *env)
            config.output_dir = env;
    }
    if (!saw_obs) throw ConfigError(origin + ": missing framing key obs_len_s");
    if (!saw_pred) throw ConfigError(origin + ": missing framing key pred_len_s");

    validate(config);
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

std::string serialize_run_config(const RunConfig& config) {
    std::ostringstream out;
    out << "output_dir = " << config.output_dir << "\n"
        << "seed = " << config.seed << "\n"
        << "jobs = " << config.jobs << "\n";

    if (config.has_simulator) {
        const SimConfig& s = config.simulator;
        out << "\n[simulator]\n"
            << "n_patients = " << s.n_patients << "\n"
            << "case_duration_s = " << format_double(s.case_duration_s) << "\n"
            << "stimulus_rate_per_h = " << format_double(s.stimulus_rate_per_h) << "\n"
            << "grid_step_s = " << format_double(s.grid_step_s) << "\n"
            << "noise_sd_sap = " << format_double(s.noise_sd_sap) << "\n"
            << "noise_sd_map = " << format_double(s.noise_sd_map) << "\n"
            << "noise_sd_dap = " << format_double(s.noise_sd_dap) << "\n"
            << "noise_sd_hr = " << format_double(s.noise_sd_hr) << "\n"
            << "noise_sd_bis = " << format_double(s.noise_sd_bis) << "\n"
            << "up_window_s = " << format_double(s.policy.up_window_s) << "\n"
            << "up_sap_threshold = " << format_double(s.policy.up_sap_threshold) << "\n"
            << "up_slope_threshold = " << format_double(s.policy.up_slope_threshold) << "\n"
            << "down_window_s = " << format_double(s.policy.down_window_s) << "\n"
            << "down_sap_threshold = " << format_double(s.policy.down_sap_threshold) << "\n"
            << "down_slope_band = " << format_double(s.policy.down_slope_band) << "\n"
            << "target_min = " << format_double(s.policy.target_min) << "\n"
            << "target_max = " << format_double(s.policy.target_max) << "\n"
            << "target_step = " << format_double(s.policy.step) << "\n"
            << "reaction_delay_s = " << format_double(s.policy.reaction_delay_s) << "\n";
    }
    if (config.has_cohort) {
        const CohortSource& c = config.cohort;
        out << "\n[cohort]\n"
            << "vitals = " << c.vitals_path << "\n"
            << "statics = " << c.statics_path << "\n"
            << "events = " << c.events_path << "\n"
            << "grid_step_s = " << format_double(c.grid_step_s) << "\n"
            << "min_ap_coverage = " << format_double(c.min_ap_coverage) << "\n";
    }

    const InclusionCriteria& i = config.inclusion;
    out << "\n[inclusion]\n"
        << "min_duration_s = " << format_double(i.min_duration_s) << "\n"
        << "min_age = " << i.min_age << "\n"
        << "require_invasive_ap = " << (i.require_invasive_ap ? 1 : 0) << "\n"
        << "require_tci_remi = " << (i.require_tci_remi ? 1 : 0) << "\n"
        << "confounder_drugs = ";
    for (std::size_t d = 0; d < i.confounder_drugs.size(); ++d)
        out << (d ? ";" : "") << i.confounder_drugs[d];
    out << "\n";

    const FramingConfig& f = config.framing;
    out << "\n[framing]\n"
        << "obs_len_s = " << format_double(f.obs_len_s) << "\n"
        << "pred_len_s = " << format_double(f.pred_len_s) << "\n"
        << "stride_s = " << format_double(f.stride_s) << "\n"
        << "direction = " << direction_name(f.direction) << "\n"
        << "incision_guard_s = " << format_double(f.incision_guard_s) << "\n"
        << "min_change = " << format_double(f.min_change) << "\n";

    const SelectionConfig& s = config.selection;
    out << "\n[selection]\n"
        << "rfe_tolerance = " << format_double(s.rfe_tolerance) << "\n"
        << "poly_tolerance = " << format_double(s.poly_tolerance) << "\n"
        << "inner_folds = " << s.inner_folds << "\n"
        << "outer_folds = " << s.outer_folds << "\n"
        << "max_degree = " << s.max_degree << "\n"
        << "max_path_features = " << s.max_path_features << "\n"
        << "zscore_threshold = " << format_double(s.zscore_threshold) << "\n";

    out << "\n[explain]\n"
        << "percentile = " << format_double(config.explain_percentile) << "\n";
    return out.str();
}

void validate(const RunConfig& config) {
    if (config.has_simulator == config.has_cohort)
        throw ConfigError("config needs exactly one of [simulator] and [cohort]");
    if (config.jobs < 1) throw ConfigError("jobs must be at least 1");
    if (config.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (!(config.explain_percentile > 0.0 && config.explain_percentile <= 100.0))
        throw ConfigError("explain percentile outside (0, 100]");

    if (config.has_simulator) {
        const SimConfig& s = config.simulator;
        if (s.n_patients < 1) throw ConfigError("n_patients must be at least 1");
        if (!(s.case_duration_s > 0.0)) throw ConfigError("case_duration_s must be > 0");
        if (!(s.grid_step_s > 0.0)) throw ConfigError("grid_step_s must be > 0");
        if (!(s.stimulus_rate_per_h >= 0.0))
            throw ConfigError("stimulus_rate_per_h must be >= 0");
        if (!(s.policy.target_min < s.policy.target_max))
            throw ConfigError("target_min must be below target_max");
        if (!(s.policy.step > 0.0)) throw ConfigError("target_step must be > 0");
    }
    if (config.has_cohort) {
        const CohortSource& c = config.cohort;
        if (c.vitals_path.empty() || c.statics_path.empty() || c.events_path.empty())
            throw ConfigError("cohort needs vitals, statics and events paths");
        if (!(c.grid_step_s > 0.0)) throw ConfigError("grid_step_s must be > 0");
        if (!(c.min_ap_coverage >= 0.0 && c.min_ap_coverage <= 1.0))
            throw ConfigError("min_ap_coverage outside [0, 1]");
    }

    if (!(config.framing.obs_len_s > 0.0)) throw ConfigError("obs_len_s must be > 0");
    if (!(config.framing.pred_len_s > 0.0)) throw ConfigError("pred_len_s must be > 0");
    if (!(config.framing.stride_s > 0.0)) throw ConfigError("stride_s must be > 0");
    if (!(config.framing.incision_guard_s >= 0.0))
        throw ConfigError("incision_guard_s must be >= 0");
    if (!(config.framing.min_change >= 0.0)) throw ConfigError("min_change must be >= 0");
    if (!(config.inclusion.min_duration_s > 0.0))
        throw ConfigError("min_duration_s must be > 0");

    validate(config.selection);
}

} // namespace remi
