#include "remi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"

#include "remi/csv.hpp"
#include "remi/errors.hpp"
#include "remi/explain.hpp"
#include "remi/metrics.hpp"
#include "remi/rng.hpp"

namespace remi {

namespace {

// Re-throws pipeline failures with the failing stage named, keeping the type
// (and hence the exit code) intact.
template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    }
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw DataError("cannot create directory " + path + ": " + ec.message());
}

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_cohort_files(const std::vector<PatientRecord>& records, const std::string& dir) {
    ensure_dir(dir);
    write_text_file(path_join(dir, "vitals.csv"), cohort_vitals_csv(records));
    write_text_file(path_join(dir, "statics.csv"), cohort_statics_csv(records));
    write_text_file(path_join(dir, "events.csv"), cohort_events_csv(records));
}

// Source records, circulatory-bypass cut, inclusion filter; every drop is
// logged to drop_log.txt.
std::vector<PatientRecord> prepare_records(const RunConfig& config) {
    std::vector<std::string> drop_log;
    std::vector<PatientRecord> records;

    if (config.has_simulator) {
        SimConfig sim = config.simulator;
        sim.seed = derive_seed(config.seed, SeedStream::Simulation);
        const std::vector<PatientRecord> generated = generate_cohort(sim);
        const std::string cohort_dir = path_join(config.output_dir, "cohort");
        write_cohort_files(generated, cohort_dir);
        CohortSource source;
        source.vitals_path = path_join(cohort_dir, "vitals.csv");
        source.statics_path = path_join(cohort_dir, "statics.csv");
        source.events_path = path_join(cohort_dir, "events.csv");
        source.grid_step_s = sim.grid_step_s;
        LoadReport load_report;
        records = load_cohort(source, &load_report);
        for (const std::string& d : load_report.dropped) drop_log.push_back("load: " + d);
    } else {
        LoadReport load_report;
        records = load_cohort(config.cohort, &load_report);
        for (const std::string& d : load_report.dropped) drop_log.push_back("load: " + d);
    }

    std::vector<PatientRecord> cut;
    for (PatientRecord& record : records) {
        PatientRecord trimmed = truncate_at_ecc(std::move(record));
        if (!(trimmed.duration_s > 0.0)) {
            drop_log.push_back("ecc: " + trimmed.statics.id
                               + ": nothing before circulatory bypass");
            continue;
        }
        cut.push_back(std::move(trimmed));
    }

    const auto decisions = apply_inclusion(cut, config.inclusion);
    for (const InclusionDecision& d : decisions)
        if (!d.included) drop_log.push_back("inclusion: " + d.patient_id + ": " + d.reason);
    std::vector<PatientRecord> kept = filter_included(std::move(cut), decisions);

    std::ostringstream log;
    for (const std::string& line : drop_log) log << line << "\n";
    write_text_file(path_join(config.output_dir, "drop_log.txt"), log.str());
    return kept;
}

std::vector<double> scored_aurocs(const EvaluationReport& report) {
    std::vector<double> out;
    for (const FoldReport& fold : report.folds)
        if (!fold.skipped) out.push_back(fold.auroc);
    return out;
}

} // namespace

void cmd_simulate(const RunConfig& config) {
    if (!config.has_simulator)
        throw ConfigError("simulate needs a [simulator] section");
    ensure_dir(config.output_dir);
    write_text_file(path_join(config.output_dir, "manifest.txt"),
                    serialize_run_config(config));

    SimConfig sim = config.simulator;
    sim.seed = derive_seed(config.seed, SeedStream::Simulation);
    const auto records = stage("simulate", [&] { return generate_cohort(sim); });
    write_cohort_files(records, config.output_dir);
}

void cmd_run(const RunConfig& config) {
    ensure_dir(config.output_dir);
    write_text_file(path_join(config.output_dir, "manifest.txt"),
                    serialize_run_config(config));

    const auto records = stage("ingest", [&] { return prepare_records(config); });
    const EvaluationReport report = stage("experiment", [&] {
        return run_experiment(records, config.framing, config.selection, config.jobs);
    });

    stage("write", [&] {
        write_text_file(path_join(config.output_dir, "report.txt"), report_text(report));
        write_text_file(path_join(config.output_dir, "report.csv"), report_csv(report));

        std::ostringstream excl;
        excl << "rule,count\n"
             << "first_change," << report.exclusions.first_change << "\n"
             << "incision_guard," << report.exclusions.incision_guard << "\n"
             << "multi_change," << report.exclusions.multi_change << "\n"
             << "change_in_obs," << report.exclusions.change_in_obs << "\n"
             << "bolus," << report.exclusions.bolus << "\n"
             << "kept," << report.exclusions.kept << "\n";
        write_text_file(path_join(config.output_dir, "exclusions.csv"), excl.str());

        const std::string model_dir = path_join(config.output_dir, "models");
        ensure_dir(model_dir);
        for (const FoldReport& fold : report.folds)
            if (!fold.skipped)
                write_text_file(
                    path_join(model_dir, "fold_" + std::to_string(fold.fold_id) + ".txt"),
                    serialize_model(fold.model));
    });

    stage("explain", [&] {
        const int best = pick_best_fold(report);
        const FoldReport& fold = report.folds[static_cast<std::size_t>(best)];
        const ScatterExport scatter = export_scatter(
            fold.model, fold.test_matrix, fold.test_scores, config.explain_percentile);
        write_text_file(path_join(config.output_dir, "scatter.csv"), scatter_csv(scatter));
        write_text_file(path_join(config.output_dir, "scatter_meta.txt"),
                        scatter_metadata(scatter));

        const auto labels = binarize_labels(fold.test_matrix.labels);
        write_text_file(path_join(config.output_dir, "roc.csv"),
                        roc_curve_csv(roc_curve(fold.test_scores, labels)));
        write_text_file(path_join(config.output_dir, "pr.csv"),
                        pr_curve_csv(pr_curve(fold.test_scores, labels)));
    });
}

void cmd_sweep(const RunConfig& config, const std::string& axis,
               const std::vector<double>& values_s) {
    if (axis != "obs_len" && axis != "pred_len")
        throw ConfigError("sweep axis must be obs_len or pred_len");
    if (values_s.size() < 2) throw ConfigError("sweep needs at least two values");

    ensure_dir(config.output_dir);
    write_text_file(path_join(config.output_dir, "manifest.txt"),
                    serialize_run_config(config));
    const auto records = stage("ingest", [&] { return prepare_records(config); });

    std::ostringstream out;
    out << "value,mean_auroc,min_auroc,max_auroc,std_auroc,status\n";
    for (double value : values_s) {
        FramingConfig framing = config.framing;
        (axis == "obs_len" ? framing.obs_len_s : framing.pred_len_s) = value;

        out << format_double(value) << ",";
        try {
            const EvaluationReport report =
                run_experiment(records, framing, config.selection, config.jobs);
            const std::vector<double> aurocs = scored_aurocs(report);
            if (aurocs.empty()) throw DataError("no scored folds");
            const double mean = std::accumulate(aurocs.begin(), aurocs.end(), 0.0)
                / static_cast<double>(aurocs.size());
            const auto [lo, hi] = std::minmax_element(aurocs.begin(), aurocs.end());
            double var = 0.0;
            for (double a : aurocs) var += (a - mean) * (a - mean);
            const double sd = aurocs.size() > 1
                ? std::sqrt(var / static_cast<double>(aurocs.size() - 1))
                : 0.0;
            out << format_double(mean) << "," << format_double(*lo) << ","
                << format_double(*hi) << "," << format_double(sd) << ",ok\n";
        } catch (const ConfigError&) {
            out << ",,,,config_error\n";
        } catch (const DataError&) {
            out << ",,,,data_error\n";
        } catch (const NumericError&) {
            out << ",,,,numeric_error\n";
        }
    }
    write_text_file(path_join(config.output_dir, "sweep.csv"), out.str());
}

void cmd_report(const std::string& report_csv_path) {
    const CsvTable table = read_csv(
        report_csv_path,
        {"fold", "status", "degree", "n_train_rows", "n_test_rows", "test_prevalence",
         "auroc", "auprc", "youden_threshold", "sensitivity", "specificity", "precision",
         "lambda_per_row", "inner_auroc", "n_features", "features"});

    std::vector<double> aurocs, auprcs, prevalences;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& status = csv_str(table, r, 1);
        std::cout << "fold " << csv_str(table, r, 0) << ": ";
        if (status != "ok") {
            std::cout << status << "\n";
            continue;
        }
        const double auroc_v = csv_double(table, r, 6);
        const double auprc_v = csv_double(table, r, 7);
        const double prev = csv_double(table, r, 5);
        aurocs.push_back(auroc_v);
        auprcs.push_back(auprc_v);
        prevalences.push_back(prev);
        std::cout << "auroc " << format_double(auroc_v) << ", auprc "
                  << format_double(auprc_v) << ", prevalence " << format_double(prev)
                  << ", degree " << csv_str(table, r, 2) << ", features "
                  << table.rows[r][15] << "\n";
    }
    if (aurocs.empty()) {
        std::cout << "no scored folds\n";
        return;
    }
    const auto agg = [](std::vector<double>& v) {
        const double mean =
            std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return format_double(mean) + " [" + format_double(*lo) + ", " + format_double(*hi)
            + "]";
    };
    std::cout << "aggregate auroc: " << agg(aurocs) << "\n"
              << "aggregate auprc: " << agg(auprcs) << "\n"
              << "aggregate prevalence: " << agg(prevalences) << "\n";
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Remifentanil target-change prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path, output_dir, axis, report_path;
    std::vector<double> values;
    long long seed_override = -1;
    int jobs_override = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "configuration file")->required();
        cmd->add_option("--output-dir", output_dir, "override output_dir");
        cmd->add_option("--seed", seed_override, "override seed");
        cmd->add_option("--jobs", jobs_override, "override jobs");
    };

    CLI::App* sim = app.add_subcommand("simulate", "write a synthetic cohort");
    add_common(sim);
    CLI::App* run = app.add_subcommand("run", "run the full pipeline");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "re-run across window lengths");
    add_common(sweep);
    sweep->add_option("--axis", axis, "obs_len or pred_len")->required();
    sweep->add_option("--values", values, "window lengths in seconds")->required();
    CLI::App* rep = app.add_subcommand("report", "pretty-print a report CSV");
    rep->add_option("path", report_path, "report.csv from a run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (rep->parsed()) {
            cmd_report(report_path);
            return 0;
        }
        RunConfig config = load_run_config(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
        if (jobs_override > 0) config.jobs = jobs_override;
        validate(config);

        if (sim->parsed()) cmd_simulate(config);
        else if (run->parsed()) cmd_run(config);
        else cmd_sweep(config, axis, values);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace remi
