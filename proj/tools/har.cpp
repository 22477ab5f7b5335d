// har: synthetic data, training, compilation and closed-loop replay for the
// on-sensor activity classifier.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlc/mlc.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
    kOk = 0,
    kMissingFile = 2,
    kParseFailure = 3,
    kInvalidConfig = 4,
    kDegenerateDataset = 5,
    kInvalidInput = 6,
    kIoFailure = 7,
    kInternal = 8,
};

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 ok, 2 missing file, 3 parse failure, 4 invalid config, 5 degenerate dataset,\n"
    "            6 invalid input or parameters, 7 output write failure, 8 internal error.\n"
    "            Command-line usage errors use CLI11's codes (>= 100).";

std::vector<std::string> split_classes(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    if (out.empty()) throw mlc::ValidationError("empty class list");
    return out;
}

mlc::Recording load_recording(const std::string& path, const std::string& classes) {
    std::istringstream in(mlc::read_file(path));
    return mlc::parse_csv(in, split_classes(classes));
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        mlc::write_file_atomic(out, text);
}

struct Common {
    std::string classes = "walk,stairsUp,stance";
    std::string encoding = "stance=8,walk=0,stairsUp=4";
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"On-sensor activity classification toolchain"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    app.get_formatter()->column_width(36);

    Common common;
    const auto add_classes = [&](CLI::App* sub) {
        sub->add_option("--classes", common.classes, "Class set, comma separated")->capture_default_str();
    };
    const auto add_encoding = [&](CLI::App* sub) {
        sub->add_option("--encoding", common.encoding, "Register encoding, class=value,...")->capture_default_str();
    };

    // synth
    mlc::SynthSpec synth;
    std::string synth_segments = "stance:5,walk:4,stairsUp:9";
    std::string synth_out;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a labeled synthetic recording (CSV)");
    cmd_synth->add_option("--segments", synth_segments, "mode:seconds,...")->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
    cmd_synth->add_option("--rate", synth.rate_hz, "Sample rate in Hz")->capture_default_str();
    cmd_synth->add_option("--sigma-acc", synth.sigma_acc_g, "Accelerometer noise, g")->capture_default_str();
    cmd_synth->add_option("--sigma-gyr", synth.sigma_gyr_dps, "Gyroscope noise, dps")->capture_default_str();
    cmd_synth->add_option("--walk-freq", synth.walk_freq_hz, "Walking cadence, Hz")->capture_default_str();
    cmd_synth->add_option("--walk-amp", synth.walk_amp_dps, "Walking gyro-X amplitude, dps")->capture_default_str();
    cmd_synth->add_option("--stairs-freq", synth.stairs_freq_hz, "Stair cadence, Hz")->capture_default_str();
    cmd_synth->add_option("--stairs-amp", synth.stairs_amp_dps, "Stair gyro-X amplitude, dps")->capture_default_str();
    cmd_synth->add_option("--out", synth_out, "Output CSV (- for stdout)")->required();
    add_classes(cmd_synth);

    // train
    mlc::TrainOptions train;
    std::string train_in, train_out, train_report, train_features_out;
    auto* cmd_train = app.add_subcommand("train", "Select features, train a tree and write an MLCFG file");
    cmd_train->add_option("recording", train_in, "Labeled recording CSV")->required();
    cmd_train->add_option("--out", train_out, "Output MLCFG path")->required();
    cmd_train->add_option("--report", train_report, "Metrics report path (default stdout)");
    cmd_train->add_option("--features-out", train_features_out, "Write the labeled feature table here");
    cmd_train->add_option("--max-depth", train.tree.max_depth, "Maximum tree depth")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_train->add_option("--min-leaf", train.tree.min_leaf, "Minimum samples per leaf")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_train->add_option("--features", train.feature_count, "Features kept by RFE")->capture_default_str()->check(CLI::Range(1, 15));
    add_classes(cmd_train);
    add_encoding(cmd_train);

    // select
    std::string select_in, select_out;
    std::size_t select_count = 15;
    mlc::TreeParams select_tree;
    auto* cmd_select = app.add_subcommand("select", "ANOVA ranking and RFE feature selection report");
    cmd_select->add_option("recording", select_in, "Labeled recording CSV")->required();
    cmd_select->add_option("--features", select_count, "Features kept by RFE")->capture_default_str()->check(CLI::Range(1, 15));
    cmd_select->add_option("--max-depth", select_tree.max_depth, "Tree depth used for importances")->capture_default_str();
    cmd_select->add_option("--min-leaf", select_tree.min_leaf, "Leaf size used for importances")->capture_default_str();
    cmd_select->add_option("--out", select_out, "Report path (default stdout)");
    add_classes(cmd_select);

    // compile
    std::string compile_in, compile_out;
    auto* cmd_compile = app.add_subcommand("compile", "Validate an MLCFG file and re-emit it canonically");
    cmd_compile->add_option("config", compile_in, "Input MLCFG")->required();
    cmd_compile->add_option("--out", compile_out, "Output MLCFG (- for stdout)")->required();
    auto* compile_enc = cmd_compile->add_option("--encoding", common.encoding, "Replace the register encoding");

    // replay
    std::string replay_in, replay_cfg, replay_out;
    mlc::WakeupSpec wakeup;
    auto* cmd_replay = app.add_subcommand("replay", "Run a recording through the virtual sensor and host");
    cmd_replay->add_option("recording", replay_in, "Recording CSV")->required();
    cmd_replay->add_option("--config", replay_cfg, "MLCFG file")->required();
    cmd_replay->add_option("--out", replay_out, "Output directory")->required();
    cmd_replay->add_option("--wakeup-g", wakeup.threshold_g, "Wakeup threshold on | |acc| - 1 g |")->capture_default_str();
    add_classes(cmd_replay);

    // eval
    std::string eval_in, eval_matrix, eval_out;
    auto* cmd_eval = app.add_subcommand("eval", "Confusion matrix, accuracy and Cohen's kappa");
    cmd_eval->add_option("pairs", eval_in, "CSV with 'label' and 'predicted' columns (e.g. replay windows.csv)");
    cmd_eval->add_option("--matrix", eval_matrix, "Confusion matrix rows, e.g. \"16,0,0;0,16,0;0,0,11\"");
    cmd_eval->add_option("--out", eval_out, "Report path (default stdout)");
    add_classes(cmd_eval);

    // plotdata
    std::string plot_in, plot_cfg, plot_out;
    mlc::PlotOptions plot;
    auto* cmd_plot = app.add_subcommand("plotdata", "Downsampled per-channel CSV for plotting");
    cmd_plot->add_option("recording", plot_in, "Recording CSV")->required();
    cmd_plot->add_option("--config", plot_cfg, "MLCFG file; adds the decision trace");
    cmd_plot->add_option("--rate", plot.rate_hz, "Output rate in Hz")->capture_default_str();
    cmd_plot->add_option("--start", plot.start_s, "Start time, s")->capture_default_str();
    cmd_plot->add_option("--duration", plot.duration_s, "Span in s (0 = to the end)")->capture_default_str();
    cmd_plot->add_option("--out", plot_out, "Output CSV (- for stdout)")->required();
    add_classes(cmd_plot);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_synth->parsed()) {
            synth.segments = mlc::parse_segments(synth_segments);
            synth.class_set = split_classes(common.classes);
            emit(synth_out, mlc::to_csv(mlc::synthesize(synth)));
        } else if (cmd_train->parsed()) {
            train.encoding = mlc::LabelEncoding::parse(common.encoding);
            const auto rec = load_recording(train_in, common.classes);
            const auto result = mlc::train_pipeline(rec, train);
            mlc::write_file_atomic(train_out, mlc::to_text(result.config));
            if (!train_features_out.empty()) {
                std::vector<std::optional<std::string>> labels(result.dataset.labels.begin(), result.dataset.labels.end());
                mlc::write_file_atomic(train_features_out, mlc::to_feature_csv(result.dataset.vectors, labels));
            }
            emit(train_report, mlc::format_train_report(result));
        } else if (cmd_select->parsed()) {
            const auto rec = load_recording(select_in, common.classes);
            const mlc::WindowSpec window;
            const auto data = mlc::make_labeled_set(mlc::to_rate(rec, window.odr_hz), window, mlc::default_feature_set());
            if (data.distinct_labels() < 2) throw mlc::DatasetError("selection needs at least 2 distinct labels");
            const auto ranking = mlc::anova_rank(data);
            std::string report = "rank,feature,f_score\n";
            for (std::size_t r = 0; r < ranking.order.size(); ++r) {
                const auto i = ranking.order[r];
                report += std::to_string(r + 1) + ',' + data.feature_specs[i].name() + ',' +
                          mlc::detail::fmt9(ranking.scores[i]) + '\n';
            }
            report += "selected";
            for (const auto& s : mlc::rfe_select(data, select_count, select_tree)) report += ' ' + s.name();
            emit(select_out, report + '\n');
        } else if (cmd_compile->parsed()) {
            auto cfg = mlc::parse_config(mlc::read_file(compile_in));
            if (compile_enc->count() > 0)
                cfg = mlc::compile_config(cfg.tree, cfg.feature_specs, cfg.window(), mlc::LabelEncoding::parse(common.encoding),
                                          cfg.class_set());
            emit(compile_out, mlc::to_text(cfg));
        } else if (cmd_replay->parsed()) {
            const auto cfg = mlc::parse_config(mlc::read_file(replay_cfg));
            const auto rec = load_recording(replay_in, common.classes);
            const auto result = mlc::replay(rec, cfg, wakeup);
            fs::create_directories(replay_out);
            const fs::path dir(replay_out);
            mlc::write_file_atomic(dir / "timeline.csv", mlc::to_timeline_csv(result.timeline));
            mlc::write_file_atomic(dir / "events.csv", mlc::to_event_csv(result.events));
            mlc::write_file_atomic(dir / "windows.csv", mlc::to_window_csv(result.windows));
            mlc::write_file_atomic(dir / "faults.csv", mlc::to_fault_csv(result.faults));
            std::cout << "windows " << result.windows.size() << "\ninterrupts " << result.interrupts << "\nhost_reads "
                      << result.host_reads << "\nsegments " << result.timeline.segments.size() << '\n'
                      << mlc::to_timeline_csv(result.timeline);
        } else if (cmd_eval->parsed()) {
            const auto classes = split_classes(common.classes);
            mlc::ConfusionMatrix m(classes);
            if (!eval_matrix.empty()) {
                std::stringstream rows(eval_matrix);
                std::string row;
                std::size_t i = 0;
                while (std::getline(rows, row, ';')) {
                    if (i >= classes.size()) throw mlc::ValidationError("matrix has more rows than classes");
                    std::size_t j = 0;
                    for (auto cell : mlc::detail::split(row, ',')) {
                        const auto v = mlc::detail::parse_double(cell);
                        if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v)) || j >= classes.size())
                            throw mlc::ValidationError("bad matrix cell '" + std::string(cell) + "'");
                        m.counts[i][j++] = static_cast<std::size_t>(*v);
                    }
                    if (j != classes.size()) throw mlc::ValidationError("matrix row has the wrong width");
                    ++i;
                }
                if (i != classes.size()) throw mlc::ValidationError("matrix must be square over the class set");
            } else if (!eval_in.empty()) {
                std::istringstream in(mlc::read_file(eval_in));
                std::string line;
                std::getline(in, line);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                const auto header = mlc::detail::split(line, ',');
                const auto col = [&](std::string_view name) {
                    for (std::size_t c = 0; c < header.size(); ++c)
                        if (header[c] == name) return c;
                    throw mlc::ParseError(1, "missing column '" + std::string(name) + "'");
                };
                const auto truth_col = col("label"), pred_col = col("predicted");
                std::vector<std::string> truth, pred;
                std::size_t lineno = 1;
                while (std::getline(in, line)) {
                    ++lineno;
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty()) continue;
                    const auto cells = mlc::detail::split(line, ',');
                    if (cells.size() != header.size()) throw mlc::ParseError(lineno, "wrong field count");
                    if (cells[truth_col].empty()) continue;  // unlabeled window
                    truth.emplace_back(cells[truth_col]);
                    pred.emplace_back(cells[pred_col]);
                }
                m = mlc::confusion_from_pairs(classes, truth, pred);
            } else {
                throw mlc::ValidationError("eval needs a pairs CSV or --matrix");
            }
            if (m.total() == 0) throw mlc::DatasetError("nothing to evaluate");
            std::string report = "instances " + std::to_string(m.total()) + "\ncorrect " + std::to_string(m.trace()) + '/' +
                                 std::to_string(m.total()) + "\naccuracy " + mlc::detail::fmt9(m.accuracy()) + "\nkappa " +
                                 mlc::detail::fmt9(m.kappa()) + "\nconfusion\n" + mlc::format_confusion(m);
            emit(eval_out, report);
        } else if (cmd_plot->parsed()) {
            const auto rec = load_recording(plot_in, common.classes);
            std::optional<mlc::MlcConfig> cfg;
            if (!plot_cfg.empty()) cfg = mlc::parse_config(mlc::read_file(plot_cfg));
            emit(plot_out, mlc::plot_data(rec, plot, cfg ? &*cfg : nullptr));
        }
    } catch (const mlc::FileNotFound& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMissingFile;
    } catch (const mlc::ParseError& e) {
        std::cerr << "error: parse failure: " << e.what() << '\n';
        return kParseFailure;
    } catch (const mlc::ConfigError& e) {
        std::cerr << "error: invalid config: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const mlc::DatasetError& e) {
        std::cerr << "error: degenerate dataset: " << e.what() << '\n';
        return kDegenerateDataset;
    } catch (const mlc::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const mlc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
