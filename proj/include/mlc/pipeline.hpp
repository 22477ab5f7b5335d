#pragma once

// End-to-end drivers: training from a labeled recording and closed-loop replay
// of a recording through the virtual sensor and the host.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mlc/config.hpp"
#include "mlc/features.hpp"
#include "mlc/host.hpp"
#include "mlc/metrics.hpp"
#include "mlc/selection.hpp"
#include "mlc/signal.hpp"
#include "mlc/tree.hpp"
#include "mlc/virtual_sensor.hpp"

namespace mlc {

struct TrainOptions {
    TreeParams tree;
    std::size_t feature_count = 15;
    WindowSpec window;
    LabelEncoding encoding = default_encoding();
    std::vector<FeatureSpec> candidates = default_feature_set();
};

struct TrainResult {
    LabeledFeatureSet dataset;  // all candidate features
    std::optional<FeatureRanking> ranking;
    std::vector<std::size_t> selected;  // indices into dataset.feature_specs
    DecisionTree tree;
    MlcConfig config;
    ConfusionMatrix matrix;
};

inline TrainResult train_pipeline(const Recording& rec, const TrainOptions& opt) {
    const auto stream = to_rate(rec, opt.window.odr_hz);
    TrainResult r;
    r.dataset = make_labeled_set(stream, opt.window, opt.candidates);
    if (r.dataset.empty()) throw DatasetError("recording is shorter than one labeled window");
    if (r.dataset.distinct_labels() < 2) throw DatasetError("training needs at least 2 distinct labels");
    try {
        r.ranking = anova_rank(r.dataset);
    } catch (const ValidationError&) {
        // too few windows per class for ANOVA; RFE and training still work
    }
    r.selected = rfe_select_indices(r.dataset, opt.feature_count, opt.tree);
    const auto subset = r.dataset.select(r.selected);
    r.tree = train_tree(subset, opt.tree);
    r.config = compile_config(r.tree, subset.feature_specs, opt.window, opt.encoding, r.dataset.class_set);
    r.matrix = evaluate(r.tree, subset);
    return r;
}

inline std::string format_train_report(const TrainResult& r) {
    std::string out;
    out += "instances " + std::to_string(r.matrix.total()) + '\n';
    out += "correct " + std::to_string(r.matrix.trace()) + '/' + std::to_string(r.matrix.total()) + '\n';
    out += "accuracy " + detail::fmt9(r.matrix.accuracy()) + '\n';
    out += "kappa " + detail::fmt9(r.matrix.kappa()) + '\n';
    out += "tree_leaves " + std::to_string(r.tree.leaves()) + '\n';
    out += "tree_size " + std::to_string(r.tree.size()) + '\n';
    out += "selected";
    for (auto i : r.selected) out += ' ' + r.dataset.feature_specs[i].name();
    out += '\n';
    if (r.ranking) {
        out += "anova";
        for (auto i : r.ranking->order)
            out += ' ' + r.dataset.feature_specs[i].name() + '=' + detail::fmt9(r.ranking->scores[i]);
        out += '\n';
    }
    out += "confusion\n" + format_confusion(r.matrix);
    return out;
}

/// Sensor and host wired together: the host is serviced whenever the line is up.
class ClosedLoop {
public:
    ClosedLoop(const MlcConfig& cfg, WakeupSpec wakeup = {}) : sensor_(wakeup), host_(cfg.encoding) {
        sensor_.load_config(cfg);
    }

    /// Returns true when the frame caused a service routine.
    bool step(const SampleFrame& frame) {
        sensor_.clock_in(frame);
        if (!sensor_.interrupt_asserted()) return false;
        host_.on_interrupt(frame.t, sensor_);
        return true;
    }

    VirtualSensor& sensor() noexcept { return sensor_; }
    HostController& host() noexcept { return host_; }

private:
    VirtualSensor sensor_;
    HostController host_;
};

struct ReplayWindow {
    WindowDecision decision;
    std::optional<std::string> truth;
};

struct ReplayResult {
    std::vector<ReplayWindow> windows;
    std::vector<InterruptEvent> events;
    ModeTimeline timeline;
    std::vector<HostFault> faults;
    std::size_t host_reads = 0;
    std::size_t interrupts = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

/// Streams `rec` (brought to the config's rate) through sensor and host.
/// The host is armed at the first frame and the timeline closes one sample
/// period after the last.
inline ReplayResult replay(const Recording& rec, const MlcConfig& cfg, WakeupSpec wakeup = {}) {
    validate(cfg);
    const auto stream = to_rate(rec, cfg.odr_hz);
    ClosedLoop loop(cfg, wakeup);
    ReplayResult r;
    r.t_start = stream.frames.front().t;
    r.t_end = r.t_start + static_cast<double>(stream.frames.size()) / cfg.odr_hz;
    loop.host().arm(r.t_start);
    for (const auto& f : stream.frames) loop.step(f);

    const auto truth = window_labels(stream, cfg.window());
    const auto& decisions = loop.sensor().decisions();
    for (std::size_t w = 0; w < decisions.size(); ++w)
        r.windows.push_back({decisions[w], w < truth.size() ? truth[w] : std::nullopt});
    r.events = loop.sensor().events();
    r.timeline = loop.host().finalize(r.t_end);
    r.faults = loop.host().faults();
    r.host_reads = loop.host().reads();
    r.interrupts = loop.host().interrupts();
    return r;
}

/// Batch classification of every complete window, without the emulator.
inline std::vector<std::string> classify_offline(const Recording& rec, const MlcConfig& cfg) {
    const auto stream = to_rate(rec, cfg.odr_hz);
    std::vector<std::string> out;
    for (const auto& v : window_features(stream, cfg.window(), cfg.feature_specs)) out.push_back(predict(cfg.tree, v));
    return out;
}

/// `window_end_t,dec_tree_out,predicted,label`
inline std::string to_window_csv(const std::vector<ReplayWindow>& windows) {
    std::string out = "window_end_t,dec_tree_out,predicted,label\n";
    for (const auto& w : windows)
        out += detail::fmt9(w.decision.window_end_t) + ',' + std::to_string(w.decision.value) + ',' +
               w.decision.label + ',' + w.truth.value_or("") + '\n';
    return out;
}

struct PlotOptions {
    double rate_hz = 60.0;
    double start_s = 0.0;
    double duration_s = 0.0;  // 0: to the end
};

/// Per-channel trace at a reduced rate, plus the latest on-sensor decision when a config is given.
inline std::string plot_data(const Recording& rec, const PlotOptions& opt, const MlcConfig* cfg = nullptr,
                             WakeupSpec wakeup = {}) {
    std::vector<WindowDecision> decisions;
    if (cfg) {
        VirtualSensor sensor(wakeup);
        sensor.load_config(*cfg);
        for (const auto& f : to_rate(rec, cfg->odr_hz).frames) sensor.clock_in(f);
        decisions = sensor.decisions();
    }
    const auto trace = to_rate(rec, opt.rate_hz);
    const double stop = opt.duration_s > 0.0 ? opt.start_s + opt.duration_s : std::numeric_limits<double>::infinity();
    std::string out = "t_s,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps,label";
    out += cfg ? ",dec_tree_out\n" : "\n";
    std::size_t next = 0;
    std::optional<std::uint8_t> current;
    for (const auto& f : trace.frames) {
        while (next < decisions.size() && decisions[next].window_end_t <= f.t) current = decisions[next++].value;
        if (f.t < opt.start_s || f.t >= stop) continue;
        const double values[] = {f.t, f.ax, f.ay, f.az, f.gx, f.gy, f.gz};
        for (std::size_t i = 0; i < 7; ++i) {
            if (i) out += ',';
            out += detail::fmt9(values[i]);
        }
        out += ',' + f.label.value_or("");
        if (cfg) out += ',' + (current ? std::to_string(*current) : std::string());
        out += '\n';
    }
    return out;
}

} // namespace mlc
