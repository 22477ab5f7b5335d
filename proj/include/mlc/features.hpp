#pragma once

// Windowed time-domain features over accelerometer/gyroscope channels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/signal.hpp"

namespace mlc {

enum class Sensor : std::uint8_t { Acc, Gyr };
enum class Axis : std::uint8_t { X, Y, Z, V };  // V: per-sample Euclidean norm

enum class FeatureKind : std::uint8_t { Mean, Variance, Energy, Maximum, Minimum, AbsMinimum, PeakToPeak };

inline constexpr std::array kAllFeatureKinds = {FeatureKind::Mean,    FeatureKind::Variance,
                                                FeatureKind::Energy,  FeatureKind::Maximum,
                                                FeatureKind::Minimum, FeatureKind::AbsMinimum,
                                                FeatureKind::PeakToPeak};

inline std::string_view to_string(Sensor s) { return s == Sensor::Acc ? "ACC" : "GYR"; }

inline std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    case Axis::V: return "V";
    }
    return "?";
}

inline std::string_view to_string(FeatureKind k) {
    switch (k) {
    case FeatureKind::Mean: return "MEAN";
    case FeatureKind::Variance: return "VARIANCE";
    case FeatureKind::Energy: return "ENERGY";
    case FeatureKind::Maximum: return "MAXIMUM";
    case FeatureKind::Minimum: return "MINIMUM";
    case FeatureKind::AbsMinimum: return "ABS_MINIMUM";
    case FeatureKind::PeakToPeak: return "PEAK_TO_PEAK";
    }
    return "?";
}

inline std::optional<Sensor> parse_sensor(std::string_view s) {
    if (s == "ACC") return Sensor::Acc;
    if (s == "GYR") return Sensor::Gyr;
    return std::nullopt;
}

inline std::optional<Axis> parse_axis(std::string_view s) {
    if (s == "X") return Axis::X;
    if (s == "Y") return Axis::Y;
    if (s == "Z") return Axis::Z;
    if (s == "V") return Axis::V;
    return std::nullopt;
}

inline std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
    for (auto k : kAllFeatureKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct ChannelSelector {
    Sensor sensor;
    Axis axis;

    friend bool operator==(const ChannelSelector&, const ChannelSelector&) = default;
};

struct FeatureSpec {
    FeatureKind kind;
    ChannelSelector channel;

    /// e.g. "VARIANCE_GYR_X"
    std::string name() const {
        std::string n(to_string(kind));
        n += '_';
        n += to_string(channel.sensor);
        n += '_';
        n += to_string(channel.axis);
        return n;
    }

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// The fifteen deployed features, in column order.
inline std::vector<FeatureSpec> default_feature_set() {
    using K = FeatureKind;
    constexpr ChannelSelector acc_x{Sensor::Acc, Axis::X}, acc_y{Sensor::Acc, Axis::Y},
        acc_z{Sensor::Acc, Axis::Z}, gyr_x{Sensor::Gyr, Axis::X}, gyr_y{Sensor::Gyr, Axis::Y},
        gyr_v{Sensor::Gyr, Axis::V};
    return {
        {K::Variance, gyr_x},   {K::Energy, gyr_x},     {K::AbsMinimum, gyr_v}, {K::Maximum, gyr_x},
        {K::Minimum, acc_x},    {K::PeakToPeak, acc_x}, {K::Mean, gyr_x},       {K::Energy, acc_y},
        {K::Maximum, acc_x},    {K::PeakToPeak, gyr_x}, {K::Minimum, gyr_x},    {K::Variance, acc_x},
        {K::PeakToPeak, gyr_y}, {K::Minimum, gyr_y},    {K::Mean, acc_z},
    };
}

/// Throws ValidationError when a (kind, channel) pair repeats.
inline void validate_feature_specs(std::span<const FeatureSpec> specs) {
    for (std::size_t i = 0; i < specs.size(); ++i)
        for (std::size_t j = i + 1; j < specs.size(); ++j)
            if (specs[i] == specs[j]) throw ValidationError("duplicate feature " + specs[i].name());
}

struct WindowSpec {
    double odr_hz = kClassifierRateHz;
    std::size_t length = 240;

    void validate() const {
        if (!(odr_hz > 0.0) || !std::isfinite(odr_hz)) throw ValidationError("window odr must be positive");
        if (length < 2) throw ValidationError("window length must be at least 2 samples");
    }
    double duration_s() const { return static_cast<double>(length) / odr_hz; }
};

struct FeatureVector {
    std::vector<double> values;
    double window_end_t = 0.0;
};

inline double channel_value(const SampleFrame& f, ChannelSelector sel) {
    const bool acc = sel.sensor == Sensor::Acc;
    const double x = acc ? f.ax : f.gx;
    const double y = acc ? f.ay : f.gy;
    const double z = acc ? f.az : f.gz;
    switch (sel.axis) {
    case Axis::X: return x;
    case Axis::Y: return y;
    case Axis::Z: return z;
    case Axis::V: return std::sqrt(x * x + y * y + z * z);
    }
    return 0.0;
}

inline std::vector<double> channel_series(std::span<const SampleFrame> window, ChannelSelector sel) {
    detail::require(!window.empty(), "channel_series: window must be nonempty");
    std::vector<double> out;
    out.reserve(window.size());
    for (const auto& f : window) out.push_back(channel_value(f, sel));
    return out;
}

inline double compute_feature(std::span<const double> x, FeatureKind kind) {
    detail::require(!x.empty(), "compute_feature: empty series");
    const double n = static_cast<double>(x.size());
    switch (kind) {
    case FeatureKind::Mean: {
        double s = 0.0;
        for (double v : x) s += v;
        return s / n;
    }
    case FeatureKind::Variance: {
        detail::require(x.size() >= 2, "compute_feature: variance needs at least 2 samples");
        double s = 0.0;
        for (double v : x) s += v;
        const double mean = s / n;
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        return ss / n;
    }
    case FeatureKind::Energy: {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    }
    case FeatureKind::Maximum: return *std::max_element(x.begin(), x.end());
    case FeatureKind::Minimum: return *std::min_element(x.begin(), x.end());
    case FeatureKind::AbsMinimum: {
        double m = std::abs(x[0]);
        for (double v : x) m = std::min(m, std::abs(v));
        return m;
    }
    case FeatureKind::PeakToPeak: {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        return *hi - *lo;
    }
    }
    return 0.0;
}

/// One FeatureVector per complete tumbling window; a trailing partial window is dropped.
inline std::vector<FeatureVector> window_features(const Recording& rec, const WindowSpec& wspec,
                                                  std::span<const FeatureSpec> specs) {
    wspec.validate();
    validate_feature_specs(specs);
    if (!rates_match(rec.rate_hz, wspec.odr_hz))
        throw ValidationError("recording rate " + std::to_string(rec.rate_hz) + " Hz does not match window odr " +
                              std::to_string(wspec.odr_hz) + " Hz");
    std::vector<FeatureVector> out;
    const std::size_t windows = rec.frames.size() / wspec.length;
    out.reserve(windows);
    std::span<const SampleFrame> all(rec.frames);
    for (std::size_t w = 0; w < windows; ++w) {
        const auto slice = all.subspan(w * wspec.length, wspec.length);
        FeatureVector fv;
        fv.window_end_t = slice.back().t;
        fv.values.reserve(specs.size());
        for (const auto& spec : specs) {
            const auto series = channel_series(slice, spec.channel);
            fv.values.push_back(compute_feature(series, spec.kind));
        }
        out.push_back(std::move(fv));
    }
    return out;
}

/// Majority frame label of each complete window (same tie rule as decimation).
inline std::vector<std::optional<std::string>> window_labels(const Recording& rec, const WindowSpec& wspec) {
    std::vector<std::optional<std::string>> out;
    const std::size_t windows = rec.frames.size() / wspec.length;
    for (std::size_t w = 0; w < windows; ++w) {
        const auto first = rec.frames.begin() + static_cast<std::ptrdiff_t>(w * wspec.length);
        out.push_back(detail::majority_label(first, first + static_cast<std::ptrdiff_t>(wspec.length)));
    }
    return out;
}

/// Incremental window features: constant memory per channel, no sample buffer.
class StreamingFeatureState {
public:
    StreamingFeatureState(WindowSpec wspec, std::vector<FeatureSpec> specs)
        : wspec_(wspec), specs_(std::move(specs)) {
        wspec_.validate();
        validate_feature_specs(specs_);
        for (const auto& s : specs_) {
            auto it = std::find(channels_.begin(), channels_.end(), s.channel);
            if (it == channels_.end()) {
                slot_.push_back(channels_.size());
                channels_.push_back(s.channel);
            } else {
                slot_.push_back(static_cast<std::size_t>(it - channels_.begin()));
            }
        }
        acc_.resize(channels_.size());
    }

    std::optional<FeatureVector> push(const SampleFrame& frame) {
        if (last_t_ && !(frame.t > *last_t_))
            throw ContractViolation("StreamingFeatureState::push: frames must arrive in time order");
        last_t_ = frame.t;
        for (std::size_t c = 0; c < channels_.size(); ++c) acc_[c].add(channel_value(frame, channels_[c]));
        if (++count_ < wspec_.length) return std::nullopt;

        FeatureVector fv;
        fv.window_end_t = frame.t;
        fv.values.reserve(specs_.size());
        for (std::size_t i = 0; i < specs_.size(); ++i) fv.values.push_back(acc_[slot_[i]].value(specs_[i].kind));
        count_ = 0;
        for (auto& a : acc_) a = Accumulator{};
        return fv;
    }

    void reset() {
        count_ = 0;
        last_t_.reset();
        for (auto& a : acc_) a = Accumulator{};
    }

    std::size_t pending() const noexcept { return count_; }
    const WindowSpec& window() const noexcept { return wspec_; }
    const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }

private:
    struct Accumulator {
        std::size_t n = 0;
        double sum = 0.0;
        double energy = 0.0;
        double mean = 0.0;  // Welford
        double m2 = 0.0;
        double min = std::numeric_limits<double>::infinity();
        double max = -std::numeric_limits<double>::infinity();
        double abs_min = std::numeric_limits<double>::infinity();

        void add(double x) {
            ++n;
            sum += x;
            energy += x * x;
            const double delta = x - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (x - mean);
            min = std::min(min, x);
            max = std::max(max, x);
            abs_min = std::min(abs_min, std::abs(x));
        }

        double value(FeatureKind k) const {
            switch (k) {
            case FeatureKind::Mean: return sum / static_cast<double>(n);
            case FeatureKind::Variance: return m2 / static_cast<double>(n);
            case FeatureKind::Energy: return energy;
            case FeatureKind::Maximum: return max;
            case FeatureKind::Minimum: return min;
            case FeatureKind::AbsMinimum: return abs_min;
            case FeatureKind::PeakToPeak: return max - min;
            }
            return 0.0;
        }
    };

    WindowSpec wspec_;
    std::vector<FeatureSpec> specs_;
    std::vector<ChannelSelector> channels_;
    std::vector<std::size_t> slot_;  // spec index -> channel accumulator
    std::vector<Accumulator> acc_;
    std::size_t count_ = 0;
    std::optional<double> last_t_;
};

/// `window_end_t,<feature names>[,label]` at nine significant digits.
inline std::string to_feature_csv(std::span<const FeatureVector> vectors,
                                  std::span<const std::optional<std::string>> labels = {}) {
    const std::size_t n = vectors.empty() ? 0 : vectors.front().values.size();
    const bool with_label = !labels.empty();
    std::string out = "window_end_t";
    for (std::size_t i = 1; i <= n; ++i) out += ",F" + std::to_string(i);
    out += with_label ? ",label\n" : "\n";
    for (std::size_t w = 0; w < vectors.size(); ++w) {
        out += detail::fmt9(vectors[w].window_end_t);
        for (double v : vectors[w].values) out += ',' + detail::fmt9(v);
        if (with_label) {
            out += ',';
            if (labels[w]) out += *labels[w];
        }
        out += '\n';
    }
    return out;
}

struct FeatureTable {
    std::vector<FeatureVector> vectors;
    std::vector<std::optional<std::string>> labels;  // empty when the file has no label column
};

inline FeatureTable parse_feature_csv(std::istream& in) {
    FeatureTable table;
    std::string line;
    std::size_t lineno = 0;
    std::size_t nfeat = 0;
    bool with_label = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        const auto cols = detail::split(view, ',');
        if (lineno == 1) {
            if (cols.empty() || detail::trim(cols[0]) != "window_end_t")
                throw ParseError(lineno, "feature table must start with window_end_t");
            with_label = detail::trim(cols.back()) == "label";
            nfeat = cols.size() - 1 - (with_label ? 1 : 0);
            continue;
        }
        if (detail::trim(view).empty()) continue;
        if (cols.size() != nfeat + 1 + (with_label ? 1 : 0))
            throw ParseError(lineno, "wrong field count");
        FeatureVector fv;
        for (std::size_t i = 0; i <= nfeat; ++i) {
            const auto d = detail::parse_double(cols[i]);
            if (!d) throw ParseError(lineno, "non-numeric field '" + std::string(cols[i]) + "'");
            if (i == 0)
                fv.window_end_t = *d;
            else
                fv.values.push_back(*d);
        }
        table.vectors.push_back(std::move(fv));
        if (with_label) {
            const auto lab = detail::trim(cols.back());
            table.labels.push_back(lab.empty() ? std::nullopt : std::optional<std::string>(lab));
        }
    }
    if (lineno == 0) throw ParseError(1, "missing header");
    return table;
}

} // namespace mlc
