#pragma once

// Labeled six-axis recordings: CSV ingest/emit and block-average decimation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mlc/error.hpp"

namespace mlc {

inline constexpr double kAcquisitionRateHz = 7680.0;
inline constexpr double kClassifierRateHz = 240.0;

/// One six-axis inertial sample. Acceleration in g, angular rate in dps.
struct SampleFrame {
    double t = 0.0;
    double ax = 0.0, ay = 0.0, az = 0.0;
    double gx = 0.0, gy = 0.0, gz = 0.0;
    std::optional<std::string> label;

    friend bool operator==(const SampleFrame&, const SampleFrame&) = default;
};

struct Recording {
    std::vector<SampleFrame> frames;
    double rate_hz = 0.0;
    std::vector<std::string> class_set;

    bool labeled() const {
        return std::any_of(frames.begin(), frames.end(),
                           [](const SampleFrame& f) { return f.label.has_value(); });
    }
    double duration_s() const { return static_cast<double>(frames.size()) / rate_hz; }
};

inline bool rates_match(double a, double b, double rel_tol = 0.01) {
    return std::abs(a - b) <= rel_tol * std::abs(b);
}

struct DecimationSpec {
    double input_rate_hz;
    double output_rate_hz;
    std::size_t factor;

    /// Throws ValidationError unless input is an integer multiple of output.
    static DecimationSpec make(double input_rate_hz, double output_rate_hz) {
        if (!(input_rate_hz > 0.0) || !(output_rate_hz > 0.0) || !std::isfinite(input_rate_hz) ||
            !std::isfinite(output_rate_hz))
            throw ValidationError("decimation rates must be positive and finite");
        const double ratio = input_rate_hz / output_rate_hz;
        const double rounded = std::round(ratio);
        if (rounded < 1.0 || std::abs(rounded * output_rate_hz - input_rate_hz) > 1e-9 * input_rate_hz)
            throw ValidationError("input rate " + std::to_string(input_rate_hz) +
                                  " Hz is not an integer multiple of " + std::to_string(output_rate_hz) +
                                  " Hz");
        return {input_rate_hz, output_rate_hz, static_cast<std::size_t>(rounded)};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Nine significant digits, the interchange precision of every CSV we write.
inline std::string fmt9(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return std::string(buf, static_cast<std::size_t>(n));
}

/// Majority vote over present labels; ties go to the label seen first.
template <typename It>
std::optional<std::string> majority_label(It first, It last) {
    std::vector<std::pair<std::string, std::size_t>> counts;
    for (auto it = first; it != last; ++it) {
        if (!it->label) continue;
        auto c = std::find_if(counts.begin(), counts.end(),
                              [&](const auto& p) { return p.first == *it->label; });
        if (c == counts.end())
            counts.emplace_back(*it->label, 1);
        else
            ++c->second;
    }
    if (counts.empty()) return std::nullopt;
    auto best = counts.begin();
    for (auto c = counts.begin(); c != counts.end(); ++c)
        if (c->second > best->second) best = c;
    return best->first;
}

} // namespace detail

inline constexpr std::string_view kRecordingColumns[] = {"t_s",    "ax_g",   "ay_g",   "az_g",
                                                         "gx_dps", "gy_dps", "gz_dps", "label"};

/// Parse a recording in the `t_s,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps[,label]` layout.
///
/// The rate is the reciprocal of the median inter-frame spacing. A single-frame
/// file has no spacing, so it takes `fallback_rate_hz`.
inline Recording parse_csv(std::istream& in, std::vector<std::string> class_set,
                           double fallback_rate_hz = kAcquisitionRateHz) {
    if (class_set.empty()) throw ContractViolation("parse_csv: class_set must be nonempty");

    std::string line;
    std::size_t lineno = 0;
    bool has_label = false;
    bool have_header = false;
    Recording rec;
    rec.class_set = std::move(class_set);

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (!have_header) {
            if (lineno == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
            const auto cols = detail::split(view, ',');
            if (cols.size() != 7 && cols.size() != 8)
                throw ParseError(lineno, "header must have 7 or 8 columns, got " + std::to_string(cols.size()));
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (detail::trim(cols[i]) != kRecordingColumns[i])
                    throw ParseError(lineno, "unexpected header column '" + std::string(detail::trim(cols[i])) +
                                                 "', expected '" + std::string(kRecordingColumns[i]) + "'");
            has_label = cols.size() == 8;
            have_header = true;
            continue;
        }
        if (detail::trim(view).empty()) continue;

        const auto cols = detail::split(view, ',');
        const std::size_t want = has_label ? 8 : 7;
        if (cols.size() != want)
            throw ParseError(lineno, "expected " + std::to_string(want) + " fields, got " +
                                         std::to_string(cols.size()));
        double v[7];
        for (std::size_t i = 0; i < 7; ++i) {
            const auto d = detail::parse_double(cols[i]);
            if (!d) throw ParseError(lineno, "non-numeric field '" + std::string(cols[i]) + "'");
            if (!std::isfinite(*d)) throw ParseError(lineno, "non-finite value in " + std::string(kRecordingColumns[i]));
            v[i] = *d;
        }
        SampleFrame f{v[0], v[1], v[2], v[3], v[4], v[5], v[6], std::nullopt};
        if (has_label) {
            const auto lab = detail::trim(cols[7]);
            if (!lab.empty()) {
                if (std::find(rec.class_set.begin(), rec.class_set.end(), lab) == rec.class_set.end())
                    throw ValidationError("line " + std::to_string(lineno) + ": unknown label '" +
                                          std::string(lab) + "'");
                f.label = std::string(lab);
            }
        }
        if (f.t < 0.0) throw ValidationError("line " + std::to_string(lineno) + ": negative timestamp");
        if (!rec.frames.empty() && !(f.t > rec.frames.back().t))
            throw ValidationError("line " + std::to_string(lineno) + ": timestamps must strictly increase");
        rec.frames.push_back(std::move(f));
    }
    if (!have_header) throw ParseError(lineno + 1, "missing header");
    if (rec.frames.empty()) throw ValidationError("recording has no frames");

    if (rec.frames.size() < 2) {
        rec.rate_hz = fallback_rate_hz;
        return rec;
    }
    std::vector<double> dt(rec.frames.size() - 1);
    for (std::size_t i = 1; i < rec.frames.size(); ++i) dt[i - 1] = rec.frames[i].t - rec.frames[i - 1].t;
    auto mid = dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2);
    std::nth_element(dt.begin(), mid, dt.end());
    double median = *mid;
    if (dt.size() % 2 == 0) median = 0.5 * (median + *std::max_element(dt.begin(), mid));
    rec.rate_hz = 1.0 / median;

    // Isolated jitter is tolerated; a gap or a wrong rate shows up in the mean spacing.
    const double mean_dt = (rec.frames.back().t - rec.frames.front().t) / static_cast<double>(dt.size());
    if (!rates_match(1.0 / mean_dt, rec.rate_hz))
        throw ValidationError("mean frame spacing disagrees with the median rate by more than 1%");
    return rec;
}

inline Recording parse_csv_text(std::string_view text, std::vector<std::string> class_set,
                                double fallback_rate_hz = kAcquisitionRateHz) {
    std::istringstream in{std::string(text)};
    return parse_csv(in, std::move(class_set), fallback_rate_hz);
}

/// Emits the layout parse_csv reads. The label column is written only for labeled recordings.
inline std::string to_csv(const Recording& rec) {
    const bool with_label = rec.labeled();
    std::string out = "t_s,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps";
    out += with_label ? ",label\n" : "\n";
    out.reserve(rec.frames.size() * 80);
    for (const auto& f : rec.frames) {
        const double values[] = {f.t, f.ax, f.ay, f.az, f.gx, f.gy, f.gz};
        for (std::size_t i = 0; i < 7; ++i) {
            if (i) out += ',';
            out += detail::fmt9(values[i]);
        }
        if (with_label) {
            out += ',';
            if (f.label) out += *f.label;
        }
        out += '\n';
    }
    return out;
}

/// Block-average decimation by an integer factor.
///
/// Each output frame is the channel-wise mean of `factor` consecutive input
/// frames, stamped with the first frame's time and labeled by block majority.
inline Recording decimate(const Recording& rec, const DecimationSpec& spec) {
    if (!rates_match(rec.rate_hz, spec.input_rate_hz))
        throw ValidationError("recording rate " + std::to_string(rec.rate_hz) + " Hz does not match " +
                              std::to_string(spec.input_rate_hz) + " Hz");
    if (spec.factor == 0) throw ValidationError("decimation factor must be positive");
    if (rec.frames.size() < spec.factor)
        throw ValidationError("recording has fewer frames than the decimation factor");

    Recording out;
    out.rate_hz = spec.output_rate_hz;
    out.class_set = rec.class_set;
    const std::size_t blocks = rec.frames.size() / spec.factor;
    out.frames.reserve(blocks);
    const double n = static_cast<double>(spec.factor);
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto first = rec.frames.begin() + static_cast<std::ptrdiff_t>(b * spec.factor);
        const auto last = first + static_cast<std::ptrdiff_t>(spec.factor);
        SampleFrame acc{first->t, 0, 0, 0, 0, 0, 0, std::nullopt};
        for (auto it = first; it != last; ++it) {
            acc.ax += it->ax;
            acc.ay += it->ay;
            acc.az += it->az;
            acc.gx += it->gx;
            acc.gy += it->gy;
            acc.gz += it->gz;
        }
        acc.ax /= n;
        acc.ay /= n;
        acc.az /= n;
        acc.gx /= n;
        acc.gy /= n;
        acc.gz /= n;
        acc.label = detail::majority_label(first, last);
        out.frames.push_back(std::move(acc));
    }
    return out;
}

/// Brings a recording to `target_hz`, decimating when it was captured faster.
inline Recording to_rate(const Recording& rec, double target_hz) {
    if (rates_match(rec.rate_hz, target_hz)) return rec;
    return decimate(rec, DecimationSpec::make(std::round(rec.rate_hz), target_hz));
}

} // namespace mlc
