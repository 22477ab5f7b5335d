#pragma once

// Deterministic synthetic shank IMU recordings for stance / level walking / stair ascent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/signal.hpp"

namespace mlc {

inline const std::vector<std::string>& default_class_set() {
    static const std::vector<std::string> classes{"walk", "stairsUp", "stance"};
    return classes;
}

struct SynthSegment {
    std::string mode;  // "stance", "walk" or "stairsUp"
    double duration_s;
};

struct SynthSpec {
    double sigma_acc_g = 0.02;
    double sigma_gyr_dps = 1.0;
    double walk_freq_hz = 1.6;
    double walk_amp_dps = 120.0;
    double stairs_freq_hz = 0.9;
    double stairs_amp_dps = 220.0;
    double rate_hz = kAcquisitionRateHz;
    std::uint64_t seed = 1;
    std::vector<SynthSegment> segments{{"stance", 5.0}, {"walk", 4.0}, {"stairsUp", 9.0}};
    std::vector<std::string> class_set = default_class_set();

    void validate() const {
        if (walk_amp_dps == stairs_amp_dps) throw ValidationError("walk and stair amplitudes must differ");
        if (walk_freq_hz == stairs_freq_hz) throw ValidationError("walk and stair frequencies must differ");
        if (!(rate_hz > 0.0)) throw ValidationError("synthesis rate must be positive");
        if (sigma_acc_g < 0.0 || sigma_gyr_dps < 0.0) throw ValidationError("noise levels must be non-negative");
        if (segments.empty()) throw ValidationError("no segments to synthesize");
        for (const auto& s : segments) {
            if (s.mode != "stance" && s.mode != "walk" && s.mode != "stairsUp")
                throw ValidationError("unknown synthetic mode '" + s.mode + "'");
            if (std::find(class_set.begin(), class_set.end(), s.mode) == class_set.end())
                throw ValidationError("mode '" + s.mode + "' is not in the class set");
            if (!(s.duration_s > 0.0)) throw ValidationError("segment durations must be positive");
        }
    }
};

/// "stance:5,walk:4,stairsUp:9"
inline std::vector<SynthSegment> parse_segments(std::string_view text) {
    std::vector<SynthSegment> out;
    for (auto item : detail::split(text, ',')) {
        item = detail::trim(item);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw ValidationError("segment '" + std::string(item) + "' lacks ':'");
        const auto d = detail::parse_double(item.substr(colon + 1));
        if (!d) throw ValidationError("bad segment duration in '" + std::string(item) + "'");
        out.push_back({std::string(detail::trim(item.substr(0, colon))), *d});
    }
    return out;
}

/// Same spec (seed included) gives a bitwise-identical recording.
inline Recording synthesize(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    Recording rec;
    rec.rate_hz = spec.rate_hz;
    rec.class_set = spec.class_set;
    std::size_t k = 0;
    for (const auto& seg : spec.segments) {
        const auto n = static_cast<std::size_t>(std::llround(seg.duration_s * spec.rate_hz));
        for (std::size_t i = 0; i < n; ++i, ++k) {
            const double t = static_cast<double>(k) / spec.rate_hz;
            SampleFrame f{t, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, seg.mode};
            if (seg.mode == "walk") {
                const double a = spec.walk_amp_dps, w = two_pi * spec.walk_freq_hz;
                f.gx = a * std::sin(w * t);
                f.gy = 0.25 * a * std::sin(w * t + 1.0);
                f.gz = 0.10 * a * std::sin(2.0 * w * t);
                f.ax = 0.30 * std::sin(w * t + 0.5);
                f.ay = 0.10 * std::sin(2.0 * w * t);
                f.az = 1.0 + 0.25 * std::sin(2.0 * w * t);
            } else if (seg.mode == "stairsUp") {
                const double a = spec.stairs_amp_dps, w = two_pi * spec.stairs_freq_hz;
                f.gx = a * std::sin(w * t);
                f.gy = 0.20 * a * std::sin(w * t + 0.8);
                f.gz = 0.08 * a * std::sin(2.0 * w * t);
                f.ax = 0.70 * std::sin(w * t + 0.3);
                f.ay = 0.15 * std::sin(2.0 * w * t);
                f.az = 1.0 + 0.35 * std::sin(2.0 * w * t);
            }
            f.ax += spec.sigma_acc_g * unit(rng);
            f.ay += spec.sigma_acc_g * unit(rng);
            f.az += spec.sigma_acc_g * unit(rng);
            f.gx += spec.sigma_gyr_dps * unit(rng);
            f.gy += spec.sigma_gyr_dps * unit(rng);
            f.gz += spec.sigma_gyr_dps * unit(rng);
            rec.frames.push_back(std::move(f));
        }
    }
    return rec;
}

} // namespace mlc
