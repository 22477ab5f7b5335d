#pragma once

// Interrupt-driven host: sleeps until the sensor line asserts, reads status and
// label registers, and builds a mode timeline. It never sees raw samples.

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "mlc/config.hpp"
#include "mlc/error.hpp"
#include "mlc/virtual_sensor.hpp"

namespace mlc {

/// Anything the host can issue register reads against.
template <typename T>
concept RegisterBus = requires(T& bus, std::uint8_t addr) {
    { bus.read_register(addr) } -> std::convertible_to<std::uint8_t>;
};

/// Timeline instants are kept in integer microseconds so durations add up exactly.
using Micros = std::chrono::duration<std::int64_t, std::micro>;

inline Micros to_micros(double seconds) { return Micros{std::llround(seconds * 1e6)}; }
inline double to_seconds(Micros m) { return static_cast<double>(m.count()) / 1e6; }

struct ModeSegment {
    std::string mode;
    Micros start;
    Micros end;

    Micros duration() const { return end - start; }

    friend bool operator==(const ModeSegment&, const ModeSegment&) = default;
};

struct ModeTimeline {
    std::vector<ModeSegment> segments;

    Micros total() const {
        Micros t{0};
        for (const auto& s : segments) t += s.duration();
        return t;
    }

    std::size_t transitions() const { return segments.empty() ? 0 : segments.size() - 1; }

    /// Contiguous, positive-length, no two neighbours with the same mode.
    bool well_formed() const {
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].duration() <= Micros{0}) return false;
            if (i + 1 < segments.size() &&
                (segments[i].end != segments[i + 1].start || segments[i].mode == segments[i + 1].mode))
                return false;
        }
        return true;
    }

    friend bool operator==(const ModeTimeline&, const ModeTimeline&) = default;
};

/// `mode,start_s,end_s,duration_s`, seconds to two decimals.
inline std::string to_timeline_csv(const ModeTimeline& tl) {
    std::string out = "mode,start_s,end_s,duration_s\n";
    for (const auto& s : tl.segments)
        out += s.mode + ',' + detail::fmt_fixed(to_seconds(s.start), 2) + ',' + detail::fmt_fixed(to_seconds(s.end), 2) +
               ',' + detail::fmt_fixed(to_seconds(s.duration()), 2) + '\n';
    return out;
}

inline ModeTimeline parse_timeline_csv(std::istream& in) {
    ModeTimeline tl;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (lineno == 1) {
            if (view != "mode,start_s,end_s,duration_s") throw ParseError(lineno, "unexpected timeline header");
            continue;
        }
        if (detail::trim(view).empty()) continue;
        const auto cols = detail::split(view, ',');
        if (cols.size() != 4) throw ParseError(lineno, "expected 4 fields");
        const auto start = detail::parse_double(cols[1]);
        const auto end = detail::parse_double(cols[2]);
        if (!start || !end) throw ParseError(lineno, "bad time field");
        tl.segments.push_back({std::string(cols[0]), to_micros(*start), to_micros(*end)});
    }
    return tl;
}

struct HostFault {
    double t;
    std::uint8_t raw_value;
};

inline std::string to_fault_csv(const std::vector<HostFault>& faults) {
    std::string out = "t_s,raw_value\n";
    for (const auto& f : faults) out += detail::fmt9(f.t) + ',' + std::to_string(f.raw_value) + '\n';
    return out;
}

class HostController {
public:
    enum class Phase : std::uint8_t { Sleep, Service };

    explicit HostController(LabelEncoding encoding) : encoding_(std::move(encoding)) {}

    /// Marks the start of the session. The first decoded mode is back-dated to
    /// this instant instead of its interrupt time.
    void arm(double t) {
        detail::require(!open_ && timeline_.segments.empty(), "HostController::arm: session already started");
        armed_at_ = to_micros(t);
    }

    template <RegisterBus Bus>
    void on_interrupt(double t, Bus& bus) {
        detail::require(!finalized_, "HostController::on_interrupt: timeline already finalized");
        phase_ = Phase::Service;
        ++interrupts_;
        const std::uint8_t mlc = read(bus, reg::kMlcStatus);
        (void)read(bus, reg::kWakeSrc);
        if (mlc & reg::kLatchBit) {
            const std::uint8_t raw = read(bus, reg::kDecTreeOut1);
            if (const auto mode = encoding_.label_of(raw))
                observe(to_micros(t), *mode);
            else
                faults_.push_back({t, raw});
        }
        phase_ = Phase::Sleep;
    }

    /// Closes the open segment at `t_end`. Idempotent.
    const ModeTimeline& finalize(double t_end) {
        if (finalized_) return timeline_;
        if (open_) {
            const auto end = to_micros(t_end);
            detail::require(end > open_->start, "HostController::finalize: end precedes the open segment");
            open_->end = end;
            timeline_.segments.push_back(std::move(*open_));
            open_.reset();
        }
        finalized_ = true;
        return timeline_;
    }

    Phase phase() const noexcept { return phase_; }
    std::size_t reads() const noexcept { return reads_; }
    std::size_t interrupts() const noexcept { return interrupts_; }
    const std::vector<HostFault>& faults() const noexcept { return faults_; }
    const ModeTimeline& timeline() const noexcept { return timeline_; }
    std::optional<std::string> current_mode() const {
        if (open_) return open_->mode;
        return std::nullopt;
    }

private:
    template <RegisterBus Bus>
    std::uint8_t read(Bus& bus, std::uint8_t addr) {
        ++reads_;
        return static_cast<std::uint8_t>(bus.read_register(addr));
    }

    void observe(Micros t, const std::string& mode) {
        if (!open_) {
            const Micros start = armed_at_ && *armed_at_ <= t ? *armed_at_ : t;
            open_ = ModeSegment{mode, start, start};
            return;
        }
        if (open_->mode == mode) return;
        if (t <= open_->start) {
            // Zero-length run: relabel it, merging back into the previous segment if that matches.
            if (!timeline_.segments.empty() && timeline_.segments.back().mode == mode) {
                open_ = std::move(timeline_.segments.back());
                timeline_.segments.pop_back();
            } else {
                open_->mode = mode;
            }
            return;
        }
        open_->end = t;
        timeline_.segments.push_back(std::move(*open_));
        open_ = ModeSegment{mode, t, t};
    }

    LabelEncoding encoding_;
    Phase phase_ = Phase::Sleep;
    ModeTimeline timeline_;
    std::optional<ModeSegment> open_;
    std::optional<Micros> armed_at_;
    std::vector<HostFault> faults_;
    std::size_t reads_ = 0;
    std::size_t interrupts_ = 0;
    bool finalized_ = false;
};

} // namespace mlc
