#pragma once

// Emulated IMU with an on-chip classifier: streaming features, tree inference,
// an 8-bit register map and a latched interrupt line.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlc/config.hpp"
#include "mlc/error.hpp"
#include "mlc/features.hpp"
#include "mlc/tree.hpp"

namespace mlc {

namespace reg {
inline constexpr std::uint8_t kWhoAmI = 0x0F;
inline constexpr std::uint8_t kWakeSrc = 0x1B;
inline constexpr std::uint8_t kMlcStatus = 0x38;
inline constexpr std::uint8_t kDecTreeOut1 = 0x70;

inline constexpr std::uint8_t kWhoAmIValue = 0x70;
inline constexpr std::uint8_t kLatchBit = 0x01;
} // namespace reg

class RegisterFile {
public:
    std::uint8_t read(std::uint8_t addr) const noexcept {
        return addr == reg::kWhoAmI ? reg::kWhoAmIValue : bytes_[addr];
    }
    void write(std::uint8_t addr, std::uint8_t value) noexcept {
        if (addr != reg::kWhoAmI) bytes_[addr] = value;
    }
    void clear() noexcept { bytes_.fill(0); }

private:
    std::array<std::uint8_t, 256> bytes_{};
};

enum class InterruptCause : std::uint8_t { MlcResult, Wakeup };

inline std::string_view to_string(InterruptCause c) {
    return c == InterruptCause::MlcResult ? "MLC_RESULT" : "WAKEUP";
}

struct InterruptEvent {
    double t;
    InterruptCause cause;
    std::uint8_t dec_tree_out;

    friend bool operator==(const InterruptEvent&, const InterruptEvent&) = default;
};

struct WakeupSpec {
    double threshold_g = 0.10;  // on | |acc| - 1 g |
};

/// Per-window inference trace, kept for offline comparison. The host never sees it.
struct WindowDecision {
    double window_end_t;
    std::uint8_t value;
    std::string label;
};

class VirtualSensor {
public:
    explicit VirtualSensor(WakeupSpec wakeup = {}) : wakeup_(wakeup) {
        if (!std::isfinite(wakeup_.threshold_g) || wakeup_.threshold_g < 0.0)
            throw ValidationError("wakeup threshold must be finite and non-negative");
    }

    /// Validates before touching any state, so a rejected config leaves the sensor as it was.
    void load_config(const MlcConfig& cfg) {
        validate(cfg);
        StreamingFeatureState engine(cfg.window(), cfg.feature_specs);
        cfg_ = cfg;
        engine_.emplace(std::move(engine));
        regs_.clear();
        events_.clear();
        decisions_.clear();
        previous_.reset();
        last_t_.reset();
        asserted_ = false;
    }

    bool configured() const noexcept { return cfg_.has_value(); }
    const MlcConfig& config() const {
        detail::require(configured(), "VirtualSensor: no config loaded");
        return *cfg_;
    }

    void clock_in(const SampleFrame& frame) {
        detail::require(configured(), "VirtualSensor::clock_in: no config loaded");
        if (last_t_ && !(frame.t > *last_t_))
            throw ContractViolation("VirtualSensor::clock_in: frames must arrive in time order");
        last_t_ = frame.t;

        if (auto fv = engine_->push(frame)) {
            const auto& label = predict(cfg_->tree, *fv);
            const std::uint8_t value = *cfg_->encoding.value_of(label);
            regs_.write(reg::kDecTreeOut1, value);
            decisions_.push_back({fv->window_end_t, value, label});
            if (!previous_ || *previous_ != value) {
                regs_.write(reg::kMlcStatus, regs_.read(reg::kMlcStatus) | reg::kLatchBit);
                events_.push_back({frame.t, InterruptCause::MlcResult, value});
            }
            previous_ = value;
        }

        const double deviation = std::abs(std::sqrt(frame.ax * frame.ax + frame.ay * frame.ay + frame.az * frame.az) - 1.0);
        if (deviation > wakeup_.threshold_g && !(regs_.read(reg::kWakeSrc) & reg::kLatchBit)) {
            regs_.write(reg::kWakeSrc, regs_.read(reg::kWakeSrc) | reg::kLatchBit);
            events_.push_back({frame.t, InterruptCause::Wakeup, regs_.read(reg::kDecTreeOut1)});
        }
        update_line();
    }

    /// Bus read. MLC_STATUS and WAKE_SRC clear on read.
    std::uint8_t read_register(std::uint8_t addr) {
        const std::uint8_t v = regs_.read(addr);
        if (addr == reg::kMlcStatus || addr == reg::kWakeSrc) {
            regs_.write(addr, static_cast<std::uint8_t>(v & ~reg::kLatchBit));
            update_line();
        }
        return v;
    }

    /// Side-effect-free view for diagnostics.
    std::uint8_t peek_register(std::uint8_t addr) const noexcept { return regs_.read(addr); }

    bool interrupt_asserted() const noexcept { return asserted_; }
    const std::vector<InterruptEvent>& events() const noexcept { return events_; }
    const std::vector<WindowDecision>& decisions() const noexcept { return decisions_; }

private:
    void update_line() noexcept {
        asserted_ = (regs_.read(reg::kMlcStatus) & reg::kLatchBit) || (regs_.read(reg::kWakeSrc) & reg::kLatchBit);
    }

    WakeupSpec wakeup_;
    std::optional<MlcConfig> cfg_;
    std::optional<StreamingFeatureState> engine_;
    RegisterFile regs_;
    std::vector<InterruptEvent> events_;
    std::vector<WindowDecision> decisions_;
    std::optional<std::uint8_t> previous_;
    std::optional<double> last_t_;
    bool asserted_ = false;
};

/// `t_s,cause,dec_tree_out`
inline std::string to_event_csv(const std::vector<InterruptEvent>& events) {
    std::string out = "t_s,cause,dec_tree_out\n";
    for (const auto& e : events)
        out += detail::fmt9(e.t) + ',' + std::string(to_string(e.cause)) + ',' + std::to_string(e.dec_tree_out) + '\n';
    return out;
}

inline std::vector<InterruptEvent> parse_event_csv(std::istream& in) {
    std::vector<InterruptEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (lineno == 1) {
            if (view != "t_s,cause,dec_tree_out") throw ParseError(lineno, "unexpected event header");
            continue;
        }
        if (detail::trim(view).empty()) continue;
        const auto cols = detail::split(view, ',');
        if (cols.size() != 3) throw ParseError(lineno, "expected 3 fields");
        const auto t = detail::parse_double(cols[0]);
        const auto v = detail::parse_double(cols[2]);
        if (!t || !v || *v < 0 || *v > 255) throw ParseError(lineno, "bad numeric field");
        InterruptCause cause;
        if (cols[1] == "MLC_RESULT")
            cause = InterruptCause::MlcResult;
        else if (cols[1] == "WAKEUP")
            cause = InterruptCause::Wakeup;
        else
            throw ParseError(lineno, "unknown cause '" + std::string(cols[1]) + "'");
        out.push_back({*t, cause, static_cast<std::uint8_t>(*v)});
    }
    return out;
}

} // namespace mlc
