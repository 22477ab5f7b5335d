#pragma once

// Deployable classifier configuration and its canonical "MLCFG v1" text form:
//
//   MLCFG v1
//   odr_hz 240
//   window 240
//   feature <ordinal> <KIND> <SENSOR> <AXIS>
//   node <idx> split <feature> <threshold> <left> <right>
//   node <idx> leaf <class>
//   encode <class> <0..255>

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/features.hpp"
#include "mlc/tree.hpp"

namespace mlc {

inline constexpr std::size_t kMaxTreeNodes = 256;

/// Class name to output-register value. Entry order is significant.
struct LabelEncoding {
    std::vector<std::pair<std::string, std::uint8_t>> entries;

    std::optional<std::uint8_t> value_of(std::string_view label) const {
        for (const auto& [name, v] : entries)
            if (name == label) return v;
        return std::nullopt;
    }

    std::optional<std::string> label_of(std::uint8_t value) const {
        for (const auto& [name, v] : entries)
            if (v == value) return name;
        return std::nullopt;
    }

    /// "stance=8,walk=0,stairsUp=4"
    static LabelEncoding parse(std::string_view text) {
        LabelEncoding enc;
        for (auto item : detail::split(text, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw ValidationError("encoding entry '" + std::string(item) + "' lacks '='");
            const auto name = detail::trim(item.substr(0, eq));
            const auto num = detail::trim(item.substr(eq + 1));
            unsigned v = 0;
            const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
            if (name.empty() || ec != std::errc() || p != num.data() + num.size() || v > 255)
                throw ValidationError("bad encoding entry '" + std::string(item) + "'");
            enc.entries.emplace_back(std::string(name), static_cast<std::uint8_t>(v));
        }
        return enc;
    }

    friend bool operator==(const LabelEncoding&, const LabelEncoding&) = default;
};

inline LabelEncoding default_encoding() { return {{{"stance", 8}, {"walk", 0}, {"stairsUp", 4}}}; }

struct MlcConfig {
    double odr_hz = kClassifierRateHz;
    std::size_t window_length = 240;
    std::vector<FeatureSpec> feature_specs;
    DecisionTree tree;
    LabelEncoding encoding;  // in class_set order

    WindowSpec window() const { return {odr_hz, window_length}; }

    std::vector<std::string> class_set() const {
        std::vector<std::string> out;
        for (const auto& e : encoding.entries) out.push_back(e.first);
        return out;
    }

    friend bool operator==(const MlcConfig&, const MlcConfig&) = default;
};

namespace detail {

inline bool is_token(std::string_view s) {
    return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',' || c == '#';
    });
}

inline std::string shortest(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace detail

/// Throws ConfigError naming the first broken invariant.
inline void validate(const MlcConfig& cfg) {
    if (!(cfg.odr_hz > 0.0) || !std::isfinite(cfg.odr_hz)) throw ConfigError("odr_hz must be positive");
    if (cfg.window_length < 2) throw ConfigError("window length must be at least 2");
    if (cfg.feature_specs.empty()) throw ConfigError("config has no features");
    if (cfg.tree.size() > kMaxTreeNodes)
        throw ConfigError("tree has " + std::to_string(cfg.tree.size()) + " nodes, limit is " +
                          std::to_string(kMaxTreeNodes));
    try {
        validate_feature_specs(cfg.feature_specs);
        cfg.tree.validate(cfg.feature_specs.size());
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    const auto& ent = cfg.encoding.entries;
    for (std::size_t i = 0; i < ent.size(); ++i) {
        if (!detail::is_token(ent[i].first)) throw ConfigError("class name '" + ent[i].first + "' is not a bare token");
        for (std::size_t j = i + 1; j < ent.size(); ++j) {
            if (ent[i].first == ent[j].first) throw ConfigError("class '" + ent[i].first + "' encoded twice");
            if (ent[i].second == ent[j].second)
                throw ConfigError("classes '" + ent[i].first + "' and '" + ent[j].first +
                                  "' share register value " + std::to_string(ent[i].second));
        }
    }
    for (const auto& label : cfg.tree.leaf_labels())
        if (!cfg.encoding.value_of(label)) throw ConfigError("no register encoding for class '" + label + "'");
}

/// Assembles and validates a config. Encoding entries follow `class_set` order;
/// encoded classes outside `class_set` keep their given order after it.
inline MlcConfig compile_config(DecisionTree tree, std::vector<FeatureSpec> feature_specs, const WindowSpec& wspec,
                                const LabelEncoding& encoding, const std::vector<std::string>& class_set) {
    MlcConfig cfg;
    cfg.odr_hz = wspec.odr_hz;
    cfg.window_length = wspec.length;
    cfg.feature_specs = std::move(feature_specs);
    cfg.tree = std::move(tree);
    for (const auto& c : class_set)
        if (const auto v = encoding.value_of(c)) cfg.encoding.entries.emplace_back(c, *v);
    for (const auto& e : encoding.entries)
        if (std::find(class_set.begin(), class_set.end(), e.first) == class_set.end()) cfg.encoding.entries.push_back(e);
    validate(cfg);
    return cfg;
}

inline std::string to_text(const MlcConfig& cfg) {
    std::string out = "MLCFG v1\n";
    out += "odr_hz " + detail::shortest(cfg.odr_hz) + '\n';
    out += "window " + std::to_string(cfg.window_length) + '\n';
    for (std::size_t i = 0; i < cfg.feature_specs.size(); ++i) {
        const auto& s = cfg.feature_specs[i];
        out += "feature " + std::to_string(i) + ' ' + std::string(to_string(s.kind)) + ' ' +
               std::string(to_string(s.channel.sensor)) + ' ' + std::string(to_string(s.channel.axis)) + '\n';
    }
    for (std::size_t i = 0; i < cfg.tree.size(); ++i) {
        out += "node " + std::to_string(i);
        if (const auto* s = std::get_if<SplitNode>(&cfg.tree.nodes[i]))
            out += " split " + std::to_string(s->feature) + ' ' + detail::shortest(s->threshold) + ' ' +
                   std::to_string(s->left) + ' ' + std::to_string(s->right) + '\n';
        else
            out += " leaf " + std::get<LeafNode>(cfg.tree.nodes[i]).label + '\n';
    }
    for (const auto& [name, v] : cfg.encoding.entries) out += "encode " + name + ' ' + std::to_string(v) + '\n';
    return out;
}

namespace detail {

template <typename T>
T parse_uint(std::string_view tok, std::size_t line, const char* what) {
    T v{};
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
    return v;
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

} // namespace detail

/// Parses MLCFG v1 text. Blank lines and lines starting with '#' are ignored.
/// Syntax problems raise ParseError; semantic ones ConfigError.
inline MlcConfig parse_config(std::string_view text) {
    MlcConfig cfg;
    bool magic = false;
    std::optional<double> odr;
    std::optional<std::size_t> window;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto tok = detail::tokens(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (!magic) {
            if (tok.size() != 2 || tok[0] != "MLCFG" || tok[1] != "v1") throw ParseError(lineno, "expected 'MLCFG v1'");
            magic = true;
            continue;
        }
        const auto want = [&](std::size_t n) {
            if (tok.size() != n)
                throw ParseError(lineno, "'" + std::string(tok[0]) + "' expects " + std::to_string(n - 1) + " fields");
        };
        if (tok[0] == "odr_hz") {
            want(2);
            if (odr) throw ParseError(lineno, "duplicate odr_hz");
            const auto v = detail::parse_double(tok[1]);
            if (!v) throw ParseError(lineno, "bad odr_hz");
            odr = *v;
        } else if (tok[0] == "window") {
            want(2);
            if (window) throw ParseError(lineno, "duplicate window");
            window = detail::parse_uint<std::size_t>(tok[1], lineno, "window");
        } else if (tok[0] == "feature") {
            want(5);
            if (detail::parse_uint<std::size_t>(tok[1], lineno, "feature ordinal") != cfg.feature_specs.size())
                throw ParseError(lineno, "feature ordinals must count up from 0");
            const auto kind = parse_feature_kind(tok[2]);
            const auto sensor = parse_sensor(tok[3]);
            const auto axis = parse_axis(tok[4]);
            if (!kind || !sensor || !axis) throw ParseError(lineno, "unknown feature kind, sensor or axis");
            cfg.feature_specs.push_back({*kind, {*sensor, *axis}});
        } else if (tok[0] == "node") {
            if (tok.size() < 3) throw ParseError(lineno, "truncated node");
            if (detail::parse_uint<std::size_t>(tok[1], lineno, "node index") != cfg.tree.size())
                throw ParseError(lineno, "node indices must count up from 0");
            if (tok[2] == "split") {
                want(7);
                const auto thr = detail::parse_double(tok[4]);
                if (!thr) throw ParseError(lineno, "bad threshold '" + std::string(tok[4]) + "'");
                cfg.tree.nodes.emplace_back(SplitNode{detail::parse_uint<std::size_t>(tok[3], lineno, "feature"), *thr,
                                                      detail::parse_uint<std::size_t>(tok[5], lineno, "child"),
                                                      detail::parse_uint<std::size_t>(tok[6], lineno, "child")});
            } else if (tok[2] == "leaf") {
                want(4);
                cfg.tree.nodes.emplace_back(LeafNode{std::string(tok[3])});
            } else {
                throw ParseError(lineno, "unknown node type '" + std::string(tok[2]) + "'");
            }
        } else if (tok[0] == "encode") {
            want(3);
            const auto v = detail::parse_uint<unsigned>(tok[2], lineno, "register value");
            if (v > 255) throw ParseError(lineno, "register value out of range");
            cfg.encoding.entries.emplace_back(std::string(tok[1]), static_cast<std::uint8_t>(v));
        } else {
            throw ParseError(lineno, "unknown directive '" + std::string(tok[0]) + "'");
        }
    }
    if (!magic) throw ParseError(lineno + 1, "missing 'MLCFG v1' header");
    if (!odr) throw ParseError(lineno + 1, "missing odr_hz");
    if (!window) throw ParseError(lineno + 1, "missing window");
    cfg.odr_hz = *odr;
    cfg.window_length = *window;
    validate(cfg);
    return cfg;
}

} // namespace mlc
