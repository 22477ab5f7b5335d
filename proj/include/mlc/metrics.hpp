#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/tree.hpp"

namespace mlc {

/// counts[i][j] = number of samples with true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> class_set;
    std::vector<std::vector<std::size_t>> counts;

    explicit ConfusionMatrix(std::vector<std::string> classes = {})
        : class_set(std::move(classes)), counts(class_set.size(), std::vector<std::size_t>(class_set.size(), 0)) {}

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts)
            for (auto c : row) t += c;
        return t;
    }

    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }

    double accuracy() const {
        const auto n = total();
        return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
    }

    /// Cohen's kappa. When chance agreement is 1 the ratio is undefined; it is
    /// taken as 1 for perfect observed agreement and 0 otherwise.
    double kappa() const {
        const auto n = static_cast<double>(total());
        if (n == 0.0) return 0.0;
        const double po = static_cast<double>(trace()) / n;
        double pe = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            double row = 0.0, col = 0.0;
            for (std::size_t j = 0; j < counts.size(); ++j) {
                row += static_cast<double>(counts[i][j]);
                col += static_cast<double>(counts[j][i]);
            }
            pe += (row / n) * (col / n);
        }
        if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
        return (po - pe) / (1.0 - pe);
    }

    void add(std::size_t truth, std::size_t predicted) { ++counts.at(truth).at(predicted); }
};

inline ConfusionMatrix confusion_from_pairs(const std::vector<std::string>& class_set,
                                            std::span<const std::string> truth,
                                            std::span<const std::string> predicted) {
    if (truth.size() != predicted.size()) throw ValidationError("truth and prediction counts differ");
    ConfusionMatrix m(class_set);
    const auto index = [&](const std::string& l) {
        const auto it = std::find(class_set.begin(), class_set.end(), l);
        if (it == class_set.end()) throw ValidationError("label '" + l + "' is not in the class set");
        return static_cast<std::size_t>(it - class_set.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i) m.add(index(truth[i]), index(predicted[i]));
    return m;
}

inline ConfusionMatrix evaluate(const DecisionTree& tree, const LabeledFeatureSet& data) {
    if (data.empty()) throw DatasetError("cannot evaluate on an empty dataset");
    std::vector<std::string> predicted;
    predicted.reserve(data.size());
    for (const auto& v : data.vectors) predicted.push_back(predict(tree, v));
    return confusion_from_pairs(data.class_set, data.labels, predicted);
}

/// Rows are true classes, columns predictions, laid out as a fixed-width table.
inline std::string format_confusion(const ConfusionMatrix& m) {
    std::size_t w = 0;
    for (const auto& c : m.class_set) w = std::max(w, c.size());
    const auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s.insert(0, width - s.size(), ' ');
        return s;
    };
    std::string out(w, ' ');
    for (const auto& c : m.class_set) out += "  " + c;
    out += '\n';
    for (std::size_t i = 0; i < m.class_set.size(); ++i) {
        std::string name = m.class_set[i];
        name.resize(w, ' ');
        out += name;
        for (std::size_t j = 0; j < m.class_set.size(); ++j)
            out += "  " + pad(std::to_string(m.counts[i][j]), m.class_set[j].size());
        out += '\n';
    }
    return out;
}

} // namespace mlc
