#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "dataset.hpp"
#include "error.hpp"
#include "labeling.hpp"

namespace rainsvm {

/// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

    std::uint64_t operator()(RainClass truth, RainClass predicted) const {
        return counts[index_of(truth)][index_of(predicted)];
    }
    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& row : counts)
            for (auto v : row)
                t += v;
        return t;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const RainClass> truth, std::span<const RainClass> predicted) {
    if (truth.size() != predicted.size())
        throw Error(ErrorCode::dimension_mismatch, std::to_string(truth.size()) + " truths vs " +
                                                       std::to_string(predicted.size()) + " predictions");
    if (truth.empty())
        throw Error(ErrorCode::empty_input, "confusion matrix of no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
    return cm;
}

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Zero denominators yield 0, so a never-predicted or absent class scores 0.
inline ClassScores class_scores(const ConfusionMatrix& cm, RainClass c) {
    const std::size_t k = index_of(c);
    const double tp = static_cast<double>(cm.counts[k][k]);
    double predicted = 0.0, actual = 0.0;
    for (std::size_t i = 0; i < kClassCount; ++i) {
        predicted += static_cast<double>(cm.counts[i][k]);
        actual += static_cast<double>(cm.counts[k][i]);
    }
    ClassScores s;
    s.precision = predicted > 0.0 ? tp / predicted : 0.0;
    s.recall = actual > 0.0 ? tp / actual : 0.0;
    const double denom = s.precision + s.recall;
    s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
    return s;
}

inline double per_class_f1(const ConfusionMatrix& cm, RainClass c) { return class_scores(cm, c).f1; }

/// True when the class occurs in the truth or in the predictions.
inline bool class_observed(const ConfusionMatrix& cm, RainClass c) {
    const std::size_t k = index_of(c);
    for (std::size_t i = 0; i < kClassCount; ++i)
        if (cm.counts[k][i] > 0 || cm.counts[i][k] > 0)
            return true;
    return false;
}

/// Unweighted mean of per-class F1 over every class that occurs in the truth
/// or the predictions. A class that is present but never predicted (or
/// predicted but never present) enters with F1 = 0; a class that occurs
/// nowhere carries no information and is left out.
inline double macro_f1(const ConfusionMatrix& cm) {
    double sum = 0.0;
    std::size_t observed = 0;
    for (auto c : kAllClasses)
        if (class_observed(cm, c)) {
            sum += per_class_f1(cm, c);
            ++observed;
        }
    return observed > 0 ? sum / static_cast<double>(observed) : 0.0;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0)
        return 0.0;
    std::uint64_t hits = 0;
    for (std::size_t k = 0; k < kClassCount; ++k)
        hits += cm.counts[k][k];
    return static_cast<double>(hits) / static_cast<double>(total);
}

struct EvalReport {
    ConfusionMatrix confusion;
    std::array<ClassScores, kClassCount> per_class{};
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t samples = 0;
};

inline EvalReport evaluate(std::span<const RainClass> truth, std::span<const RainClass> predicted) {
    EvalReport r;
    r.confusion = confusion(truth, predicted);
    for (auto c : kAllClasses)
        r.per_class[index_of(c)] = class_scores(r.confusion, c);
    r.macro_f1 = macro_f1(r.confusion);
    r.accuracy = accuracy(r.confusion);
    r.samples = truth.size();
    return r;
}

// ---------------------------------------------------------------------------
// Reference predictors

/// Predicts the tile class of the last image in the window, for any horizon.
inline RainClass persistence_predict(const WindowSample& sample) { return sample.last_image_class; }

/// Most frequent training class; ties go to the lower class.
inline RainClass majority_predict(const ClassFrequencies& freq) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
        if (freq.f[c] > freq.f[best])
            best = c;
    return class_from_index(best);
}

/// Closed-form macro F1 of always predicting the majority class: that class
/// has precision p and recall 1, the other occurring classes score 0.
inline double majority_macro_f1(const ClassFrequencies& freq) {
    const double p = freq[majority_predict(freq)];
    std::size_t observed = 0;
    for (double f : freq.f)
        observed += f > 0.0;
    return 2.0 * p / (1.0 + p) / static_cast<double>(observed);
}

/// Standard deviation of a Bernoulli proportion over n trials.
inline double variability_bound(std::size_t n_test, double p) {
    if (n_test < 1)
        throw Error(ErrorCode::invalid_argument, "need at least one test sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::invalid_argument, "proportion must lie in [0,1]");
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_test));
}

} // namespace rainsvm
