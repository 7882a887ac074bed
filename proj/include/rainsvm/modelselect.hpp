#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "parallel.hpp"
#include "svm.hpp"

namespace rainsvm {

/// Candidates C = 2^k for k = lo..hi.
struct CGrid {
    int lo = -15;
    int hi = 6;

    void validate() const {
        if (lo > hi)
            throw Error(ErrorCode::invalid_argument, "C grid exponent range is empty");
        if (lo < -1000 || hi > 1000)
            throw Error(ErrorCode::invalid_argument, "C grid exponents out of floating-point range");
    }
    std::vector<int> exponents() const {
        std::vector<int> out;
        for (int k = lo; k <= hi; ++k)
            out.push_back(k);
        return out;
    }
    static double value(int exponent) { return std::ldexp(1.0, exponent); }
};

struct CvResult {
    std::vector<int> exponents;
    /// [candidate][fold]; empty when the fold's training portion held fewer than two classes.
    std::vector<std::vector<std::optional<double>>> fold_scores;
    std::vector<std::vector<bool>> fold_converged;
    /// Mean over non-skipped folds; empty when every fold was skipped.
    std::vector<std::optional<double>> mean_scores;
    int selected_exponent = 0;

    double selected_c() const { return CGrid::value(selected_exponent); }
    bool all_converged() const {
        for (const auto& row : fold_converged)
            for (bool c : row)
                if (!c)
                    return false;
        return true;
    }
};

/// Indices of the samples used to train when `held_out` is the validation fold.
inline std::vector<std::size_t> fold_training_members(std::span<const std::size_t> folds, std::size_t held_out) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < folds.size(); ++i)
        if (folds[i] != held_out)
            members.push_back(i);
    return members;
}

/// Highest mean score wins; ties resolve to the smallest C.
inline int pick_exponent(std::span<const int> exponents, std::span<const std::optional<double>> means) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < exponents.size(); ++c) {
        if (!means[c])
            continue;
        if (!best || *means[c] > *means[*best] ||
            (*means[c] == *means[*best] && exponents[c] < exponents[*best]))
            best = c;
    }
    if (!best)
        throw Error(ErrorCode::single_class, "no C candidate could be scored on any fold");
    return exponents[*best];
}

/// k-fold grid search scored by validation macro F1. `gram`, when given,
/// holds the inner products of `train`.
inline CvResult select_c(std::span<const WindowSample> train, const CGrid& grid, std::span<const std::size_t> folds,
                         const SolverSettings& settings, const GramMatrix* gram = nullptr, std::size_t jobs = 1) {
    grid.validate();
    settings.validate();
    if (folds.size() != train.size())
        throw Error(ErrorCode::dimension_mismatch, "fold assignment does not cover the training set");
    if (train.empty())
        throw Error(ErrorCode::empty_input, "cross-validation on an empty training set");
    const std::size_t fold_count = *std::max_element(folds.begin(), folds.end()) + 1;
    if (fold_count < 2)
        throw Error(ErrorCode::invalid_argument, "need at least two folds");

    CvResult result;
    result.exponents = grid.exponents();
    const std::size_t n_cand = result.exponents.size();
    result.fold_scores.assign(n_cand, std::vector<std::optional<double>>(fold_count));
    result.fold_converged.assign(n_cand, std::vector<bool>(fold_count, true));

    std::vector<std::vector<std::size_t>> members(fold_count);
    std::vector<bool> trainable(fold_count);
    for (std::size_t f = 0; f < fold_count; ++f) {
        members[f] = fold_training_members(folds, f);
        std::array<bool, kClassCount> present{};
        for (auto m : members[f])
            present[index_of(train[m].label)] = true;
        trainable[f] = std::count(present.begin(), present.end(), true) >= 2;
    }

    // One task per fold walks the ascending C grid, each fit warm-started from
    // the previous one, so the pair kernels are built once per fold.
    std::vector<double> Cs(n_cand);
    for (std::size_t c = 0; c < n_cand; ++c)
        Cs[c] = CGrid::value(result.exponents[c]);
    std::vector<char> converged(n_cand * fold_count, 1);
    parallel_for(fold_count, jobs, [&](std::size_t f) {
        if (!trainable[f])
            return;
        const auto models = train_multiclass_path(train, members[f], Cs, settings, gram);
        std::vector<RainClass> truth;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (folds[i] == f)
                truth.push_back(train[i].label);
        for (std::size_t c = 0; c < n_cand; ++c) {
            std::vector<RainClass> predicted;
            for (std::size_t i = 0; i < train.size(); ++i)
                if (folds[i] == f)
                    predicted.push_back(predict(models[c], train[i].features));
            result.fold_scores[c][f] = macro_f1(confusion(truth, predicted));
            converged[c * fold_count + f] = models[c].converged() ? 1 : 0;
        }
    });

    result.mean_scores.resize(n_cand);
    for (std::size_t c = 0; c < n_cand; ++c) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t f = 0; f < fold_count; ++f) {
            result.fold_converged[c][f] = converged[c * fold_count + f] != 0;
            if (result.fold_scores[c][f]) {
                sum += *result.fold_scores[c][f];
                ++used;
            }
        }
        if (used > 0)
            result.mean_scores[c] = sum / static_cast<double>(used);
    }
    result.selected_exponent = pick_exponent(result.exponents, result.mean_scores);
    return result;
}

/// Per-fold rows followed by one `mean` row per candidate; skipped folds
/// leave macro_f1 empty.
inline void write_cv_report(std::ostream& out, const CvResult& cv) {
    out << "c_exponent,fold,macro_f1,converged\n";
    char buf[64];
    auto score = [&](const std::optional<double>& v) -> std::string {
        if (!v)
            return "";
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return buf;
    };
    for (std::size_t c = 0; c < cv.exponents.size(); ++c) {
        bool all = true;
        for (std::size_t f = 0; f < cv.fold_scores[c].size(); ++f) {
            all = all && cv.fold_converged[c][f];
            out << cv.exponents[c] << ',' << f << ',' << score(cv.fold_scores[c][f]) << ','
                << (cv.fold_converged[c][f] ? 1 : 0) << '\n';
        }
        out << cv.exponents[c] << ",mean," << score(cv.mean_scores[c]) << ',' << (all ? 1 : 0) << '\n';
    }
}

} // namespace rainsvm
