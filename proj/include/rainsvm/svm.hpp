#pragma once

// Linear soft-margin SVM trained in the dual.
//
//   primal:  min_{w,b}  1/2 |w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b))
//   dual:    min_a      1/2 a'Qa - e'a,   Q_ij = y_i y_j x_i.x_j,
//            s.t.       0 <= a_i <= C,    sum_i y_i a_i = 0
//
// The equality constraint couples the coordinates, so each descent step moves
// a pair of dual variables (maximal-violating first index, second-order choice
// of the partner). The gradient is kept up to date from Gram entries, the
// weight vector is w = sum_i a_i y_i x_i and the bias comes from the free
// support vectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "labeling.hpp"

namespace rainsvm {

struct SolverSettings {
    double tolerance = 1e-4;
    std::size_t max_epochs = 1000;
    /// Sweep samples in a canonical order derived from their content, so the
    /// model does not depend on how the caller ordered the training set.
    bool deterministic = true;

    void validate() const {
        if (!(tolerance > 0.0))
            throw Error(ErrorCode::invalid_argument, "solver tolerance must be positive");
        if (max_epochs < 1)
            throw Error(ErrorCode::invalid_argument, "max epochs must be at least 1");
    }
};

struct BinarySvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    RainClass positive_class = RainClass::light;
    RainClass negative_class = RainClass::moderate;
    double C = 1.0;
    bool converged = true;
    std::size_t iterations = 0;
};

template <typename T>
struct LabeledRow {
    std::span<const T> x;
    int y = 1; ///< +1 or -1
};

template <typename T>
double dot(std::span<const double> w, std::span<const T> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += w[i] * static_cast<double>(x[i]);
    return acc;
}

template <typename T>
double decision(const BinarySvmModel& model, std::span<const T> features) {
    if (features.size() != model.weights.size())
        throw Error(ErrorCode::dimension_mismatch, "feature length " + std::to_string(features.size()) +
                                                       " vs model dimension " + std::to_string(model.weights.size()));
    return dot<T>(model.weights, features) + model.bias;
}

template <typename T>
double primal_objective(std::span<const double> w, double b, std::span<const LabeledRow<T>> samples, double C) {
    double hinge = 0.0;
    for (const auto& s : samples)
        hinge += std::max(0.0, 1.0 - s.y * (dot<T>(w, s.x) + b));
    const double norm2 = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    return 0.5 * norm2 + C * hinge;
}

// ---------------------------------------------------------------------------
// Gram matrices

/// Dense symmetric matrix of inner products.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    const double* row(std::size_t i) const { return data_.data() + i * n_; }

    void set(std::size_t i, std::size_t j, double v) {
        data_[i * n_ + j] = v;
        data_[j * n_ + i] = v;
    }

    template <typename Rows>
    static GramMatrix from_rows(const Rows& rows) {
        GramMatrix g(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::span<const float> xi{rows[i]};
            for (std::size_t j = 0; j <= i; ++j) {
                std::span<const float> xj{rows[j]};
                double acc = 0.0;
                for (std::size_t d = 0; d < xi.size(); ++d)
                    acc += static_cast<double>(xi[d]) * static_cast<double>(xj[d]);
                g.set(i, j, acc);
            }
        }
        return g;
    }

    /// Day-by-day inner products of a series of equally sized images.
    static GramMatrix of_images(std::span<const GrayImage> images) {
        std::vector<std::span<const float>> rows;
        rows.reserve(images.size());
        for (const auto& img : images)
            rows.emplace_back(img.values);
        return from_rows(rows);
    }

    /// Gram matrix of sliding windows built from an image Gram matrix: the
    /// inner product of windows ending at s and t is the sum over lags of the
    /// image inner products at (s-l, t-l).
    static GramMatrix of_windows(const GramMatrix& image_gram, std::span<const std::size_t> end_index,
                                 std::size_t n) {
        GramMatrix g(end_index.size());
        for (std::size_t a = 0; a < end_index.size(); ++a) {
            if (end_index[a] + 1 < n || end_index[a] >= image_gram.size())
                throw Error(ErrorCode::out_of_bounds, "window end index outside the image series");
            for (std::size_t b = 0; b <= a; ++b) {
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l)
                    acc += image_gram(end_index[a] - l, end_index[b] - l);
                g.set(a, b, acc);
            }
        }
        return g;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Dual solver

struct DualSolution {
    std::vector<double> alpha;
    std::vector<double> gradient; ///< Qa - e
    bool converged = false;
    std::size_t iterations = 0;
};

namespace detail {

inline bool in_up(int y, double a, double C) { return (y > 0 && a < C) || (y < 0 && a > 0.0); }
inline bool in_low(int y, double a, double C) { return (y > 0 && a > 0.0) || (y < 0 && a < C); }

inline constexpr double kTau = 1e-12;

} // namespace detail

/// Pairwise coordinate descent on the dual. `Q` is the dense N x N kernel in
/// the order of `y`. Stops once the maximal KKT violation m(a) - M(a) drops
/// below the tolerance, or after max_epochs * N pair updates. `initial`, when
/// non-empty, is the starting point; it must satisfy sum y_i a_i = 0.
inline DualSolution solve_dual(std::span<const double> Q, std::span<const int> y, double C,
                               const SolverSettings& settings, std::span<const double> initial = {}) {
    const std::size_t N = y.size();
    if (Q.size() != N * N)
        throw Error(ErrorCode::dimension_mismatch, "kernel size does not match the sample count");
    DualSolution sol;
    sol.alpha.assign(N, 0.0);
    auto& alpha = sol.alpha;

    std::vector<double> diag(N);
    for (std::size_t t = 0; t < N; ++t)
        diag[t] = Q[t * N + t];

    // v = -y * gradient, with gradient = Qa - e in the signed form.
    std::vector<double> v(N);
    for (std::size_t t = 0; t < N; ++t)
        v[t] = static_cast<double>(y[t]);
    if (!initial.empty()) {
        if (initial.size() != N)
            throw Error(ErrorCode::dimension_mismatch, "initial duals do not match the sample count");
        for (std::size_t a = 0; a < N; ++a) {
            alpha[a] = std::clamp(initial[a], 0.0, C);
            if (alpha[a] == 0.0)
                continue;
            const double ca = alpha[a] * y[a];
            const double* row = Q.data() + a * N;
            for (std::size_t t = 0; t < N; ++t)
                v[t] -= ca * row[t];
        }
    }

    const std::size_t max_iter =
        settings.max_epochs > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(N, 1)
            ? std::numeric_limits<std::size_t>::max()
            : settings.max_epochs * N;

    auto finish = [&](bool converged, std::size_t iterations) {
        sol.gradient.resize(N);
        for (std::size_t t = 0; t < N; ++t)
            sol.gradient[t] = -y[t] * v[t];
        sol.converged = converged;
        sol.iterations = iterations;
        return sol;
    };

    // Membership in the index sets I_up and I_low, refreshed as alphas move.
    std::vector<unsigned char> up(N), low(N);
    auto classify = [&](std::size_t t) {
        up[t] = detail::in_up(y[t], alpha[t], C);
        low[t] = detail::in_low(y[t], alpha[t], C);
    };
    for (std::size_t t = 0; t < N; ++t)
        classify(t);

    // First index: maximal violation over I_up. Later iterations fold this
    // search into the gradient update.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = N;
    for (std::size_t t = 0; t < N; ++t)
        if (up[t] && v[t] > g_max) {
            g_max = v[t];
            i = t;
        }

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Second index by second-order gain gap^2 / curv, compared without division.
        double g_min = std::numeric_limits<double>::infinity();
        double best_num = 0.0, best_den = 1.0;
        std::size_t j = N;
        const double* Ki = i < N ? Q.data() + i * N : nullptr;
        const double di_diag = i < N ? diag[i] : 0.0;
        for (std::size_t t = 0; t < N; ++t) {
            if (!low[t])
                continue;
            g_min = std::min(g_min, v[t]);
            const double gap = g_max - v[t];
            if (Ki != nullptr && gap > 0.0) {
                double curv = di_diag + diag[t] - 2.0 * Ki[t];
                if (curv <= 0.0)
                    curv = detail::kTau;
                const double num = gap * gap;
                if (j == N || num * best_den > best_num * curv) {
                    best_num = num;
                    best_den = curv;
                    j = t;
                }
            }
        }

        if (i == N || j == N || g_max - g_min < settings.tolerance)
            return finish(true, iter);

        double curv = diag[i] + diag[j] - 2.0 * Ki[j];
        if (curv <= 0.0)
            curv = detail::kTau;
        const double bound_i = y[i] > 0 ? C - alpha[i] : alpha[i];
        const double bound_j = y[j] > 0 ? alpha[j] : C - alpha[j];
        double step = (g_max - v[j]) / curv;
        step = std::min({step, bound_i, bound_j});

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (step == bound_i)
            alpha[i] = y[i] > 0 ? C : 0.0;
        else
            alpha[i] = old_i + y[i] * step;
        if (step == bound_j)
            alpha[j] = y[j] > 0 ? 0.0 : C;
        else
            alpha[j] = old_j - y[j] * step;
        classify(i);
        classify(j);

        const double di = (alpha[i] - old_i) * y[i];
        const double dj = (alpha[j] - old_j) * y[j];
        const double* Kj = Q.data() + j * N;
        g_max = -std::numeric_limits<double>::infinity();
        std::size_t next = N;
        for (std::size_t t = 0; t < N; ++t) {
            v[t] -= di * Ki[t] + dj * Kj[t];
            if (up[t] && v[t] > g_max) {
                g_max = v[t];
                next = t;
            }
        }
        i = next;
    }
    return finish(false, max_iter);
}

/// Bias from the free support vectors; without any, the midpoint of the
/// interval of biases consistent with the bounded ones.
inline double recover_bias(std::span<const double> alpha, std::span<const double> G, std::span<const int> y,
                           double C) {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        const double v = -y[t] * G[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            free_sum += v;
            ++free_count;
        } else if ((alpha[t] == 0.0) == (y[t] > 0)) {
            lo = std::max(lo, v);
        } else {
            hi = std::min(hi, v);
        }
    }
    if (free_count > 0)
        return free_sum / static_cast<double>(free_count);
    if (std::isfinite(lo) && std::isfinite(hi))
        return 0.5 * (lo + hi);
    if (std::isfinite(lo))
        return lo;
    if (std::isfinite(hi))
        return hi;
    return 0.0;
}

struct BinaryFit {
    BinarySvmModel model;
    std::vector<double> duals; ///< in the caller's sample order
};

namespace detail {

template <typename T>
std::vector<std::size_t> canonical_order(std::span<const LabeledRow<T>> samples) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].y != samples[b].y)
            return samples[a].y > samples[b].y;
        return std::lexicographical_compare(samples[a].x.begin(), samples[a].x.end(), samples[b].x.begin(),
                                            samples[b].x.end());
    });
    return order;
}

} // namespace detail

/// A binary training set arranged for the solver: samples in solver order
/// and their dense kernel, so one problem can be solved for several C.
/// `gram` (optional) holds the inner products of the samples, with
/// `gram_index[i]` the Gram row of samples[i] (identity when empty). The
/// samples must outlive the problem.
template <typename T>
class BinaryProblem {
public:
    BinaryProblem(std::span<const LabeledRow<T>> samples, const SolverSettings& settings,
                  const GramMatrix* gram = nullptr, std::span<const std::size_t> gram_index = {})
        : samples_(samples) {
        settings.validate();
        if (samples.empty())
            throw Error(ErrorCode::empty_input, "no training samples");
        dim_ = samples.front().x.size();
        bool has_pos = false, has_neg = false;
        for (const auto& s : samples) {
            if (s.x.size() != dim_)
                throw Error(ErrorCode::dimension_mismatch, "training vectors differ in length");
            if (s.y == 1)
                has_pos = true;
            else if (s.y == -1)
                has_neg = true;
            else
                throw Error(ErrorCode::invalid_argument, "binary labels must be +1 or -1");
        }
        if (!has_pos || !has_neg)
            throw Error(ErrorCode::single_class, "binary training needs samples of both signs");
        if (gram != nullptr && !gram_index.empty() && gram_index.size() != samples.size())
            throw Error(ErrorCode::dimension_mismatch, "Gram index does not cover the samples");

        const std::size_t N = samples.size();
        if (settings.deterministic) {
            order_ = detail::canonical_order(samples);
        } else {
            order_.resize(N);
            std::iota(order_.begin(), order_.end(), std::size_t{0});
        }
        y_.resize(N);
        for (std::size_t a = 0; a < N; ++a)
            y_[a] = samples[order_[a]].y;

        Q_.resize(N * N);
        for (std::size_t a = 0; a < N; ++a) {
            const std::size_t ra = gram_index.empty() ? order_[a] : gram_index[order_[a]];
            const auto& xa = samples[order_[a]].x;
            for (std::size_t b = 0; b <= a; ++b) {
                double k;
                if (gram != nullptr) {
                    k = (*gram)(ra, gram_index.empty() ? order_[b] : gram_index[order_[b]]);
                } else {
                    const auto& xb = samples[order_[b]].x;
                    k = 0.0;
                    for (std::size_t d = 0; d < dim_; ++d)
                        k += static_cast<double>(xa[d]) * static_cast<double>(xb[d]);
                }
                Q_[a * N + b] = Q_[b * N + a] = k;
            }
        }
    }

    std::size_t size() const { return y_.size(); }

    /// `warm` (optional) holds starting duals in the caller's sample order.
    BinaryFit solve(double C, const SolverSettings& settings, std::span<const double> warm = {}) const {
        settings.validate();
        if (!(C > 0.0) || !std::isfinite(C))
            throw Error(ErrorCode::invalid_argument, "C must be a positive finite number");
        const std::size_t N = size();
        std::vector<double> initial;
        if (!warm.empty()) {
            if (warm.size() != N)
                throw Error(ErrorCode::dimension_mismatch, "warm start does not match the sample count");
            initial.resize(N);
            for (std::size_t a = 0; a < N; ++a)
                initial[a] = warm[order_[a]];
        }
        const DualSolution sol = solve_dual(Q_, y_, C, settings, initial);

        BinaryFit fit;
        fit.model.C = C;
        fit.model.converged = sol.converged;
        fit.model.iterations = sol.iterations;
        fit.model.weights.assign(dim_, 0.0);
        for (std::size_t a = 0; a < N; ++a) {
            if (sol.alpha[a] == 0.0)
                continue;
            const double coef = sol.alpha[a] * y_[a];
            const auto& x = samples_[order_[a]].x;
            for (std::size_t d = 0; d < dim_; ++d)
                fit.model.weights[d] += coef * static_cast<double>(x[d]);
        }
        fit.model.bias = recover_bias(sol.alpha, sol.gradient, y_, C);
        fit.duals.assign(N, 0.0);
        for (std::size_t a = 0; a < N; ++a)
            fit.duals[order_[a]] = sol.alpha[a];
        return fit;
    }

private:
    std::span<const LabeledRow<T>> samples_;
    std::size_t dim_ = 0;
    std::vector<std::size_t> order_; ///< solver position -> sample index
    std::vector<int> y_;
    std::vector<double> Q_;
};

template <typename T>
BinaryFit fit_binary(std::span<const LabeledRow<T>> samples, double C, const SolverSettings& settings,
                     const GramMatrix* gram = nullptr, std::span<const std::size_t> gram_index = {}) {
    return BinaryProblem<T>(samples, settings, gram, gram_index).solve(C, settings);
}

template <typename T>
BinarySvmModel train_binary(std::span<const LabeledRow<T>> samples, double C, const SolverSettings& settings) {
    return fit_binary(samples, C, settings).model;
}

// ---------------------------------------------------------------------------
// One-vs-one multiclass

/// One unordered class pair. A degenerate pair (one class absent from the
/// training data) carries no model and always votes for the present class.
struct PairModel {
    RainClass first = RainClass::light;   ///< lower ordinal, positive side
    RainClass second = RainClass::moderate;
    bool degenerate = false;
    RainClass vote = RainClass::light; ///< used when degenerate
    BinarySvmModel svm;
};

inline constexpr std::array<std::pair<RainClass, RainClass>, 3> kClassPairs{
    std::pair{RainClass::light, RainClass::moderate}, std::pair{RainClass::light, RainClass::heavy},
    std::pair{RainClass::moderate, RainClass::heavy}};

struct MulticlassSvmModel {
    std::size_t dimension = 0;
    double C = 1.0;
    std::array<PairModel, 3> pairs;

    bool converged() const {
        return std::all_of(pairs.begin(), pairs.end(),
                           [](const PairModel& p) { return p.degenerate || p.svm.converged; });
    }
    std::size_t trained_pairs() const {
        return static_cast<std::size_t>(
            std::count_if(pairs.begin(), pairs.end(), [](const PairModel& p) { return !p.degenerate; }));
    }
};

/// One model per entry of `Cs` (ascending), trained on the samples
/// `pool[members[*]]`. Each pair's kernel is built once and every solve
/// starts from the previous C's duals. When given, `gram` holds inner
/// products indexed by position in `pool`.
inline std::vector<MulticlassSvmModel> train_multiclass_path(std::span<const WindowSample> pool,
                                                             std::span<const std::size_t> members,
                                                             std::span<const double> Cs,
                                                             const SolverSettings& settings,
                                                             const GramMatrix* gram = nullptr) {
    if (members.empty())
        throw Error(ErrorCode::empty_input, "no training samples");
    if (Cs.empty())
        throw Error(ErrorCode::invalid_argument, "no C values to train");
    for (std::size_t c = 1; c < Cs.size(); ++c)
        if (!(Cs[c] > Cs[c - 1]))
            throw Error(ErrorCode::invalid_argument, "C values must be strictly ascending");
    std::array<bool, kClassCount> present{};
    for (auto m : members)
        present[index_of(pool[m].label)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
        throw Error(ErrorCode::single_class, "multiclass training needs at least two classes");

    const std::size_t dimension = pool[members.front()].features.size();
    std::vector<MulticlassSvmModel> models(Cs.size());
    for (std::size_t c = 0; c < Cs.size(); ++c) {
        models[c].dimension = dimension;
        models[c].C = Cs[c];
    }
    for (std::size_t p = 0; p < kClassPairs.size(); ++p) {
        const auto [a, b] = kClassPairs[p];
        for (auto& model : models) {
            PairModel& pm = model.pairs[p];
            pm.first = a;
            pm.second = b;
            if (!present[index_of(a)] || !present[index_of(b)]) {
                pm.degenerate = true;
                pm.vote = present[index_of(a)] ? a : b;
            }
        }
        if (models.front().pairs[p].degenerate)
            continue;

        std::vector<LabeledRow<float>> rows;
        std::vector<std::size_t> gram_rows;
        for (auto m : members) {
            const auto& s = pool[m];
            if (s.label != a && s.label != b)
                continue;
            if (s.features.size() != dimension)
                throw Error(ErrorCode::dimension_mismatch, "training vectors differ in length");
            rows.push_back({s.features, s.label == a ? 1 : -1});
            gram_rows.push_back(m);
        }
        const BinaryProblem<float> problem(rows, settings, gram, gram_rows);
        std::vector<double> warm;
        for (std::size_t c = 0; c < Cs.size(); ++c) {
            auto fit = problem.solve(Cs[c], settings, warm);
            PairModel& pm = models[c].pairs[p];
            pm.svm = std::move(fit.model);
            pm.svm.positive_class = a;
            pm.svm.negative_class = b;
            warm = std::move(fit.duals);
        }
    }
    return models;
}

inline MulticlassSvmModel train_multiclass(std::span<const WindowSample> pool, std::span<const std::size_t> members,
                                           double C, const SolverSettings& settings,
                                           const GramMatrix* gram = nullptr) {
    const double Cs[] = {C};
    return std::move(train_multiclass_path(pool, members, Cs, settings, gram).front());
}

inline MulticlassSvmModel train_multiclass(std::span<const WindowSample> train, double C,
                                           const SolverSettings& settings) {
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return train_multiclass(train, all, C, settings);
}

struct VoteTally {
    std::array<int, kClassCount> votes{};
    std::array<double, kClassCount> margin{};
};

template <typename T>
VoteTally tally_votes(const MulticlassSvmModel& model, std::span<const T> features) {
    if (features.size() != model.dimension)
        throw Error(ErrorCode::dimension_mismatch, "feature length " + std::to_string(features.size()) +
                                                       " vs model dimension " + std::to_string(model.dimension));
    VoteTally tally;
    for (const auto& pm : model.pairs) {
        if (pm.degenerate) {
            ++tally.votes[index_of(pm.vote)];
            continue;
        }
        const double d = decision(pm.svm, features);
        const RainClass winner = d >= 0.0 ? pm.first : pm.second;
        ++tally.votes[index_of(winner)];
        tally.margin[index_of(winner)] += std::abs(d);
    }
    return tally;
}

/// Majority vote; ties go to the larger summed |margin|, then the lower class.
template <typename T>
RainClass predict(const MulticlassSvmModel& model, std::span<const T> features) {
    const VoteTally tally = tally_votes(model, features);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c) {
        if (tally.votes[c] > tally.votes[best] ||
            (tally.votes[c] == tally.votes[best] && tally.margin[c] > tally.margin[best]))
            best = c;
    }
    return class_from_index(best);
}

inline RainClass predict(const MulticlassSvmModel& model, const std::vector<float>& features) {
    return predict<float>(model, std::span<const float>(features));
}

// ---------------------------------------------------------------------------
// Model file: little-endian magic, version, dimension (u64), C (f64); per pair
// first/second class, degenerate flag, vote class (u8 each), bias, weights
// (f64); then one convergence flag byte per pair.

inline constexpr std::uint32_t kModelMagic = 0x4D565352; // "RSVM"
inline constexpr std::uint32_t kModelVersion = 1;

inline void write_model(std::ostream& out, const MulticlassSvmModel& model) {
    detail::put_u32(out, kModelMagic);
    detail::put_u32(out, kModelVersion);
    detail::put_u64(out, model.dimension);
    detail::put_f64(out, model.C);
    for (const auto& pm : model.pairs) {
        detail::put_u8(out, static_cast<std::uint8_t>(pm.first));
        detail::put_u8(out, static_cast<std::uint8_t>(pm.second));
        detail::put_u8(out, pm.degenerate ? 1 : 0);
        detail::put_u8(out, static_cast<std::uint8_t>(pm.vote));
        detail::put_f64(out, pm.svm.bias);
        for (std::size_t d = 0; d < model.dimension; ++d)
            detail::put_f64(out, pm.degenerate ? 0.0 : pm.svm.weights[d]);
    }
    for (const auto& pm : model.pairs)
        detail::put_u8(out, pm.degenerate || pm.svm.converged ? 1 : 0);
    if (!out)
        throw Error(ErrorCode::io_error, "failed writing model");
}

inline MulticlassSvmModel read_model(std::istream& in) {
    if (detail::get_u32(in) != kModelMagic)
        throw Error(ErrorCode::parse_error, "not a model file (bad magic)");
    if (const auto v = detail::get_u32(in); v != kModelVersion)
        throw Error(ErrorCode::parse_error, "unsupported model version " + std::to_string(v));
    MulticlassSvmModel model;
    model.dimension = detail::get_u64(in);
    model.C = detail::get_f64(in);
    for (auto& pm : model.pairs) {
        pm.first = class_from_index(detail::get_u8(in));
        pm.second = class_from_index(detail::get_u8(in));
        pm.degenerate = detail::get_u8(in) != 0;
        pm.vote = class_from_index(detail::get_u8(in));
        pm.svm.bias = detail::get_f64(in);
        pm.svm.weights.resize(model.dimension);
        for (auto& w : pm.svm.weights)
            w = detail::get_f64(in);
        pm.svm.positive_class = pm.first;
        pm.svm.negative_class = pm.second;
        pm.svm.C = model.C;
        if (pm.degenerate)
            pm.svm.weights.clear();
    }
    for (auto& pm : model.pairs)
        pm.svm.converged = detail::get_u8(in) != 0;
    return model;
}

} // namespace rainsvm
