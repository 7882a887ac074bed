#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "rainsvm/modelselect.hpp"

using namespace rainsvm;

namespace {

// Three well separated clusters, labels cycling so every fold sees every class.
std::vector<WindowSample> clusters(std::size_t count, double spread, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<float> noise(0.0f, static_cast<float>(spread));
    const float centers[3][2] = {{-1.0f, 0.0f}, {0.0f, 1.0f}, {1.0f, 0.0f}};
    std::vector<WindowSample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t c = i % 3;
        out[i].label = class_from_index(c);
        out[i].end_index = i;
        out[i].features = {centers[c][0] + noise(rng), centers[c][1] + noise(rng), 1.0f};
    }
    return out;
}

std::string report_of(const CvResult& cv) {
    std::ostringstream os;
    write_cv_report(os, cv);
    return os.str();
}

} // namespace

TEST(CGrid, DefaultHasTwentyTwoCandidates) {
    const CGrid grid;
    const auto e = grid.exponents();
    ASSERT_EQ(e.size(), 22u);
    EXPECT_EQ(e.front(), -15);
    EXPECT_EQ(e.back(), 6);
    EXPECT_EQ(CGrid::value(-15), 1.0 / 32768.0);
    EXPECT_EQ(CGrid::value(6), 64.0);
    EXPECT_THROW((CGrid{3, 2}.validate()), Error);
}

TEST(SelectC, DefaultGridEvaluatesAllCandidates) {
    const auto train = clusters(60, 0.05, 1);
    const auto folds = fold_assign(train.size(), 10);
    const auto cv = select_c(train, CGrid{}, folds, SolverSettings{});
    ASSERT_EQ(cv.exponents.size(), 22u);
    ASSERT_EQ(cv.mean_scores.size(), 22u);
    for (std::size_t c = 0; c < 22; ++c) {
        ASSERT_EQ(cv.fold_scores[c].size(), 10u);
        ASSERT_TRUE(cv.mean_scores[c]);
        EXPECT_GE(*cv.mean_scores[c], 0.0);
        EXPECT_LE(*cv.mean_scores[c], 1.0);
    }
    EXPECT_GE(cv.selected_exponent, -15);
    EXPECT_LE(cv.selected_exponent, 6);
}

TEST(SelectC, SeparableTiesGoToSmallestC) {
    const auto train = clusters(60, 0.05, 2);
    const auto folds = fold_assign(train.size(), 10);
    const CGrid grid{-4, 6};
    const auto cv = select_c(train, grid, folds, SolverSettings{});
    for (const auto& m : cv.mean_scores) {
        ASSERT_TRUE(m);
        EXPECT_EQ(*m, 1.0);
    }
    EXPECT_EQ(cv.selected_exponent, -4);
    EXPECT_EQ(cv.selected_c(), 1.0 / 16.0);
}

TEST(SelectC, DeterministicAcrossRunsAndJobCounts) {
    const auto train = clusters(90, 0.6, 3);
    const auto folds = fold_assign(train.size(), 10);
    const CGrid grid{-6, 4};
    const auto a = select_c(train, grid, folds, SolverSettings{}, nullptr, 1);
    const auto b = select_c(train, grid, folds, SolverSettings{}, nullptr, 1);
    const auto c = select_c(train, grid, folds, SolverSettings{}, nullptr, 3);
    EXPECT_EQ(report_of(a), report_of(b));
    EXPECT_EQ(report_of(a), report_of(c));
    EXPECT_EQ(a.fold_scores, c.fold_scores);
    EXPECT_EQ(a.selected_exponent, c.selected_exponent);
}

TEST(SelectC, GramRouteMatchesDirect) {
    const auto train = clusters(45, 0.5, 4);
    std::vector<std::span<const float>> rows;
    for (const auto& s : train)
        rows.emplace_back(s.features);
    const auto gram = GramMatrix::from_rows(rows);
    const auto folds = fold_assign(train.size(), 5);
    const CGrid grid{-3, 3};
    const auto direct = select_c(train, grid, folds, SolverSettings{});
    const auto cached = select_c(train, grid, folds, SolverSettings{}, &gram);
    EXPECT_EQ(report_of(direct), report_of(cached));
}

TEST(SelectC, SelectedIsGridMember) {
    for (unsigned seed = 10; seed < 16; ++seed) {
        const auto train = clusters(40, 0.3 + 0.2 * (seed % 3), seed);
        const CGrid grid{-5 + static_cast<int>(seed % 3), 2};
        const auto cv = select_c(train, grid, fold_assign(train.size(), 4), SolverSettings{});
        const auto e = grid.exponents();
        EXPECT_NE(std::find(e.begin(), e.end(), cv.selected_exponent), e.end());
    }
}

TEST(SelectC, SingleClassTrainingFoldIsSkipped) {
    // The last fold alone holds the Moderate samples: training without it sees only Light.
    std::vector<WindowSample> train(20);
    for (std::size_t i = 0; i < 20; ++i) {
        const bool late = i >= 18;
        train[i].label = late ? RainClass::moderate : RainClass::light;
        train[i].end_index = i;
        train[i].features = {late ? 1.0f : -1.0f + 0.01f * static_cast<float>(i), 1.0f};
    }
    const auto folds = fold_assign(train.size(), 10);
    const auto cv = select_c(train, CGrid{-2, 2}, folds, SolverSettings{});
    for (std::size_t c = 0; c < cv.exponents.size(); ++c) {
        EXPECT_FALSE(cv.fold_scores[c][9]);
        EXPECT_TRUE(cv.fold_scores[c][0]);
        double sum = 0.0;
        for (std::size_t f = 0; f < 9; ++f)
            sum += *cv.fold_scores[c][f];
        ASSERT_TRUE(cv.mean_scores[c]);
        EXPECT_NEAR(*cv.mean_scores[c], sum / 9.0, 1e-15);
    }
    const std::string csv = report_of(cv);
    EXPECT_NE(csv.find("\n-2,9,,1\n"), std::string::npos);
}

TEST(SelectC, AllFoldsSkippedThrows) {
    std::vector<WindowSample> train(10);
    for (std::size_t i = 0; i < 10; ++i) {
        train[i].end_index = i;
        train[i].features = {1.0f};
    }
    // Only fold 3 holds a Heavy sample, so only its training portion is single-class.
    train[3].label = RainClass::heavy;
    EXPECT_NO_THROW(select_c(train, CGrid{0, 0}, fold_assign(10, 10), SolverSettings{}));
    train[3].label = RainClass::light;
    EXPECT_THROW(select_c(train, CGrid{0, 0}, fold_assign(10, 10), SolverSettings{}), Error);
}

TEST(PickExponent, TieBreakAndDominatedRemoval) {
    const std::vector<int> e{-3, -2, -1, 0, 1};
    std::vector<std::optional<double>> m{0.5, 0.7, 0.7, std::nullopt, 0.6};
    EXPECT_EQ(pick_exponent(e, m), -2);

    std::mt19937 rng(6);
    std::uniform_int_distribution<int> score(0, 8);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> ex;
        std::vector<std::optional<double>> ms;
        for (int k = -6; k <= 2; ++k) {
            ex.push_back(k);
            ms.push_back(score(rng) == 0 ? std::nullopt : std::optional<double>(score(rng) / 8.0));
        }
        if (std::none_of(ms.begin(), ms.end(), [](const auto& v) { return v.has_value(); }))
            continue;
        const int chosen = pick_exponent(ex, ms);
        const auto it = std::find(ex.begin(), ex.end(), chosen);
        const double best = *ms[static_cast<std::size_t>(it - ex.begin())];
        for (std::size_t drop = 0; drop < ex.size(); ++drop) {
            if (!ms[drop] || *ms[drop] >= best)
                continue;
            auto ex2 = ex;
            auto ms2 = ms;
            ex2.erase(ex2.begin() + static_cast<std::ptrdiff_t>(drop));
            ms2.erase(ms2.begin() + static_cast<std::ptrdiff_t>(drop));
            ASSERT_EQ(pick_exponent(ex2, ms2), chosen);
        }
    }
}

TEST(SelectC, DominatedEndpointRemovalKeepsSelection) {
    const auto train = clusters(60, 0.7, 21);
    const auto folds = fold_assign(train.size(), 6);
    const CGrid grid{-8, 3};
    const auto full = select_c(train, grid, folds, SolverSettings{});
    const double best = *full.mean_scores[static_cast<std::size_t>(full.selected_exponent - grid.lo)];
    if (*full.mean_scores.front() < best) {
        const auto trimmed = select_c(train, CGrid{grid.lo + 1, grid.hi}, folds, SolverSettings{});
        EXPECT_EQ(trimmed.selected_exponent, full.selected_exponent);
    }
    if (*full.mean_scores.back() < best) {
        const auto trimmed = select_c(train, CGrid{grid.lo, grid.hi - 1}, folds, SolverSettings{});
        EXPECT_EQ(trimmed.selected_exponent, full.selected_exponent);
    }
}

TEST(FoldMembers, DisjointFromValidationAndComplete) {
    for (std::size_t N : {10u, 25u, 97u, 2547u}) {
        const auto folds = fold_assign(N, 10);
        for (std::size_t f = 0; f < 10; ++f) {
            const auto members = fold_training_members(folds, f);
            std::set<std::size_t> seen(members.begin(), members.end());
            std::size_t held = 0;
            for (std::size_t i = 0; i < N; ++i) {
                if (folds[i] == f) {
                    ASSERT_FALSE(seen.count(i));
                    ++held;
                }
            }
            EXPECT_EQ(members.size() + held, N);
        }
    }
}

TEST(CvReport, Layout) {
    const auto train = clusters(30, 0.05, 5);
    const auto cv = select_c(train, CGrid{0, 1}, fold_assign(30, 3), SolverSettings{});
    const std::string csv = report_of(cv);
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        lines.push_back(line);
    ASSERT_EQ(lines.size(), 1u + 2u * (3u + 1u));
    EXPECT_EQ(lines[0], "c_exponent,fold,macro_f1,converged");
    EXPECT_EQ(lines[1], "0,0,1.000000,1");
    EXPECT_EQ(lines[4], "0,mean,1.000000,1");
}
