// Copyright 2026 The Momir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "momir/svm.hpp"

using momir::FeatureDatabase;
using momir::FeatureRecord;
using momir::SvmTrainConfig;

namespace {

FeatureDatabase db_from_points(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& labels) {
    FeatureDatabase db;
    db.method = momir::Method::elm;
    db.order = 1;
    db.dim = static_cast<std::uint32_t>(points.front().size());
    for (std::size_t i = 0; i < points.size(); ++i)
        db.records.push_back({"p" + std::to_string(i), labels[i], points[i]});
    return db;
}

// Two tight clusters at (0,0) and (10,10), four points each.
FeatureDatabase two_cluster_db() {
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (double d : {-0.1, 0.1}) {
        pts.push_back({0.0 + d, 0.0 - d});
        pts.push_back({0.0 - d, 0.0 + d});
        labels.push_back(0);
        labels.push_back(0);
        pts.push_back({10.0 + d, 10.0 - d});
        pts.push_back({10.0 - d, 10.0 + d});
        labels.push_back(1);
        labels.push_back(1);
    }
    return db_from_points(pts, labels);
}

FeatureDatabase xor_db() {
    return db_from_points({{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}}, {0, 0, 1, 1});
}

double dual_from_machine(const momir::SvmModel& model, const momir::BinaryMachine& m) {
    double obj = 0.0;
    for (std::size_t i = 0; i < m.coef.size(); ++i) {
        obj += std::abs(m.coef[i]);
        for (std::size_t j = 0; j < m.coef.size(); ++j)
            obj -= 0.5 * m.coef[i] * m.coef[j] *
                   momir::kernel_eval(model.kernel, m.support_vectors[i], m.support_vectors[j]);
    }
    return obj;
}

}  // namespace

TEST_CASE("rbf kernel pinned values", "[svm][kernel]") {
    const std::vector<double> x{0.3, -1.2, 4.0};
    CHECK(momir::rbf_kernel(x, x, 0.7) == 1.0);
    const std::vector<double> a{0.0, 0.0}, b{1.0, 0.0};
    CHECK(momir::rbf_kernel(a, b, 1.0) == Catch::Approx(0.36787944117144233).margin(1e-15));
    // Monotone decay toward 0 as gamma grows.
    double prev = 1.0;
    for (double gamma : {0.5, 1.0, 5.0, 50.0, 500.0}) {
        const double v = momir::rbf_kernel(a, b, gamma);
        REQUIRE(v < prev);
        prev = v;
    }
    REQUIRE(prev < 1e-100);
    CHECK_THROWS_AS(momir::rbf_kernel(a, x, 1.0), momir::Error);
    CHECK_THROWS_AS(momir::rbf_kernel(a, b, 0.0), momir::Error);
}

TEST_CASE("training sample selection rules", "[svm][selection]") {
    using momir::SelectionRule;
    SECTION("even spacing over 72 views") {
        auto k4 = momir::select_training_offsets(72, 4, SelectionRule::parse("even"));
        REQUIRE(k4 == std::vector<std::size_t>{0, 18, 36, 54});
        auto k7 = momir::select_training_offsets(72, 7, SelectionRule::parse("even"));
        REQUIRE(k7 == std::vector<std::size_t>{0, 10, 21, 31, 41, 51, 62});
    }
    SECTION("first-k") {
        auto k3 = momir::select_training_offsets(10, 3, SelectionRule::parse("first"));
        REQUIRE(k3 == std::vector<std::size_t>{0, 1, 2});
    }
    SECTION("seeded random is deterministic, sorted, distinct, in range") {
        auto a = momir::select_training_offsets(30, 5, SelectionRule::parse("random:42"), 3);
        auto b = momir::select_training_offsets(30, 5, SelectionRule::parse("random:42"), 3);
        REQUIRE(a == b);
        REQUIRE(a.size() == 5);
        for (std::size_t i = 1; i < a.size(); ++i) REQUIRE(a[i - 1] < a[i]);
        REQUIRE(a.back() < 30);
        auto c = momir::select_training_offsets(30, 5, SelectionRule::parse("random:43"), 3);
        REQUIRE(a != c);
    }
    SECTION("k larger than the class errors") {
        CHECK_THROWS_AS(momir::select_training_offsets(3, 4, SelectionRule::parse("even")),
                        momir::Error);
    }
}

TEST_CASE("linearly separable clusters train to 100%", "[svm]") {
    auto db = two_cluster_db();
    SvmTrainConfig cfg;
    cfg.kernel.type = momir::KernelType::linear;
    cfg.c = 10.0;
    cfg.per_class = 4;
    auto model = momir::train_svm(db, cfg);
    for (const auto& r : db.records)
        REQUIRE(momir::classify(model, r.values).label == r.class_label);
}

TEST_CASE("XOR with an RBF kernel reaches 100% and matches a grid-searched dual",
          "[svm][smo]") {
    auto db = xor_db();
    SvmTrainConfig cfg;
    cfg.kernel = {momir::KernelType::rbf, 1.0};
    cfg.c = 100.0;
    cfg.per_class = 2;
    auto model = momir::train_svm(db, cfg);
    REQUIRE(model.machines.size() == 1);
    for (const auto& r : db.records)
        REQUIRE(momir::classify(model, r.values).label == r.class_label);

    // Brute-force grid search over the 4-point dual problem with the equality
    // constraint a1+a2 = a3+a4 (labels +1,+1,-1,-1).
    std::vector<std::vector<double>> x;
    for (const auto& r : db.records) x.push_back(model.standardizer.apply(r.values));
    const std::vector<double> y{1.0, 1.0, -1.0, -1.0};
    std::vector<std::vector<double>> kmat(4, std::vector<double>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) kmat[i][j] = momir::kernel_eval(model.kernel, x[i], x[j]);

    const int steps = 50;
    const double step = cfg.c / steps;
    double best = -1e300;
    std::vector<double> alpha(4);
    for (int i1 = 0; i1 <= steps; ++i1)
        for (int i2 = 0; i2 <= steps; ++i2)
            for (int i3 = 0; i3 <= steps; ++i3) {
                alpha[0] = i1 * step;
                alpha[1] = i2 * step;
                alpha[2] = i3 * step;
                alpha[3] = alpha[0] + alpha[1] - alpha[2];
                if (alpha[3] < 0.0 || alpha[3] > cfg.c) continue;
                best = std::max(best, momir::detail::smo_dual_objective(kmat, y, alpha));
            }

    // SMO must do at least as well as the coarse grid.
    REQUIRE(dual_from_machine(model, model.machines.front()) >= best - 1e-6);
}

TEST_CASE("SMO solutions are dual feasible and satisfy KKT", "[svm][smo]") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> noise(0.0, 0.6);
    for (double c : {1.0, 10.0}) {
        // Two overlapping Gaussian blobs, 12 points each.
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (int i = 0; i < 12; ++i) {
            x.push_back({noise(rng), noise(rng)});
            y.push_back(1.0);
            x.push_back({1.0 + noise(rng), 1.0 + noise(rng)});
            y.push_back(-1.0);
        }
        const std::size_t n = x.size();
        std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) kmat[i][j] = momir::rbf_kernel(x[i], x[j], 1.0);

        const double tol = 1e-3;
        auto result = momir::detail::smo_solve(kmat, y, c, tol);

        double sum_ay = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(result.alpha[i] >= 0.0);
            REQUIRE(result.alpha[i] <= c);
            sum_ay += result.alpha[i] * y[i];
        }
        REQUIRE(std::abs(sum_ay) < 1e-6);

        for (std::size_t i = 0; i < n; ++i) {
            double u = -result.bias;
            for (std::size_t j = 0; j < n; ++j) u += result.alpha[j] * y[j] * kmat[i][j];
            const double margin = y[i] * u;
            if (result.alpha[i] == 0.0)
                REQUIRE(margin >= 1.0 - 2 * tol);
            else if (result.alpha[i] == c)
                REQUIRE(margin <= 1.0 + 2 * tol);
            else
                REQUIRE(margin == Catch::Approx(1.0).margin(2 * tol));
        }
    }
}

TEST_CASE("decision sign matches the label on separable data at large C", "[svm][smo]") {
    auto db = two_cluster_db();
    SvmTrainConfig cfg;
    cfg.kernel = {momir::KernelType::rbf, 0.5};
    cfg.c = 1000.0;
    cfg.per_class = 4;
    auto model = momir::train_svm(db, cfg);
    const auto& machine = model.machines.front();
    for (const auto& r : db.records) {
        const double u = model.machine_decision(machine, model.standardizer.apply(r.values));
        if (r.class_label == 0)
            REQUIRE(u > 0.0);
        else
            REQUIRE(u < 0.0);
    }
}

TEST_CASE("training precondition errors", "[svm]") {
    SECTION("single class") {
        auto db = db_from_points({{0.0}, {1.0}}, {0, 0});
        CHECK_THROWS_AS(momir::train_svm(db, SvmTrainConfig{}), momir::Error);
    }
    SECTION("class smaller than k") {
        auto db = db_from_points({{0.0}, {1.0}, {2.0}}, {0, 0, 1});
        SvmTrainConfig cfg;
        cfg.per_class = 2;
        CHECK_THROWS_AS(momir::train_svm(db, cfg), momir::Error);
    }
}

TEST_CASE("zero-variance features standardize to pass-through", "[svm]") {
    // Second coordinate is constant across the training set.
    auto db = db_from_points({{0.0, 5.0}, {0.2, 5.0}, {9.8, 5.0}, {10.0, 5.0}}, {0, 0, 1, 1});
    SvmTrainConfig cfg;
    cfg.per_class = 2;
    auto model = momir::train_svm(db, cfg);
    REQUIRE(model.standardizer.stddev[1] == 1.0);
    for (const auto& r : db.records)
        REQUIRE(momir::classify(model, r.values).label == r.class_label);
}

TEST_CASE("deterministic training", "[svm]") {
    auto db = two_cluster_db();
    SvmTrainConfig cfg;
    cfg.per_class = 3;
    auto a = momir::train_svm(db, cfg);
    auto b = momir::train_svm(db, cfg);
    REQUIRE(momir::model_to_json(a).dump() == momir::model_to_json(b).dump());
}

TEST_CASE("global feature rescaling does not change predictions", "[svm]") {
    auto db = two_cluster_db();
    SvmTrainConfig cfg;
    cfg.per_class = 4;
    auto model = momir::train_svm(db, cfg);

    auto scaled = db;
    for (auto& r : scaled.records)
        for (auto& v : r.values) v *= 37.5;
    auto scaled_model = momir::train_svm(scaled, cfg);
    for (std::size_t i = 0; i < db.records.size(); ++i)
        REQUIRE(momir::classify(model, db.records[i].values).label ==
                momir::classify(scaled_model, scaled.records[i].values).label);
}

TEST_CASE("vote tie-breaking contract", "[svm][classify]") {
    // Hand-built models pin the rules exactly.
    momir::SvmModel model;
    model.kernel = {momir::KernelType::linear, 0.0};
    model.dim = 1;
    model.standardizer.mean = {0.0};
    model.standardizer.stddev = {1.0};

    SECTION("zero decision value votes for the smaller class") {
        model.classes = {0, 1};
        momir::BinaryMachine m;
        m.class_a = 0;
        m.class_b = 1;
        m.bias = 0.0;  // no SVs: decision is identically 0
        model.machines = {m};
        auto res = momir::classify(model, std::vector<double>{0.0});
        REQUIRE(res.label == 0);
        REQUIRE(res.votes[0] == 1);
    }
    SECTION("vote ties break on summed absolute decision values") {
        model.classes = {0, 1, 2};
        // Circular wins: 0 beats 1 weakly, 1 beats 2 strongly, 2 beats 0
        // moderately. One vote each; class 1 has the largest |decision|.
        momir::BinaryMachine m01, m12, m02;
        m01 = {0, 1, -0.1, {}, {}};  // u = +0.1 votes for 0
        m12 = {1, 2, -9.0, {}, {}};  // u = +9.0 votes for 1
        m02 = {0, 2, 2.0, {}, {}};   // u = -2.0 votes for 2
        model.machines = {m01, m12, m02};
        auto res = momir::classify(model, std::vector<double>{0.0});
        REQUIRE(res.votes[0] == 1);
        REQUIRE(res.votes[1] == 1);
        REQUIRE(res.votes[2] == 1);
        REQUIRE(res.label == 1);
    }
    SECTION("full ties fall back to the smaller class index") {
        model.classes = {3, 7};
        momir::BinaryMachine m;
        m.class_a = 3;
        m.class_b = 7;
        m.bias = 0.0;
        model.machines = {m};
        // Single machine, zero decision: class 3 wins the vote outright.
        REQUIRE(momir::classify(model, std::vector<double>{1.0}).label == 3);
    }
    SECTION("dimension mismatch errors") {
        model.classes = {0, 1};
        model.machines = {{0, 1, 0.0, {}, {}}};
        CHECK_THROWS_AS(momir::classify(model, std::vector<double>{1.0, 2.0}), momir::Error);
    }
}

TEST_CASE("classification efficiency on separable classes", "[svm][efficiency]") {
    // Three classes at distinct constant feature vectors, 6 members each.
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 6; ++i) {
            pts.push_back({static_cast<double>(c), 3.0 * c});
            labels.push_back(c);
        }
    auto db = db_from_points(pts, labels);

    for (int k : {1, 3, 6}) {  // k = 6 trains on every sample
        SvmTrainConfig cfg;
        cfg.per_class = k;
        auto outcome = momir::classification_efficiency(db, cfg);
        REQUIRE(outcome.efficiency_pct == 100.0);
        REQUIRE(outcome.evaluated == db.records.size());
    }

    SECTION("heldout scope skips the training images") {
        SvmTrainConfig cfg;
        cfg.per_class = 2;
        auto outcome = momir::classification_efficiency(db, cfg, momir::EvalScope::heldout);
        REQUIRE(outcome.evaluated == db.records.size() - 6);
        REQUIRE(outcome.efficiency_pct == 100.0);
    }
}

TEST_CASE("model JSON round trip preserves every coefficient", "[svm][io]") {
    auto db = two_cluster_db();
    SvmTrainConfig cfg;
    cfg.per_class = 3;
    cfg.selection = momir::SelectionRule::parse("random:7");
    auto model = momir::train_svm(db, cfg);
    auto back = momir::model_from_json(momir::model_to_json(model));
    REQUIRE(momir::model_to_json(back).dump() == momir::model_to_json(model).dump());
    REQUIRE(back.kernel.gamma == model.kernel.gamma);
    REQUIRE(back.machines.size() == model.machines.size());
    for (std::size_t i = 0; i < model.machines.size(); ++i) {
        REQUIRE(back.machines[i].coef == model.machines[i].coef);
        REQUIRE(back.machines[i].support_vectors == model.machines[i].support_vectors);
        REQUIRE(back.machines[i].bias == model.machines[i].bias);
    }
    // Gamma was requested as auto and resolved to 1/dim.
    REQUIRE(model.kernel.gamma == 0.5);
}
