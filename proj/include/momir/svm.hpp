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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "momir/database.hpp"
#include "momir/detail/parallel.hpp"
#include "momir/features.hpp"

namespace momir {

enum class KernelType : std::uint8_t { rbf, linear };

struct KernelParams {
    KernelType type = KernelType::rbf;
    double gamma = 0.0;  // <= 0 requests 1/dim, resolved at training time
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size())
        throw Error("dimension mismatch in rbf_kernel: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    if (gamma <= 0.0) throw Error("rbf gamma must be positive");
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

inline double linear_kernel(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error("dimension mismatch in linear_kernel: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return dot;
}

inline double kernel_eval(const KernelParams& params, std::span<const double> a,
                          std::span<const double> b) {
    return params.type == KernelType::rbf ? rbf_kernel(a, b, params.gamma) : linear_kernel(a, b);
}

inline std::string to_string(KernelType t) { return t == KernelType::rbf ? "rbf" : "linear"; }

inline KernelType parse_kernel_type(const std::string& s) {
    if (s == "rbf") return KernelType::rbf;
    if (s == "linear") return KernelType::linear;
    throw Error("unknown kernel '" + s + "' (expected rbf or linear)");
}

/// How the k training samples are picked inside each class (within the
/// class's database order).
struct SelectionRule {
    enum class Kind : std::uint8_t { even, first, random } kind = Kind::even;
    std::uint64_t seed = 0;

    std::string describe() const {
        switch (kind) {
            case Kind::even: return "even";
            case Kind::first: return "first";
            case Kind::random: return "random:" + std::to_string(seed);
        }
        throw Error("invalid selection rule");
    }

    static SelectionRule parse(const std::string& s) {
        if (s == "even") return {Kind::even, 0};
        if (s == "first") return {Kind::first, 0};
        if (s.rfind("random:", 0) == 0)
            return {Kind::random, std::stoull(s.substr(7))};
        if (s == "random") return {Kind::random, 0};
        throw Error("unknown selection rule '" + s + "' (expected even, first, or random:<seed>)");
    }
};

/// Indices of the k samples taken from a class of the given size.
/// `even` spreads them as round(t*size/k), the canonical choice for
/// orientation-ordered classes.
inline std::vector<std::size_t> select_training_offsets(std::size_t class_size, int k,
                                                        const SelectionRule& rule,
                                                        int class_label = 0) {
    if (k < 1) throw Error("per-class training count must be at least 1");
    if (static_cast<std::size_t>(k) > class_size)
        throw Error("class has " + std::to_string(class_size) + " samples, cannot select " +
                    std::to_string(k));
    std::vector<std::size_t> offsets;
    offsets.reserve(static_cast<std::size_t>(k));
    switch (rule.kind) {
        case SelectionRule::Kind::even:
            for (int t = 0; t < k; ++t)
                offsets.push_back(static_cast<std::size_t>(
                    std::lround(static_cast<double>(t) * static_cast<double>(class_size) / k)));
            break;
        case SelectionRule::Kind::first:
            for (int t = 0; t < k; ++t) offsets.push_back(static_cast<std::size_t>(t));
            break;
        case SelectionRule::Kind::random: {
            std::seed_seq seq{rule.seed, static_cast<std::uint64_t>(class_label)};
            std::mt19937_64 rng(seq);
            std::vector<std::size_t> all(class_size);
            for (std::size_t i = 0; i < class_size; ++i) all[i] = i;
            std::shuffle(all.begin(), all.end(), rng);
            offsets.assign(all.begin(), all.begin() + k);
            std::sort(offsets.begin(), offsets.end());
            break;
        }
    }
    return offsets;
}

/// Per-feature z-scoring statistics taken from the training subset.
/// Zero-variance features get unit stddev so they pass through unchanged.
struct Standardizer {
    std::vector<double> mean, stddev;

    static Standardizer fit(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw Error("cannot standardize an empty training set");
        const std::size_t dim = rows.front().size();
        Standardizer s;
        s.mean.assign(dim, 0.0);
        s.stddev.assign(dim, 0.0);
        for (const auto& r : rows)
            for (std::size_t k = 0; k < dim; ++k) s.mean[k] += r[k];
        for (auto& m : s.mean) m /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = r[k] - s.mean[k];
                s.stddev[k] += d * d;
            }
        for (auto& v : s.stddev) {
            v = std::sqrt(v / static_cast<double>(rows.size()));
            if (v == 0.0) v = 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> v) const {
        if (v.size() != mean.size())
            throw Error("dimension mismatch in standardizer: " + std::to_string(v.size()) +
                        " vs " + std::to_string(mean.size()));
        std::vector<double> out(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - mean[k]) / stddev[k];
        return out;
    }
};

namespace detail {

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;  // decision u(x) = sum alpha_i y_i K(x_i, x) - bias
    int passes = 0;
};

inline double smo_dual_objective(const std::vector<std::vector<double>>& kmat,
                                 const std::vector<double>& y, const std::vector<double>& alpha) {
    double obj = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        obj += alpha[i];
        for (std::size_t j = 0; j < alpha.size(); ++j)
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kmat[i][j];
    }
    return obj;
}

// Platt-style sequential minimal optimization over a precomputed kernel
// matrix. Working-set selection is deterministic: the second-choice
// heuristic takes the first maximal |E1-E2| and fallback scans start at
// index 0, so identical inputs give identical models.
class SmoSolver {
public:
    SmoSolver(const std::vector<std::vector<double>>& kmat, const std::vector<double>& y, double c,
              double tol, int max_passes)
        : kmat_(kmat), y_(y), c_(c), tol_(tol), max_passes_(max_passes),
          alpha_(y.size(), 0.0), err_(y.size()) {
        for (std::size_t i = 0; i < y.size(); ++i) err_[i] = -y[i];  // u = 0 at alpha = 0
    }

    SmoResult solve() {
        const std::size_t n = y_.size();
        int passes = 0;
        bool examine_all = true;
        int num_changed = 0;
        while ((num_changed > 0 || examine_all) && passes < max_passes_) {
            ++passes;
            num_changed = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (examine_all || (alpha_[i] > 0.0 && alpha_[i] < c_)) num_changed += examine(i);
            }
            if (examine_all)
                examine_all = false;
            else if (num_changed == 0)
                examine_all = true;
        }
        return {alpha_, b_, passes};
    }

private:
    bool non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }

    int examine(std::size_t i2) {
        const double y2 = y_[i2], a2 = alpha_[i2], e2 = err_[i2];
        const double r2 = e2 * y2;
        if (!((r2 < -tol_ && a2 < c_) || (r2 > tol_ && a2 > 0.0))) return 0;

        // Second-choice heuristic: maximize |E1 - E2| over non-bound points.
        std::size_t best = y_.size();
        double best_gap = -1.0;
        for (std::size_t i = 0; i < y_.size(); ++i) {
            if (!non_bound(i)) continue;
            const double gap = std::abs(err_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < y_.size() && take_step(best, i2)) return 1;
        for (std::size_t i = 0; i < y_.size(); ++i)
            if (non_bound(i) && take_step(i, i2)) return 1;
        for (std::size_t i = 0; i < y_.size(); ++i)
            if (take_step(i, i2)) return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = err_[i1], e2 = err_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s > 0.0) {
            lo = std::max(0.0, a1 + a2 - c_);
            hi = std::min(c_, a1 + a2);
        } else {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c_, c_ + a2 - a1);
        }
        if (lo >= hi) return false;

        const double k11 = kmat_[i1][i1], k12 = kmat_[i1][i2], k22 = kmat_[i2][i2];
        const double eta = k11 + k22 - 2.0 * k12;
        double a2_new;
        if (eta > 0.0) {
            a2_new = a2 + y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // Objective at the segment ends when the kernel matrix is not PD.
            const double f1 = y1 * (e1 + b_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + b_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double psi_l = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                 s * lo * l1 * k12;
            const double psi_h = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                 s * hi * h1 * k12;
            if (psi_l < psi_h - kEps)
                a2_new = lo;
            else if (psi_l > psi_h + kEps)
                a2_new = hi;
            else
                return false;
        }
        if (std::abs(a2_new - a2) < kEps * (a2_new + a2 + kEps)) return false;

        double a1_new = a1 + s * (a2 - a2_new);
        if (a1_new < 0.0) {
            a2_new += s * a1_new;
            a1_new = 0.0;
        } else if (a1_new > c_) {
            a2_new += s * (a1_new - c_);
            a1_new = c_;
        }

        const double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
        const double b1 = e1 + d1 * k11 + d2 * k12 + b_;
        const double b2 = e2 + d1 * k12 + d2 * k22 + b_;
        double b_new;
        if (a1_new > 0.0 && a1_new < c_)
            b_new = b1;
        else if (a2_new > 0.0 && a2_new < c_)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        for (std::size_t i = 0; i < y_.size(); ++i)
            err_[i] += d1 * kmat_[i1][i] + d2 * kmat_[i2][i] + b_ - b_new;
        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        b_ = b_new;
        return true;
    }

    static constexpr double kEps = 1e-6;

    const std::vector<std::vector<double>>& kmat_;
    const std::vector<double>& y_;
    double c_;
    double tol_;
    int max_passes_;
    std::vector<double> alpha_;
    std::vector<double> err_;
    double b_ = 0.0;
};

inline SmoResult smo_solve(const std::vector<std::vector<double>>& kmat,
                           const std::vector<double>& y, double c, double tol = 1e-3,
                           int max_passes = 10000) {
    return SmoSolver(kmat, y, c, tol, max_passes).solve();
}

}  // namespace detail

/// One binary machine of the one-vs-one ensemble; a positive decision value
/// votes for class_a (class_a < class_b).
struct BinaryMachine {
    int class_a = 0, class_b = 0;
    double bias = 0.0;
    std::vector<std::vector<double>> support_vectors;  // standardized feature space
    std::vector<double> coef;                          // alpha_i * y_i per support vector
};

struct SvmTrainConfig {
    KernelParams kernel{};
    double c = 10.0;
    int per_class = 7;
    SelectionRule selection{};
    double kkt_tolerance = 1e-3;
    int max_passes = 10000;
};

/// Trained multi-class kernel machine: one SMO-trained binary machine per
/// class pair, plus the z-scoring statistics of the training subset.
struct SvmModel {
    KernelParams kernel{};
    double c = 10.0;
    Method feature_method = Method::elm;
    int feature_order = 0;
    std::uint32_t dim = 0;
    Standardizer standardizer;
    std::vector<int> classes;
    std::vector<BinaryMachine> machines;
    // provenance
    int per_class_train = 0;
    std::string selection;
    std::vector<std::uint32_t> training_record_indices;

    double machine_decision(const BinaryMachine& m, std::span<const double> standardized) const {
        double u = 0.0;
        for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
            u += m.coef[i] * kernel_eval(kernel, m.support_vectors[i], standardized);
        return u - m.bias;
    }
};

/// Trains a one-vs-one SVM from k samples per class picked out of the
/// database (records grouped by class in database order).
inline SvmModel train_svm(const FeatureDatabase& db, const SvmTrainConfig& cfg) {
    db.validate();
    std::map<int, std::vector<std::uint32_t>> by_class;
    for (std::uint32_t i = 0; i < db.records.size(); ++i)
        by_class[db.records[i].class_label].push_back(i);
    if (by_class.size() < 2)
        throw Error("SVM training needs at least 2 classes, got " +
                    std::to_string(by_class.size()));

    SvmModel model;
    model.kernel = cfg.kernel;
    if (model.kernel.type == KernelType::rbf && model.kernel.gamma <= 0.0)
        model.kernel.gamma = 1.0 / static_cast<double>(db.dim);
    model.c = cfg.c;
    model.feature_method = db.method;
    model.feature_order = db.order;
    model.dim = db.dim;
    model.per_class_train = cfg.per_class;
    model.selection = cfg.selection.describe();

    // Pick training records per class, pool them for standardization.
    std::map<int, std::vector<std::uint32_t>> train_by_class;
    std::vector<std::vector<double>> pool;
    for (const auto& [label, indices] : by_class) {
        auto offsets = select_training_offsets(indices.size(), cfg.per_class, cfg.selection, label);
        for (std::size_t off : offsets) {
            train_by_class[label].push_back(indices[off]);
            model.training_record_indices.push_back(indices[off]);
        }
        model.classes.push_back(label);
    }
    for (std::uint32_t idx : model.training_record_indices)
        pool.push_back(db.records[idx].values);
    model.standardizer = Standardizer::fit(pool);

    std::map<int, std::vector<std::vector<double>>> z_by_class;
    for (const auto& [label, indices] : train_by_class)
        for (std::uint32_t idx : indices)
            z_by_class[label].push_back(model.standardizer.apply(db.records[idx].values));

    for (std::size_t ai = 0; ai < model.classes.size(); ++ai) {
        for (std::size_t bi = ai + 1; bi < model.classes.size(); ++bi) {
            const int a = model.classes[ai], b = model.classes[bi];
            std::vector<std::vector<double>> x;
            std::vector<double> y;
            for (const auto& v : z_by_class[a]) {
                x.push_back(v);
                y.push_back(1.0);
            }
            for (const auto& v : z_by_class[b]) {
                x.push_back(v);
                y.push_back(-1.0);
            }
            const std::size_t n = x.size();
            std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j)
                    kmat[i][j] = kmat[j][i] = kernel_eval(model.kernel, x[i], x[j]);
            auto result = detail::smo_solve(kmat, y, cfg.c, cfg.kkt_tolerance, cfg.max_passes);

            BinaryMachine machine;
            machine.class_a = a;
            machine.class_b = b;
            machine.bias = result.bias;
            for (std::size_t i = 0; i < n; ++i) {
                if (result.alpha[i] > 0.0) {
                    machine.support_vectors.push_back(x[i]);
                    machine.coef.push_back(result.alpha[i] * y[i]);
                }
            }
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

struct ClassifyResult {
    int label = 0;
    std::map<int, int> votes;
    std::map<int, double> confidence;  // summed |decision value| of won votes
};

/// One-vs-one majority vote; vote ties break on summed absolute decision
/// values, then on the smaller class index. A zero decision value votes for
/// the smaller class of the pair.
inline ClassifyResult classify(const SvmModel& model, std::span<const double> feature) {
    if (feature.size() != model.dim)
        throw Error("feature dimension " + std::to_string(feature.size()) +
                    " does not match model dimension " + std::to_string(model.dim));
    const auto z = model.standardizer.apply(feature);
    ClassifyResult result;
    for (int c : model.classes) {
        result.votes[c] = 0;
        result.confidence[c] = 0.0;
    }
    for (const auto& m : model.machines) {
        const double u = model.machine_decision(m, z);
        const int winner = u < 0.0 ? m.class_b : m.class_a;
        result.votes[winner] += 1;
        result.confidence[winner] += std::abs(u);
    }
    // Ascending label order keeps the smaller index on full ties.
    int best = model.classes.front();
    for (int c : model.classes) {
        if (result.votes[c] > result.votes[best] ||
            (result.votes[c] == result.votes[best] && result.confidence[c] > result.confidence[best]))
            best = c;
    }
    result.label = best;
    return result;
}

enum class EvalScope : std::uint8_t { all, heldout };

inline std::string to_string(EvalScope s) { return s == EvalScope::all ? "all" : "heldout"; }

inline EvalScope parse_eval_scope(const std::string& s) {
    if (s == "all") return EvalScope::all;
    if (s == "heldout") return EvalScope::heldout;
    throw Error("unknown eval scope '" + s + "' (expected all or heldout)");
}

struct ClassificationOutcome {
    double efficiency_pct = 0.0;
    std::size_t evaluated = 0;
    std::size_t correct = 0;
    SvmModel model;
};

/// Trains on k samples per class and classifies the database, returning the
/// percentage of correctly labeled images. Scope `all` includes the
/// training images themselves; `heldout` excludes them.
inline ClassificationOutcome classification_efficiency(const FeatureDatabase& db,
                                                       const SvmTrainConfig& cfg,
                                                       EvalScope scope = EvalScope::all,
                                                       unsigned jobs = 0) {
    ClassificationOutcome outcome;
    outcome.model = train_svm(db, cfg);
    std::vector<bool> is_train(db.records.size(), false);
    for (std::uint32_t idx : outcome.model.training_record_indices) is_train[idx] = true;

    std::vector<std::uint8_t> correct(db.records.size(), 0);
    std::vector<std::uint8_t> counted(db.records.size(), 0);
    detail::parallel_for(db.records.size(), jobs, [&](std::size_t i) {
        if (scope == EvalScope::heldout && is_train[i]) return;
        counted[i] = 1;
        const auto res = classify(outcome.model, db.records[i].values);
        correct[i] = res.label == db.records[i].class_label ? 1 : 0;
    });
    for (std::size_t i = 0; i < db.records.size(); ++i) {
        outcome.evaluated += counted[i];
        outcome.correct += correct[i];
    }
    if (outcome.evaluated == 0) throw Error("no images to evaluate under the heldout scope");
    outcome.efficiency_pct =
        100.0 * static_cast<double>(outcome.correct) / static_cast<double>(outcome.evaluated);
    return outcome;
}

inline nlohmann::json model_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["format"] = "momir-svm-model";
    j["version"] = 1;
    j["kernel"] = {{"type", to_string(model.kernel.type)}, {"gamma", model.kernel.gamma}};
    j["c"] = model.c;
    j["feature"] = {{"method", to_string(model.feature_method)},
                    {"order", model.feature_order},
                    {"dim", model.dim}};
    j["standardization"] = {{"mean", model.standardizer.mean},
                            {"stddev", model.standardizer.stddev}};
    j["classes"] = model.classes;
    j["training"] = {{"per_class", model.per_class_train},
                     {"selection", model.selection},
                     {"record_indices", model.training_record_indices}};
    nlohmann::json machines = nlohmann::json::array();
    for (const auto& m : model.machines)
        machines.push_back({{"a", m.class_a},
                            {"b", m.class_b},
                            {"bias", m.bias},
                            {"coef", m.coef},
                            {"support_vectors", m.support_vectors}});
    j["machines"] = std::move(machines);
    return j;
}

inline SvmModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "momir-svm-model") throw Error("not an SVM model JSON document");
    SvmModel model;
    model.kernel.type = parse_kernel_type(j.at("kernel").at("type").get<std::string>());
    model.kernel.gamma = j.at("kernel").at("gamma").get<double>();
    model.c = j.at("c").get<double>();
    model.feature_method = parse_method(j.at("feature").at("method").get<std::string>());
    model.feature_order = j.at("feature").at("order").get<int>();
    model.dim = j.at("feature").at("dim").get<std::uint32_t>();
    model.standardizer.mean = j.at("standardization").at("mean").get<std::vector<double>>();
    model.standardizer.stddev = j.at("standardization").at("stddev").get<std::vector<double>>();
    model.classes = j.at("classes").get<std::vector<int>>();
    model.per_class_train = j.at("training").at("per_class").get<int>();
    model.selection = j.at("training").at("selection").get<std::string>();
    model.training_record_indices =
        j.at("training").at("record_indices").get<std::vector<std::uint32_t>>();
    for (const auto& mj : j.at("machines")) {
        BinaryMachine m;
        m.class_a = mj.at("a").get<int>();
        m.class_b = mj.at("b").get<int>();
        m.bias = mj.at("bias").get<double>();
        m.coef = mj.at("coef").get<std::vector<double>>();
        m.support_vectors = mj.at("support_vectors").get<std::vector<std::vector<double>>>();
        model.machines.push_back(std::move(m));
    }
    return model;
}

inline void save_model_json(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << model_to_json(model).dump(2) << "\n";
    if (!out) throw Error("short write to " + path.string());
}

inline SvmModel load_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace momir
