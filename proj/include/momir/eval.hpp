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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "momir/database.hpp"
#include "momir/dataset.hpp"
#include "momir/extractor.hpp"
#include "momir/retrieval.hpp"
#include "momir/svm.hpp"

namespace momir {

struct EvalConfig {
    std::filesystem::path dataset_dir;
    std::string dataset_variant = "processed 128x128 (assumed)";
    std::vector<Method> methods{Method::mi, Method::zm, Method::elm};
    std::vector<int> orders{4, 5, 6, 7, 8, 9};
    std::size_t top_n = 72;
    bool exclude_self = false;
    int classify_order = 9;
    std::vector<int> k_values{4, 5, 6, 7};
    KernelParams kernel{};  // gamma <= 0 resolves to 1/dim at training time
    double c = 10.0;
    SelectionRule selection{};
    EvalScope scope = EvalScope::all;
    unsigned jobs = 0;
    int timing_order = 9;
    int timing_reps = 20;
    bool strict_dataset = false;

    nlohmann::json to_json() const {
        nlohmann::json methods_json = nlohmann::json::array();
        for (Method m : methods) methods_json.push_back(to_string(m));
        return {{"dataset", dataset_dir.string()},
                {"dataset_variant", dataset_variant},
                {"methods", methods_json},
                {"orders", orders},
                {"top_n", top_n},
                {"exclude_self", exclude_self},
                {"classify_order", classify_order},
                {"k_values", k_values},
                {"svm",
                 {{"kernel", to_string(kernel.type)},
                  {"gamma", kernel.gamma <= 0.0 ? nlohmann::json("auto") : nlohmann::json(kernel.gamma)},
                  {"c", c},
                  {"selection", selection.describe()},
                  {"eval_scope", to_string(scope)}}},
                {"jobs", jobs},
                {"timing", {{"order", timing_order}, {"reps", timing_reps}}}};
    }
};

struct RetrievalRow {
    Method method;
    int order;
    int dim;
    double overall_pct;
    std::vector<double> per_class_pct;
    std::uint32_t db_crc32;
};

struct ClassificationRow {
    Method method;
    int order;
    int k;
    double efficiency_pct;
    std::size_t evaluated;
    std::size_t correct;
};

struct TimingRow {
    Method method;
    int order;
    int reps;
    double mean_query_s;
    double stddev_query_s;
    double mean_extract_s;
    double mean_scan_s;
};

/// End-to-end experiment driver over one dataset: builds feature databases
/// once per (method, order), runs the retrieval / classification / timing
/// benchmarks, and renders JSON + CSV reports.
class EvalHarness {
public:
    explicit EvalHarness(EvalConfig cfg)
        : cfg_(std::move(cfg)), manifest_(scan_coil20(cfg_.dataset_dir, cfg_.strict_dataset)) {
        images_ = load_dataset(manifest_, cfg_.jobs);
    }

    const EvalConfig& config() const { return cfg_; }
    const DatasetManifest& manifest() const { return manifest_; }
    const std::vector<GrayImage>& images() const { return images_; }

    /// Feature DB for (method, order), built on first use. MI features do
    /// not depend on the order, so they collapse onto a single database.
    const FeatureDatabase& database(Method method, int order) {
        const int key_order = method == Method::mi ? 0 : order;
        auto key = std::make_pair(method, key_order);
        auto it = db_cache_.find(key);
        if (it == db_cache_.end())
            it = db_cache_.emplace(key, build_database(images_, method, key_order, cfg_.jobs)).first;
        return it->second;
    }

    const std::vector<RetrievalRow>& run_retrieval() {
        retrieval_rows_.clear();
        for (Method method : cfg_.methods) {
            for (int order : cfg_.orders) {
                const auto& db = database(method, order);
                auto eff = retrieval_efficiency(db, cfg_.top_n, !cfg_.exclude_self, cfg_.jobs);
                retrieval_rows_.push_back({method, order, static_cast<int>(db.dim), eff.overall,
                                           eff.per_class, db_checksum(db)});
            }
        }
        return retrieval_rows_;
    }

    const std::vector<ClassificationRow>& run_classification() {
        classification_rows_.clear();
        for (Method method : cfg_.methods) {
            const auto& db = database(method, cfg_.classify_order);
            for (int k : cfg_.k_values) {
                SvmTrainConfig train_cfg;
                train_cfg.kernel = cfg_.kernel;
                train_cfg.c = cfg_.c;
                train_cfg.per_class = k;
                train_cfg.selection = cfg_.selection;
                auto outcome = classification_efficiency(db, train_cfg, cfg_.scope, cfg_.jobs);
                classification_rows_.push_back({method, db.order, k, outcome.efficiency_pct,
                                                outcome.evaluated, outcome.correct});
            }
        }
        return classification_rows_;
    }

    /// Wall-clock per-query time: feature extraction of the query image plus
    /// a full database scan and sort. Runs single-threaded for stable
    /// numbers; extraction caches are warmed beforehand.
    const std::vector<TimingRow>& run_timing() {
        timing_rows_.clear();
        const int reps = std::max(1, cfg_.timing_reps);
        for (Method method : cfg_.methods) {
            const auto& db = database(method, cfg_.timing_order);
            extract_features(images_.front(), method, cfg_.timing_order);  // warm caches
            std::vector<double> total_s, extract_s, scan_s;
            for (int rep = 0; rep < reps; ++rep) {
                const auto& img = images_[(rep * images_.size()) / reps];
                const auto t0 = std::chrono::steady_clock::now();
                auto fv = extract_features(img, method, cfg_.timing_order);
                const auto t1 = std::chrono::steady_clock::now();
                auto hits = query(db, fv, cfg_.top_n);
                const auto t2 = std::chrono::steady_clock::now();
                if (hits.empty()) throw Error("timing query returned no hits");
                extract_s.push_back(std::chrono::duration<double>(t1 - t0).count());
                scan_s.push_back(std::chrono::duration<double>(t2 - t1).count());
                total_s.push_back(std::chrono::duration<double>(t2 - t0).count());
            }
            auto mean = [](const std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            const double m = mean(total_s);
            double var = 0.0;
            for (double x : total_s) var += (x - m) * (x - m);
            var /= static_cast<double>(total_s.size());
            timing_rows_.push_back({method, cfg_.timing_order, reps, m, std::sqrt(var),
                                    mean(extract_s), mean(scan_s)});
        }
        return timing_rows_;
    }

    nlohmann::json report() const {
        nlohmann::json j;
        j["config"] = cfg_.to_json();
        j["dataset"] = {{"images", images_.size()},
                        {"classes", manifest_.class_count},
                        {"per_class", manifest_.per_class_count}};
        j["timestamp_utc"] = utc_now();
        if (!retrieval_rows_.empty()) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : retrieval_rows_)
                rows.push_back({{"method", to_string(r.method)},
                                {"order", r.order},
                                {"dim", r.dim},
                                {"avg_retrieval_efficiency_pct", r.overall_pct},
                                {"per_class_pct", r.per_class_pct},
                                {"db_crc32", r.db_crc32}});
            j["retrieval"] = std::move(rows);
        }
        if (!classification_rows_.empty()) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : classification_rows_)
                rows.push_back({{"method", to_string(r.method)},
                                {"order", r.order},
                                {"k_train", r.k},
                                {"classification_efficiency_pct", r.efficiency_pct},
                                {"evaluated", r.evaluated},
                                {"correct", r.correct}});
            j["classification"] = std::move(rows);
        }
        if (!timing_rows_.empty()) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : timing_rows_)
                rows.push_back({{"method", to_string(r.method)},
                                {"order", r.order},
                                {"reps", r.reps},
                                {"mean_query_seconds", r.mean_query_s},
                                {"stddev_query_seconds", r.stddev_query_s},
                                {"mean_extract_seconds", r.mean_extract_s},
                                {"mean_scan_seconds", r.mean_scan_s}});
            j["timing"] = std::move(rows);
        }
        return j;
    }

    /// Writes eval_report.json plus one CSV per benchmark that ran. Returns
    /// every path written so callers can clean up on failure.
    std::vector<std::filesystem::path> write_reports(const std::filesystem::path& out_dir) const {
        std::filesystem::create_directories(out_dir);
        std::vector<std::filesystem::path> written;

        auto open = [&written](const std::filesystem::path& p) {
            std::ofstream out(p);
            if (!out) throw Error("cannot write " + p.string());
            written.push_back(p);
            return out;
        };

        {
            auto out = open(out_dir / "eval_report.json");
            out << report().dump(2) << "\n";
            if (!out) throw Error("short write to report JSON");
        }
        if (!retrieval_rows_.empty()) {
            auto out = open(out_dir / "retrieval.csv");
            out << "method,order,avg_retrieval_efficiency_pct\n";
            for (const auto& r : retrieval_rows_)
                out << to_string(r.method) << "," << r.order << "," << format_num(r.overall_pct)
                    << "\n";
        }
        if (!classification_rows_.empty()) {
            auto out = open(out_dir / "classification.csv");
            out << "method,k_train,classification_efficiency_pct\n";
            for (const auto& r : classification_rows_)
                out << to_string(r.method) << "," << r.k << "," << format_num(r.efficiency_pct)
                    << "\n";
        }
        if (!timing_rows_.empty()) {
            auto out = open(out_dir / "timing.csv");
            out << "method,order,mean_query_seconds,stddev_query_seconds,mean_extract_seconds,"
                   "mean_scan_seconds,reps\n";
            for (const auto& r : timing_rows_)
                out << to_string(r.method) << "," << r.order << "," << format_num(r.mean_query_s)
                    << "," << format_num(r.stddev_query_s) << "," << format_num(r.mean_extract_s)
                    << "," << format_num(r.mean_scan_s) << "," << r.reps << "\n";
        }
        return written;
    }

    const std::vector<RetrievalRow>& retrieval_rows() const { return retrieval_rows_; }
    const std::vector<ClassificationRow>& classification_rows() const {
        return classification_rows_;
    }
    const std::vector<TimingRow>& timing_rows() const { return timing_rows_; }

private:
    static std::string format_num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    }

    static std::string utc_now() {
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    EvalConfig cfg_;
    DatasetManifest manifest_;
    std::vector<GrayImage> images_;
    std::map<std::pair<Method, int>, FeatureDatabase> db_cache_;
    std::vector<RetrievalRow> retrieval_rows_;
    std::vector<ClassificationRow> classification_rows_;
    std::vector<TimingRow> timing_rows_;
};

}  // namespace momir
