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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "momir/eval.hpp"
#include "momir/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDataset {
    fs::path root;
    explicit TempDataset(const std::string& tag, const momir::SyntheticSpec& spec,
                         bool levels = false) {
        root = fs::temp_directory_path() / ("momir_eval_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(root);
        if (levels)
            momir::write_levels_dataset(root, spec);
        else
            momir::write_synthetic_dataset(root, spec);
    }
    ~TempDataset() { fs::remove_all(root); }
};

momir::EvalConfig small_config(const fs::path& dataset) {
    momir::EvalConfig cfg;
    cfg.dataset_dir = dataset;
    cfg.orders = {2, 3};
    cfg.top_n = 8;
    cfg.classify_order = 3;
    cfg.k_values = {2, 3};
    cfg.timing_order = 3;
    cfg.timing_reps = 5;
    cfg.jobs = 2;
    return cfg;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

}  // namespace

TEST_CASE("retrieval benchmark emits one row per method and order", "[eval]") {
    momir::SyntheticSpec spec{4, 8, 32};
    TempDataset data("retrieval", spec);
    momir::EvalHarness harness(small_config(data.root));
    const auto& rows = harness.run_retrieval();
    REQUIRE(rows.size() == 6);  // 3 methods x 2 orders

    for (const auto& r : rows) {
        REQUIRE(r.overall_pct >= 0.0);
        REQUIRE(r.overall_pct <= 100.0);
        REQUIRE(r.per_class_pct.size() == 4);
        REQUIRE(r.dim == momir::feature_dim(r.method, r.order));
    }
    // MI ignores the order, so its rows are identical.
    const auto* mi2 = &rows[0];
    const auto* mi3 = &rows[1];
    REQUIRE(mi2->method == momir::Method::mi);
    REQUIRE(mi2->overall_pct == mi3->overall_pct);
    REQUIRE(mi2->db_crc32 == mi3->db_crc32);
}

TEST_CASE("benchmark results are deterministic across harnesses", "[eval]") {
    momir::SyntheticSpec spec{3, 6, 32};
    TempDataset data("determinism", spec);
    auto cfg = small_config(data.root);
    cfg.top_n = 6;

    momir::EvalHarness h1(cfg), h2(cfg);
    auto r1 = h1.run_retrieval();
    auto r2 = h2.run_retrieval();
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        REQUIRE(r1[i].overall_pct == r2[i].overall_pct);
        REQUIRE(r1[i].db_crc32 == r2[i].db_crc32);
    }
    auto c1 = h1.run_classification();
    auto c2 = h2.run_classification();
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i)
        REQUIRE(c1[i].efficiency_pct == c2[i].efficiency_pct);
}

TEST_CASE("perfectly separable dataset scores 100 everywhere", "[eval]") {
    momir::SyntheticSpec spec{3, 6, 24};
    TempDataset data("levels", spec, /*levels=*/true);
    auto cfg = small_config(data.root);
    cfg.top_n = 6;  // class size
    momir::EvalHarness harness(cfg);
    for (const auto& r : harness.run_retrieval()) REQUIRE(r.overall_pct == 100.0);
    for (const auto& r : harness.run_classification()) REQUIRE(r.efficiency_pct == 100.0);
}

TEST_CASE("classification benchmark row structure", "[eval]") {
    momir::SyntheticSpec spec{3, 8, 32};
    TempDataset data("classify", spec);
    momir::EvalHarness harness(small_config(data.root));
    const auto& rows = harness.run_classification();
    REQUIRE(rows.size() == 6);  // 3 methods x 2 k values
    for (const auto& r : rows) {
        REQUIRE(r.efficiency_pct >= 0.0);
        REQUIRE(r.efficiency_pct <= 100.0);
        REQUIRE(r.evaluated == 24);
        REQUIRE((r.k == 2 || r.k == 3));
    }
}

TEST_CASE("timing benchmark reports finite means and deviations", "[eval]") {
    momir::SyntheticSpec spec{2, 6, 32};
    TempDataset data("timing", spec);
    momir::EvalHarness harness(small_config(data.root));
    const auto& rows = harness.run_timing();
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        REQUIRE(r.reps == 5);
        REQUIRE(r.mean_query_s > 0.0);
        REQUIRE(std::isfinite(r.stddev_query_s));
        REQUIRE(r.stddev_query_s >= 0.0);
        REQUIRE(r.mean_extract_s > 0.0);
        REQUIRE(r.mean_scan_s >= 0.0);
    }
}

TEST_CASE("report JSON embeds config and database checksums", "[eval]") {
    momir::SyntheticSpec spec{3, 6, 32};
    TempDataset data("report", spec);
    auto cfg = small_config(data.root);
    momir::EvalHarness harness(cfg);
    harness.run_retrieval();
    auto j = harness.report();

    REQUIRE(j.contains("config"));
    REQUIRE(j.at("config").at("top_n") == 8);
    REQUIRE(j.contains("timestamp_utc"));
    REQUIRE(j.at("dataset").at("images") == 18);
    REQUIRE(j.contains("retrieval"));
    for (const auto& row : j.at("retrieval")) {
        REQUIRE(row.contains("db_crc32"));
        const auto method = momir::parse_method(row.at("method").get<std::string>());
        const int order = row.at("order").get<int>();
        // Every reported number is re-derivable from the persisted features.
        REQUIRE(row.at("db_crc32").get<std::uint32_t>() ==
                momir::db_checksum(harness.database(method, order)));
    }
}

TEST_CASE("write_reports produces the JSON report and per-table CSVs", "[eval]") {
    momir::SyntheticSpec spec{3, 6, 32};
    TempDataset data("csv", spec);
    momir::EvalHarness harness(small_config(data.root));
    harness.run_retrieval();
    harness.run_classification();
    harness.run_timing();

    const fs::path out = fs::temp_directory_path() / ("momir_reports_" + std::to_string(::getpid()));
    fs::remove_all(out);
    auto written = harness.write_reports(out);
    REQUIRE(written.size() == 4);
    REQUIRE(fs::exists(out / "eval_report.json"));
    REQUIRE(count_lines(out / "retrieval.csv") == 1 + 6);
    REQUIRE(count_lines(out / "classification.csv") == 1 + 6);
    REQUIRE(count_lines(out / "timing.csv") == 1 + 3);

    std::ifstream csv(out / "retrieval.csv");
    std::string header;
    std::getline(csv, header);
    REQUIRE(header == "method,order,avg_retrieval_efficiency_pct");
    std::ifstream ccsv(out / "classification.csv");
    std::getline(ccsv, header);
    REQUIRE(header == "method,k_train,classification_efficiency_pct");
    fs::remove_all(out);
}

TEST_CASE("single-class dataset fails classification with context", "[eval]") {
    momir::SyntheticSpec spec{1, 6, 24};
    TempDataset data("oneclass", spec);
    auto cfg = small_config(data.root);
    cfg.k_values = {2};
    momir::EvalHarness harness(cfg);
    CHECK_THROWS_AS(harness.run_classification(), momir::Error);
    // Retrieval still works on one class.
    cfg.top_n = 3;
    for (const auto& r : harness.run_retrieval()) REQUIRE(r.overall_pct > 0.0);
}
