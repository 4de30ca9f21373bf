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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momir/database.hpp"
#include "momir/dataset.hpp"
#include "momir/eval.hpp"
#include "momir/extractor.hpp"
#include "momir/retrieval.hpp"
#include "momir/svm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Accepts "4..9", "4,5,6" and mixtures like "2,4..6".
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const std::size_t dots = item.find("..");
        try {
            if (dots != std::string::npos) {
                const int lo = std::stoi(item.substr(0, dots));
                const int hi = std::stoi(item.substr(dots + 2));
                if (hi < lo) throw momir::Error("empty range '" + item + "'");
                for (int v = lo; v <= hi; ++v) out.push_back(v);
            } else if (!item.empty()) {
                out.push_back(std::stoi(item));
            }
        } catch (const std::invalid_argument&) {
            throw momir::Error("cannot parse integer list item '" + item + "'");
        }
        pos = comma + 1;
    }
    if (out.empty()) throw momir::Error("empty integer list '" + text + "'");
    return out;
}

std::vector<momir::Method> parse_method_list(const std::string& text) {
    std::vector<momir::Method> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(momir::parse_method(item));
        pos = comma + 1;
    }
    if (out.empty()) throw momir::Error("empty method list");
    return out;
}

double parse_gamma(const std::string& text) {
    if (text == "auto") return 0.0;  // resolved to 1/dim at training time
    const double g = std::stod(text);
    if (g <= 0.0) throw momir::Error("gamma must be positive or 'auto'");
    return g;
}

void print_config(const std::string& command, const json& resolved) {
    std::cerr << "momir " << command << " config: " << resolved.dump() << "\n";
}

// Removes this run's output files if the command does not finish.
class OutputGuard {
public:
    void track(const fs::path& p) { paths_.push_back(p); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

std::string format_distance(double d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", d);
    return buf;
}

struct ExtractArgs {
    std::string dataset, method = "elm", out, manifest_out;
    int order = 9;
    unsigned jobs = 0;
    bool strict = false;
};

int cmd_extract(const ExtractArgs& a) {
    const momir::Method method = momir::parse_method(a.method);
    print_config("extract", {{"dataset", a.dataset},
                             {"method", a.method},
                             {"order", a.order},
                             {"out", a.out},
                             {"manifest_out", a.manifest_out},
                             {"jobs", a.jobs},
                             {"strict", a.strict}});
    if (method == momir::Method::mi && a.order != 0)
        std::cerr << "momir: warning: method 'mi' ignores --order (dimension is always 7)\n";

    auto manifest = momir::scan_coil20(a.dataset, a.strict);
    for (const auto& w : manifest.warnings) std::cerr << "momir: warning: " << w << "\n";
    auto images = momir::load_dataset(manifest, a.jobs);
    auto db = momir::build_database(images, method, a.order, a.jobs);

    OutputGuard guard;
    guard.track(a.out);
    if (!a.manifest_out.empty()) {
        guard.track(a.manifest_out);
        momir::save_manifest_json(manifest, a.manifest_out);
    }
    momir::save_db(db, a.out);
    guard.commit();
    std::cout << "wrote " << a.out << ": " << db.records.size() << " records of dimension "
              << db.dim << " (" << momir::to_string(db.method) << ", order " << db.order << ")\n";
    return 0;
}

struct QueryArgs {
    std::string db, image, method, format = "text";
    std::size_t top_n = 10;
};

int cmd_query(const QueryArgs& a) {
    print_config("query", {{"db", a.db},
                           {"image", a.image},
                           {"top_n", a.top_n},
                           {"format", a.format}});
    auto db = momir::load_db(a.db);
    if (!a.method.empty() && momir::parse_method(a.method) != db.method)
        throw momir::Error("requested method '" + a.method + "' does not match database method '" +
                           momir::to_string(db.method) + "'");
    auto img = momir::load_image(a.image);
    auto fv = momir::extract_features(img, db.method, db.order);
    auto hits = momir::query(db, fv, a.top_n);

    if (a.format == "json") {
        json out = json::array();
        for (std::size_t i = 0; i < hits.size(); ++i)
            out.push_back({{"rank", i + 1},
                           {"id", hits[i].id},
                           {"class", hits[i].class_label},
                           {"distance", hits[i].distance}});
        std::cout << out.dump(2) << "\n";
    } else if (a.format == "csv") {
        std::cout << "rank,id,class,distance\n";
        for (std::size_t i = 0; i < hits.size(); ++i)
            std::cout << (i + 1) << "," << hits[i].id << "," << hits[i].class_label << ","
                      << format_distance(hits[i].distance) << "\n";
    } else {
        std::cout << "rank\tid\tclass\tdistance\n";
        for (std::size_t i = 0; i < hits.size(); ++i)
            std::cout << (i + 1) << "\t" << hits[i].id << "\t" << hits[i].class_label << "\t"
                      << format_distance(hits[i].distance) << "\n";
    }
    return 0;
}

struct TrainArgs {
    std::string db, out, kernel = "rbf", gamma = "auto", select = "even";
    int k = 7;
    double c = 10.0;
};

int cmd_train_svm(const TrainArgs& a) {
    print_config("train-svm", {{"db", a.db},
                               {"k", a.k},
                               {"c", a.c},
                               {"kernel", a.kernel},
                               {"gamma", a.gamma},
                               {"select", a.select},
                               {"out", a.out}});
    auto db = momir::load_db(a.db);
    momir::SvmTrainConfig cfg;
    cfg.kernel.type = momir::parse_kernel_type(a.kernel);
    cfg.kernel.gamma = parse_gamma(a.gamma);
    cfg.c = a.c;
    cfg.per_class = a.k;
    cfg.selection = momir::SelectionRule::parse(a.select);
    auto model = momir::train_svm(db, cfg);

    OutputGuard guard;
    guard.track(a.out);
    momir::save_model_json(model, a.out);
    guard.commit();
    std::size_t sv_total = 0;
    for (const auto& m : model.machines) sv_total += m.support_vectors.size();
    std::cout << "wrote " << a.out << ": " << model.classes.size() << " classes, "
              << model.machines.size() << " pairwise machines, " << sv_total
              << " support vectors\n";
    return 0;
}

struct ClassifyArgs {
    std::string model, db, format = "text", eval_scope = "all";
    std::vector<std::string> images;
};

int cmd_classify(const ClassifyArgs& a) {
    print_config("classify", {{"model", a.model},
                              {"images", a.images},
                              {"db", a.db},
                              {"eval_scope", a.eval_scope},
                              {"format", a.format}});
    auto model = momir::load_model_json(a.model);
    json results = json::array();

    for (const auto& path : a.images) {
        auto img = momir::load_image(path);
        auto fv = momir::extract_features(img, model.feature_method, model.feature_order);
        auto res = momir::classify(model, fv.values);
        results.push_back({{"id", img.id},
                           {"predicted_class", res.label},
                           {"votes", res.votes[res.label]}});
    }

    if (!a.db.empty()) {
        auto db = momir::load_db(a.db);
        if (db.method != model.feature_method)
            throw momir::Error("database method '" + momir::to_string(db.method) +
                               "' does not match model feature method '" +
                               momir::to_string(model.feature_method) + "'");
        if (db.dim != model.dim)
            throw momir::Error("database dimension " + std::to_string(db.dim) +
                               " does not match model dimension " + std::to_string(model.dim));
        const auto scope = momir::parse_eval_scope(a.eval_scope);
        std::vector<bool> is_train(db.records.size(), false);
        for (auto idx : model.training_record_indices)
            if (idx < is_train.size()) is_train[idx] = true;
        std::size_t evaluated = 0, correct = 0;
        for (std::size_t i = 0; i < db.records.size(); ++i) {
            if (scope == momir::EvalScope::heldout && is_train[i]) continue;
            auto res = momir::classify(model, db.records[i].values);
            ++evaluated;
            if (res.label == db.records[i].class_label) ++correct;
            results.push_back({{"id", db.records[i].id},
                               {"true_class", db.records[i].class_label},
                               {"predicted_class", res.label}});
        }
        const double pct = evaluated ? 100.0 * correct / static_cast<double>(evaluated) : 0.0;
        if (a.format == "json") {
            std::cout << json({{"results", results},
                               {"evaluated", evaluated},
                               {"correct", correct},
                               {"accuracy_pct", pct}})
                             .dump(2)
                      << "\n";
        } else if (a.format == "csv") {
            std::cout << "id,true_class,predicted_class\n";
            for (const auto& r : results)
                if (r.contains("true_class"))
                    std::cout << r["id"].get<std::string>() << "," << r["true_class"] << ","
                              << r["predicted_class"] << "\n";
            std::fprintf(stderr, "accuracy: %zu/%zu = %.2f%%\n", correct, evaluated, pct);
        } else {
            for (const auto& r : results)
                if (r.contains("true_class"))
                    std::cout << r["id"].get<std::string>() << "\t" << r["true_class"] << "\t"
                              << r["predicted_class"] << "\n";
            std::printf("accuracy: %zu/%zu = %.2f%%\n", correct, evaluated, pct);
        }
        return 0;
    }

    if (a.format == "json") {
        std::cout << results.dump(2) << "\n";
    } else if (a.format == "csv") {
        std::cout << "id,predicted_class\n";
        for (const auto& r : results)
            std::cout << r["id"].get<std::string>() << "," << r["predicted_class"] << "\n";
    } else {
        for (const auto& r : results)
            std::cout << r["id"].get<std::string>() << "\t" << r["predicted_class"] << "\n";
    }
    return 0;
}

struct EvalArgs {
    std::string dataset, suite = "all", methods = "mi,zm,elm", orders = "4..9", k = "4,5,6,7";
    std::string kernel = "rbf", gamma = "auto", select = "even", eval_scope = "all";
    std::string out_dir = "reports", dataset_variant;
    std::size_t top_n = 72;
    bool exclude_self = false;
    int order = 9;
    double c = 10.0;
    unsigned jobs = 0;
    int timing_reps = 20;
    bool strict = false;
};

int cmd_eval(const EvalArgs& a) {
    momir::EvalConfig cfg;
    cfg.dataset_dir = a.dataset;
    cfg.methods = parse_method_list(a.methods);
    cfg.orders = parse_int_list(a.orders);
    cfg.top_n = a.top_n;
    cfg.exclude_self = a.exclude_self;
    cfg.classify_order = a.order;
    cfg.k_values = parse_int_list(a.k);
    cfg.kernel.type = momir::parse_kernel_type(a.kernel);
    cfg.kernel.gamma = parse_gamma(a.gamma);
    cfg.c = a.c;
    cfg.selection = momir::SelectionRule::parse(a.select);
    cfg.scope = momir::parse_eval_scope(a.eval_scope);
    cfg.jobs = a.jobs;
    cfg.timing_order = a.order;
    cfg.timing_reps = a.timing_reps;
    cfg.strict_dataset = a.strict;
    if (!a.dataset_variant.empty()) cfg.dataset_variant = a.dataset_variant;
    print_config("eval", {{"suite", a.suite}, {"out_dir", a.out_dir}, {"resolved", cfg.to_json()}});

    const bool run_retrieval = a.suite == "retrieval" || a.suite == "all";
    const bool run_classify = a.suite == "classify" || a.suite == "all";
    const bool run_timing = a.suite == "timing" || a.suite == "all";
    if (!run_retrieval && !run_classify && !run_timing)
        throw momir::Error("unknown suite '" + a.suite +
                           "' (expected retrieval, classify, timing, or all)");

    momir::EvalHarness harness(cfg);
    for (const auto& w : harness.manifest().warnings) std::cerr << "momir: warning: " << w << "\n";
    if (run_retrieval) harness.run_retrieval();
    if (run_classify) harness.run_classification();
    if (run_timing) harness.run_timing();

    OutputGuard guard;
    for (const char* name : {"eval_report.json", "retrieval.csv", "classification.csv", "timing.csv"})
        guard.track(fs::path(a.out_dir) / name);
    auto written = harness.write_reports(a.out_dir);
    guard.commit();
    for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
    return 0;
}

struct DbInfoArgs {
    std::string db, format = "text", export_json;
};

int cmd_db_info(const DbInfoArgs& a) {
    print_config("db-info", {{"db", a.db}, {"format", a.format}, {"export_json", a.export_json}});
    auto db = momir::load_db(a.db);
    std::map<int, std::size_t> class_counts;
    for (const auto& r : db.records) class_counts[r.class_label]++;
    if (!a.export_json.empty()) {
        OutputGuard guard;
        guard.track(a.export_json);
        momir::export_db_json(db, a.export_json);
        guard.commit();
        std::cout << "wrote " << a.export_json << "\n";
    }
    if (a.format == "json") {
        json counts = json::object();
        for (const auto& [c, n] : class_counts) counts[std::to_string(c)] = n;
        std::cout << json({{"method", momir::to_string(db.method)},
                           {"order", db.order},
                           {"dim", db.dim},
                           {"records", db.records.size()},
                           {"classes", class_counts.size()},
                           {"class_counts", counts},
                           {"crc32", momir::db_checksum(db)}})
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "method:  " << momir::to_string(db.method) << "\n"
                  << "order:   " << db.order << "\n"
                  << "dim:     " << db.dim << "\n"
                  << "records: " << db.records.size() << "\n"
                  << "classes: " << class_counts.size() << "\n"
                  << "crc32:   " << momir::db_checksum(db) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"momir: image-moment shape features, Canberra-distance retrieval and SVM "
                 "classification"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --config appear after the subcommand name
    app.set_config("--config", "", "TOML/INI config file; explicit flags take precedence");

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "Extract a feature database from a dataset");
    extract->add_option("--dataset", extract_args.dataset, "Dataset directory (obj<k>__<angle>.*)")
        ->required();
    extract->add_option("--method", extract_args.method, "Feature method: elm, zm, or mi");
    extract->add_option("--order", extract_args.order, "Total moment order");
    extract->add_option("--out", extract_args.out, "Output .momf path")->required();
    extract->add_option("--manifest-out", extract_args.manifest_out,
                        "Also write the dataset manifest as a JSON array");
    extract->add_option("--jobs", extract_args.jobs, "Worker threads (0 = logical cores)");
    extract->add_flag("--strict", extract_args.strict, "Require the full 20x72 COIL-20 layout");

    QueryArgs query_args;
    auto* query = app.add_subcommand("query", "Rank database images against a query image");
    query->add_option("--db", query_args.db, "Feature database path")->required();
    query->add_option("--image", query_args.image, "Query image (pgm/png)")->required();
    query->add_option("--top-n", query_args.top_n, "Number of hits to return");
    query->add_option("--method", query_args.method,
                      "Expected feature method; errors if the DB differs");
    query->add_option("--format", query_args.format, "Output format: text, csv or json");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train-svm", "Train a one-vs-one kernel SVM on a feature DB");
    train->add_option("--db", train_args.db, "Feature database path")->required();
    train->add_option("--k", train_args.k, "Training samples per class");
    train->add_option("--c", train_args.c, "Soft-margin C");
    train->add_option("--kernel", train_args.kernel, "Kernel: rbf or linear");
    train->add_option("--gamma", train_args.gamma, "RBF gamma or 'auto' (1/dim)");
    train->add_option("--select", train_args.select,
                      "Training-sample selection: even, first, or random:<seed>");
    train->add_option("--out", train_args.out, "Output model JSON path")->required();

    ClassifyArgs classify_args;
    auto* classify = app.add_subcommand("classify", "Classify images or a feature DB with a model");
    classify->add_option("--model", classify_args.model, "Model JSON path")->required();
    classify->add_option("--image", classify_args.images, "Image(s) to classify");
    classify->add_option("--db", classify_args.db, "Feature DB to classify in bulk");
    classify->add_option("--eval-scope", classify_args.eval_scope,
                         "With --db: evaluate 'all' records or 'heldout' only");
    classify->add_option("--format", classify_args.format, "Output format: text, csv or json");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Run the retrieval/classification/timing benchmarks");
    eval->add_option("--dataset", eval_args.dataset, "Dataset directory")->required();
    eval->add_option("--suite", eval_args.suite, "Suite: retrieval, classify, timing, or all");
    eval->add_option("--methods,--method", eval_args.methods, "Comma list of methods");
    eval->add_option("--orders", eval_args.orders, "Orders, e.g. 4..9 or 4,6,8");
    eval->add_option("--order", eval_args.order, "Feature order for classification and timing");
    eval->add_option("--top-n", eval_args.top_n, "Retrieved set size per query");
    eval->add_flag("--exclude-self", eval_args.exclude_self,
                   "Drop the query from its own candidate set");
    eval->add_option("--k", eval_args.k, "Training samples per class, e.g. 4,5,6,7");
    eval->add_option("--c", eval_args.c, "Soft-margin C");
    eval->add_option("--kernel", eval_args.kernel, "Kernel: rbf or linear");
    eval->add_option("--gamma", eval_args.gamma, "RBF gamma or 'auto'");
    eval->add_option("--select", eval_args.select, "Training-sample selection rule");
    eval->add_option("--eval-scope", eval_args.eval_scope, "Classification scope: all or heldout");
    eval->add_option("--jobs", eval_args.jobs, "Worker threads (0 = logical cores)");
    eval->add_option("--timing-reps", eval_args.timing_reps, "Timing repetitions (>= 20 advised)");
    eval->add_option("--out-dir", eval_args.out_dir, "Report output directory");
    eval->add_option("--dataset-variant", eval_args.dataset_variant,
                     "Dataset variant note recorded in reports");
    eval->add_flag("--strict", eval_args.strict, "Require the full 20x72 COIL-20 layout");

    DbInfoArgs db_info_args;
    auto* db_info = app.add_subcommand("db-info", "Print feature database metadata");
    db_info->add_option("--db", db_info_args.db, "Feature database path")->required();
    db_info->add_option("--format", db_info_args.format, "Output format: text or json");
    db_info->add_option("--export-json", db_info_args.export_json,
                        "Also mirror the full database to a JSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_extract(extract_args);
        if (query->parsed()) return cmd_query(query_args);
        if (train->parsed()) return cmd_train_svm(train_args);
        if (classify->parsed()) return cmd_classify(classify_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (db_info->parsed()) return cmd_db_info(db_info_args);
    } catch (const std::exception& e) {
        std::cerr << "momir: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
