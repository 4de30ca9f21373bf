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
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "momir/detail/parallel.hpp"
#include "momir/gray_image.hpp"

namespace momir {

struct ManifestEntry {
    std::filesystem::path path;
    std::string id;        // file stem, e.g. "obj3__45"
    int class_label = 0;   // zero-based
    int angle = 0;
};

/// Deterministic listing of a COIL-style dataset directory. Entries are
/// sorted by (class_label, angle), never by filesystem order.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int class_count = 0;
    int per_class_count = 0;  // uniform per-class image count; 0 if classes differ in size
    std::vector<std::string> warnings;
};

/// Scans a directory of files named obj<k>__<angle>.{pgm,png} with k >= 1.
/// class_label is k-1. In strict mode the directory must hold the full
/// COIL-20 layout (20 classes of 72 views); otherwise uneven class sizes
/// only produce warnings. Duplicate (class, angle) pairs and gaps in the
/// class numbering are always errors.
inline DatasetManifest scan_coil20(const std::filesystem::path& root, bool strict = false) {
    if (!std::filesystem::is_directory(root))
        throw Error("dataset directory not found: " + root.string());

    static const std::regex name_re(R"(obj([0-9]+)__([0-9]+)\.(pgm|png))",
                                    std::regex::icase);

    DatasetManifest manifest;
    std::set<std::pair<int, int>> seen;
    for (const auto& de : std::filesystem::directory_iterator(root)) {
        if (!de.is_regular_file()) continue;
        const std::string name = de.path().filename().string();
        std::smatch m;
        if (!std::regex_match(name, m, name_re)) continue;
        const int k = std::stoi(m[1]);
        const int angle = std::stoi(m[2]);
        if (k < 1) throw Error("bad object index in " + name);
        if (!seen.insert({k, angle}).second)
            throw Error("duplicate image for class " + std::to_string(k) + ", angle " +
                        std::to_string(angle) + " in " + root.string());
        manifest.entries.push_back({de.path(), de.path().stem().string(), k - 1, angle});
    }
    if (manifest.entries.empty())
        throw Error("no obj<k>__<angle>.{pgm,png} files found in " + root.string());

    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return std::tie(a.class_label, a.angle) < std::tie(b.class_label, b.angle);
              });

    std::map<int, int> counts;
    for (const auto& e : manifest.entries) counts[e.class_label]++;
    manifest.class_count = counts.rbegin()->first + 1;
    for (int c = 0; c < manifest.class_count; ++c)
        if (!counts.count(c))
            throw Error("missing class obj" + std::to_string(c + 1) + " in " + root.string());

    bool uniform = true;
    for (const auto& [c, n] : counts) {
        if (n != counts.begin()->second) uniform = false;
        if (n != 72) {
            std::string msg = "class obj" + std::to_string(c + 1) + " has " + std::to_string(n) +
                              " images (COIL-20 has 72)";
            if (strict) throw Error(msg);
            manifest.warnings.push_back(msg);
        }
    }
    manifest.per_class_count = uniform ? counts.begin()->second : 0;
    if (strict && manifest.class_count != 20)
        throw Error("expected 20 classes, found " + std::to_string(manifest.class_count) + " in " +
                    root.string());
    return manifest;
}

/// Loads every manifest entry, preserving manifest order. Images get the
/// manifest id and class label.
inline std::vector<GrayImage> load_dataset(const DatasetManifest& manifest, unsigned jobs = 0) {
    std::vector<GrayImage> images(manifest.entries.size());
    detail::parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        GrayImage img = load_image(e.path);
        img.id = e.id;
        img.class_label = e.class_label;
        images[i] = std::move(img);
    });
    return images;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : manifest.entries)
        arr.push_back({{"path", e.path.string()}, {"id", e.id}, {"class", e.class_label}});
    return arr;
}

inline void save_manifest_json(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << manifest_to_json(manifest).dump(2) << "\n";
}

}  // namespace momir
