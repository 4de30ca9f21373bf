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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "momir/dataset.hpp"
#include "momir/detail/binary_io.hpp"
#include "momir/detail/parallel.hpp"
#include "momir/extractor.hpp"
#include "momir/features.hpp"

namespace momir {

struct FeatureRecord {
    std::string id;
    int class_label = 0;
    std::vector<double> values;
};

/// Persisted collection of feature vectors sharing one method, order and
/// dimension. Immutable once built; queries are read-only.
struct FeatureDatabase {
    Method method = Method::elm;
    int order = 0;
    std::uint32_t dim = 0;
    std::vector<FeatureRecord> records;

    void validate() const {
        std::set<std::string> ids;
        for (const auto& r : records) {
            if (r.values.size() != dim)
                throw Error("record '" + r.id + "' has dimension " +
                            std::to_string(r.values.size()) + ", database declares " +
                            std::to_string(dim));
            if (!ids.insert(r.id).second) throw Error("duplicate record id '" + r.id + "'");
        }
    }
};

/// Extracts features for every image and assembles the database in image
/// order. Extraction is parallel per image.
inline FeatureDatabase build_database(const std::vector<GrayImage>& images, Method method,
                                      int order, unsigned jobs = 0) {
    FeatureDatabase db;
    db.method = method;
    db.order = method == Method::mi ? 0 : order;
    db.dim = static_cast<std::uint32_t>(feature_dim(method, order));
    db.records.resize(images.size());
    // Warm the kernel caches before the parallel section.
    if (!images.empty()) extract_features(images.front(), method, order);
    detail::parallel_for(images.size(), jobs, [&](std::size_t i) {
        db.records[i] = {images[i].id, images[i].class_label,
                         std::move(extract_features(images[i], method, order).values)};
    });
    db.validate();
    return db;
}

// Binary feature DB format, all integers little-endian:
//   magic "MOMF", version u16, method u8, order u16, dim u32, count u32,
//   per record: id length u16 + UTF-8 id, class u16, dim x f64,
//   trailing CRC32 over everything before it.
inline constexpr char kDbMagic[4] = {'M', 'O', 'M', 'F'};
inline constexpr std::uint16_t kDbVersion = 1;

inline std::vector<std::uint8_t> serialize_db(const FeatureDatabase& db) {
    db.validate();
    detail::ByteWriter w;
    w.bytes(kDbMagic, 4);
    w.u16(kDbVersion);
    w.u8(static_cast<std::uint8_t>(db.method));
    w.u16(static_cast<std::uint16_t>(db.order));
    w.u32(db.dim);
    w.u32(static_cast<std::uint32_t>(db.records.size()));
    for (const auto& r : db.records) {
        if (r.id.size() > 0xffff) throw Error("record id longer than 65535 bytes: " + r.id);
        if (r.class_label < 0 || r.class_label > 0xffff)
            throw Error("class label " + std::to_string(r.class_label) +
                        " does not fit the u16 field");
        w.u16(static_cast<std::uint16_t>(r.id.size()));
        w.bytes(r.id.data(), r.id.size());
        w.u16(static_cast<std::uint16_t>(r.class_label));
        for (double v : r.values) w.f64(v);
    }
    auto body = w.data();
    detail::ByteWriter trailer;
    trailer.u32(detail::crc32_of(body.data(), body.size()));
    body.insert(body.end(), trailer.data().begin(), trailer.data().end());
    return body;
}

inline FeatureDatabase deserialize_db(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 + 2 + 1 + 2 + 4 + 4 + 4) throw Error("feature DB file is truncated");
    const std::size_t body_size = bytes.size() - 4;
    detail::ByteReader crc_reader(bytes.data() + body_size, 4);
    const std::uint32_t stored_crc = crc_reader.u32();
    if (detail::crc32_of(bytes.data(), body_size) != stored_crc)
        throw Error("feature DB checksum mismatch (corrupt or truncated file)");

    detail::ByteReader r(bytes.data(), body_size);
    if (r.str(4) != std::string(kDbMagic, 4)) throw Error("not a feature DB file (bad magic)");
    const std::uint16_t version = r.u16();
    if (version != kDbVersion)
        throw Error("unsupported feature DB version " + std::to_string(version));

    FeatureDatabase db;
    const std::uint8_t method_tag = r.u8();
    if (method_tag < 1 || method_tag > 3) throw Error("bad method tag in feature DB");
    db.method = static_cast<Method>(method_tag);
    db.order = r.u16();
    db.dim = r.u32();
    const std::uint32_t count = r.u32();
    db.records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        FeatureRecord rec;
        rec.id = r.str(r.u16());
        rec.class_label = r.u16();
        rec.values.resize(db.dim);
        for (auto& v : rec.values) v = r.f64();
        db.records.push_back(std::move(rec));
    }
    if (r.remaining() != 0) throw Error("trailing bytes in feature DB");
    db.validate();
    return db;
}

inline void save_db(const FeatureDatabase& db, const std::filesystem::path& path) {
    auto bytes = serialize_db(db);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

inline FeatureDatabase load_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_db(bytes);
}

/// CRC32 of the serialized body, as stored in the file trailer. Used by
/// evaluation reports to pin the exact feature set they were computed from.
inline std::uint32_t db_checksum(const FeatureDatabase& db) {
    auto bytes = serialize_db(db);
    detail::ByteReader r(bytes.data() + bytes.size() - 4, 4);
    return r.u32();
}

inline nlohmann::json db_to_json(const FeatureDatabase& db) {
    db.validate();
    nlohmann::json j;
    j["format"] = "momir-feature-db";
    j["version"] = kDbVersion;
    j["method"] = to_string(db.method);
    j["order"] = db.order;
    j["dim"] = db.dim;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : db.records)
        records.push_back({{"id", r.id}, {"class", r.class_label}, {"values", r.values}});
    j["records"] = std::move(records);
    return j;
}

inline FeatureDatabase db_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "momir-feature-db") throw Error("not a feature DB JSON document");
    FeatureDatabase db;
    db.method = parse_method(j.at("method").get<std::string>());
    db.order = j.at("order").get<int>();
    db.dim = j.at("dim").get<std::uint32_t>();
    for (const auto& rj : j.at("records")) {
        FeatureRecord rec;
        rec.id = rj.at("id").get<std::string>();
        rec.class_label = rj.at("class").get<int>();
        rec.values = rj.at("values").get<std::vector<double>>();
        db.records.push_back(std::move(rec));
    }
    db.validate();
    return db;
}

inline void export_db_json(const FeatureDatabase& db, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << db_to_json(db).dump(2) << "\n";
    if (!out) throw Error("short write to " + path.string());
}

inline FeatureDatabase import_db_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return db_from_json(j);
}

}  // namespace momir
