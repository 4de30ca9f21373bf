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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "momir/gray_image.hpp"

namespace momir {

/// Parameters of the procedural COIL-style dataset used by demos, tests and
/// benchmarks: `classes` parametric objects, each seen at `per_class`
/// in-plane rotations.
struct SyntheticSpec {
    int classes = 20;
    int per_class = 72;
    int side = 128;
};

/// Deterministic star-shaped object for one (class, view). Views of a class
/// are exact in-plane rotations of the same intensity pattern, so labeled
/// structure mimics a turntable dataset.
inline GrayImage synthetic_object_view(int class_label, int view, const SyntheticSpec& spec) {
    const int k = class_label;
    const int lobes = 3 + k % 7;
    const double amp = 0.10 + 0.02 * ((k / 7) % 3);
    const double r0 = 0.40 + 0.05 * (k % 3);
    const double base = 0.55 + 0.08 * (k % 5) / 4.0;
    const bool hollow = k % 2 == 1;
    const double rot = 2.0 * std::numbers::pi * view / spec.per_class;
    const double cr = std::cos(rot), sr = std::sin(rot);

    GrayImage img = GrayImage::filled(spec.side, 0.0);
    img.class_label = class_label;
    const double dx = 2.0 / spec.side;
    for (int r = 0; r < spec.side; ++r) {
        for (int c = 0; c < spec.side; ++c) {
            double acc = 0.0;
            // 2x2 subsampling smooths the silhouette edge.
            for (int sy = 0; sy < 2; ++sy) {
                for (int sx = 0; sx < 2; ++sx) {
                    const double x = -1.0 + (r + 0.25 + 0.5 * sx) * dx;
                    const double y = -1.0 + (c + 0.25 + 0.5 * sy) * dx;
                    // Shape frame: undo the view rotation.
                    const double xs = cr * x + sr * y;
                    const double ys = -sr * x + cr * y;
                    const double rad = std::sqrt(xs * xs + ys * ys);
                    const double phi = std::atan2(ys, xs);
                    const double boundary = r0 * (1.0 + amp * std::cos(lobes * phi));
                    if (rad > boundary) continue;
                    if (hollow && rad < 0.4 * r0) continue;
                    const double shade = 0.7 + 0.3 * (xs / boundary + 1.0) / 2.0;
                    acc += base * shade;
                }
            }
            img.at(r, c) = acc / 4.0;
        }
    }
    return img;
}

/// Degenerate perfectly-separable fixture: every view of class k is the same
/// constant-intensity image, so features coincide within a class and differ
/// across classes.
inline GrayImage constant_level_view(int class_label, const SyntheticSpec& spec) {
    GrayImage img =
        GrayImage::filled(spec.side, (class_label + 1) / static_cast<double>(spec.classes + 1));
    img.class_label = class_label;
    return img;
}

namespace detail {

inline int synthetic_angle(int view, int per_class) {
    return 360 % per_class == 0 ? view * (360 / per_class) : view;
}

template <typename ViewFn>
void write_views(const std::filesystem::path& dir, const SyntheticSpec& spec, ViewFn&& make) {
    std::filesystem::create_directories(dir);
    for (int k = 0; k < spec.classes; ++k) {
        for (int v = 0; v < spec.per_class; ++v) {
            GrayImage img = make(k, v);
            img.id = "obj" + std::to_string(k + 1) + "__" +
                     std::to_string(synthetic_angle(v, spec.per_class));
            save_pgm(img, dir / (img.id + ".pgm"));
        }
    }
}

}  // namespace detail

/// Writes obj<k>__<angle>.pgm files in the COIL naming convention.
inline void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec) {
    detail::write_views(dir, spec,
                        [&](int k, int v) { return synthetic_object_view(k, v, spec); });
}

inline void write_levels_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec) {
    detail::write_views(dir, spec, [&](int k, int) { return constant_level_view(k, spec); });
}

}  // namespace momir
