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
#include <stdexcept>

#include "momir/features.hpp"
#include "momir/gray_image.hpp"

namespace momir {

namespace detail {

inline double ipow(double base, int exp) {
    double out = 1.0;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

}  // namespace detail

/// Raw geometric moment m_pq = sum_x sum_y x^p y^q f(x,y) over zero-based
/// integer pixel coordinates; x is the column index, y is the row index.
inline double raw_moment(const GrayImage& img, int p, int q) {
    double acc = 0.0;
    for (int r = 0; r < img.side; ++r) {
        const double yq = detail::ipow(static_cast<double>(r), q);
        for (int c = 0; c < img.side; ++c)
            acc += detail::ipow(static_cast<double>(c), p) * yq * img.at(r, c);
    }
    return acc;
}

struct Centroid {
    double x, y;
};

inline Centroid centroid(const GrayImage& img) {
    double m00 = 0.0, m10 = 0.0, m01 = 0.0;
    for (int r = 0; r < img.side; ++r)
        for (int c = 0; c < img.side; ++c) {
            const double f = img.at(r, c);
            m00 += f;
            m10 += c * f;
            m01 += r * f;
        }
    if (m00 <= 0.0) throw Error("degenerate image: total intensity is zero");
    return {m10 / m00, m01 / m00};
}

/// Central moment mu_pq = sum sum (x-xbar)^p (y-ybar)^q f(x,y).
inline double central_moment(const GrayImage& img, int p, int q) {
    const Centroid c0 = centroid(img);
    double acc = 0.0;
    for (int r = 0; r < img.side; ++r) {
        const double dy = r - c0.y;
        const double yq = detail::ipow(dy, q);
        for (int c = 0; c < img.side; ++c) acc += detail::ipow(c - c0.x, p) * yq * img.at(r, c);
    }
    return acc;
}

/// Normalized central moment eta_pq = mu_pq / mu_00^gamma with
/// gamma = (p+q)/2 + 1.
inline double normalized_central_moment(const GrayImage& img, int p, int q) {
    const double mu00 = central_moment(img, 0, 0);
    const double gamma = (p + q) / 2.0 + 1.0;
    return central_moment(img, p, q) / std::pow(mu00, gamma);
}

/// The seven Hu moment invariants, insensitive to translation, scale and
/// rotation (phi7 flips sign under mirroring).
inline FeatureVector hu_invariants(const GrayImage& img) {
    const Centroid c0 = centroid(img);

    // One pass over the image for every mu_pq with p+q <= 3.
    double mu00 = 0, mu20 = 0, mu02 = 0, mu11 = 0, mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
    for (int r = 0; r < img.side; ++r) {
        const double dy = r - c0.y;
        for (int c = 0; c < img.side; ++c) {
            const double f = img.at(r, c);
            if (f == 0.0) continue;
            const double dx = c - c0.x;
            mu00 += f;
            mu20 += dx * dx * f;
            mu02 += dy * dy * f;
            mu11 += dx * dy * f;
            mu30 += dx * dx * dx * f;
            mu03 += dy * dy * dy * f;
            mu21 += dx * dx * dy * f;
            mu12 += dx * dy * dy * f;
        }
    }
    const double s2 = std::pow(mu00, 2.0);   // gamma = 2 for p+q = 2
    const double s3 = std::pow(mu00, 2.5);   // gamma = 2.5 for p+q = 3
    const double n20 = mu20 / s2, n02 = mu02 / s2, n11 = mu11 / s2;
    const double n30 = mu30 / s3, n03 = mu03 / s3, n21 = mu21 / s3, n12 = mu12 / s3;

    const double a = n30 + n12;  // recurring combinations
    const double b = n21 + n03;
    const double c = n30 - 3 * n12;
    const double d = 3 * n21 - n03;

    FeatureVector out;
    out.method = Method::mi;
    out.order = 0;
    out.values = {
        n20 + n02,
        (n20 - n02) * (n20 - n02) + 4 * n11 * n11,
        c * c + d * d,
        a * a + b * b,
        c * a * (a * a - 3 * b * b) + d * b * (3 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4 * n11 * a * b,
        d * a * (a * a - 3 * b * b) - c * b * (3 * a * a - b * b),
    };
    return out;
}

}  // namespace momir
