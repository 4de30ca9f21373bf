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
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "momir/features.hpp"
#include "momir/gray_image.hpp"

namespace momir {

/// (n, m) index pairs with 0 <= n <= order, m >= 0, n-m even, ordered by
/// ascending n then ascending m. These are the magnitude features |A_nm|.
inline std::vector<std::pair<int, int>> zernike_index_pairs(int order) {
    std::vector<std::pair<int, int>> pairs;
    for (int n = 0; n <= order; ++n)
        for (int m = n % 2; m <= n; m += 2) pairs.emplace_back(n, m);
    return pairs;
}

/// Radial polynomial R_nm(rho) = sum_s (-1)^s (n-s)! /
/// [s! ((n+|m|)/2-s)! ((n-|m|)/2-s)!] rho^(n-2s). Coefficients are built by
/// an integer-free ratio recurrence, so no factorial overflows for n <= 20.
inline double zernike_radial(int n, int m, double rho) {
    m = std::abs(m);
    if (n < 0 || m > n || (n - m) % 2 != 0)
        throw Error("invalid Zernike index (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                    "): need |m| <= n and n-|m| even");
    const int a = (n + m) / 2, b = (n - m) / 2;

    // c_0 = n! / (a! b!) = binomial(n, a); c_{s+1}/c_s = -(a-s)(b-s)/((n-s)(s+1)).
    std::vector<double> coeff(static_cast<std::size_t>(b) + 1);
    double c = 1.0;
    for (int i = 1; i <= b; ++i) c *= static_cast<double>(a + i) / i;
    coeff[0] = c;
    for (int s = 0; s < b; ++s)
        coeff[s + 1] = -coeff[s] * (a - s) * (b - s) / (static_cast<double>(n - s) * (s + 1));

    // Horner in rho^2, then the leading rho^m.
    const double r2 = rho * rho;
    double acc = coeff[0];
    for (int s = 1; s <= b; ++s) acc = acc * r2 + coeff[s];
    double rm = 1.0;
    for (int k = 0; k < m; ++k) rm *= rho;
    return acc * rm;
}

/// Precomputed Zernike basis over the N x N grid mapped to [-1,1]^2 (row
/// index is x, column index is y, same grid as the Legendre kernels).
/// Pixels with rho > 1 are excluded. For each (n,m) pair the table holds
/// R_nm(rho) cos(m theta) and R_nm(rho) sin(m theta) at every kept pixel,
/// with theta = atan2(y, x).
class ZernikeBasis {
public:
    ZernikeBasis(int order, int side) : order_(order), side_(side), pairs_(zernike_index_pairs(order)) {
        const double dx = 2.0 / side;
        std::vector<double> rho, theta;
        for (int r = 0; r < side; ++r) {
            const double x = -1.0 + (r + 0.5) * dx;
            for (int c = 0; c < side; ++c) {
                const double y = -1.0 + (c + 0.5) * dx;
                const double rr = std::sqrt(x * x + y * y);
                if (rr > 1.0) continue;
                inside_.push_back(r * side + c);
                rho.push_back(rr);
                theta.push_back(std::atan2(y, x));
            }
        }
        const std::size_t k = inside_.size();
        re_.resize(pairs_.size() * k);
        im_.resize(pairs_.size() * k);
        for (std::size_t t = 0; t < pairs_.size(); ++t) {
            const auto [n, m] = pairs_[t];
            for (std::size_t i = 0; i < k; ++i) {
                const double radial = zernike_radial(n, m, rho[i]);
                re_[t * k + i] = radial * std::cos(m * theta[i]);
                im_[t * k + i] = radial * std::sin(m * theta[i]);
            }
        }
    }

    int order() const { return order_; }
    int side() const { return side_; }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    const std::vector<int>& inside() const { return inside_; }
    std::size_t excluded_count() const {
        return static_cast<std::size_t>(side_) * side_ - inside_.size();
    }

    /// A_nm for every index pair: (n+1)/pi * sum f R e^{-jm theta} dx dy.
    std::vector<std::complex<double>> project(const GrayImage& img) const {
        if (img.side != side_)
            throw Error("basis side " + std::to_string(side_) + " does not match image side " +
                        std::to_string(img.side));
        const std::size_t k = inside_.size();
        const double cell = (2.0 / side_) * (2.0 / side_);
        std::vector<std::complex<double>> out(pairs_.size());
        for (std::size_t t = 0; t < pairs_.size(); ++t) {
            const double* re = re_.data() + t * k;
            const double* im = im_.data() + t * k;
            double sum_re = 0.0, sum_im = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double f = img.pixels[inside_[i]];
                sum_re += f * re[i];
                sum_im += f * im[i];
            }
            const double scale = (pairs_[t].first + 1) / std::numbers::pi * cell;
            out[t] = {scale * sum_re, -scale * sum_im};
        }
        return out;
    }

    static const ZernikeBasis& shared(int order, int side) {
        static std::mutex mutex;
        static std::map<std::pair<int, int>, std::unique_ptr<const ZernikeBasis>> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto key = std::make_pair(order, side);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, std::make_unique<const ZernikeBasis>(order, side)).first;
        return *it->second;
    }

private:
    int order_;
    int side_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<int> inside_;
    std::vector<double> re_, im_;
};

/// Complex Zernike moments A_nm for all pairs with m >= 0, n <= order.
inline std::vector<std::complex<double>> zm_complex(const GrayImage& img, int order) {
    return ZernikeBasis::shared(order, img.side).project(img);
}

/// Single complex moment for any repetition m (negative allowed); computed
/// directly from the grid without the cached basis.
inline std::complex<double> zm_moment(const GrayImage& img, int n, int m) {
    const int side = img.side;
    const double dx = 2.0 / side;
    const double cell = dx * dx;
    std::complex<double> acc{0.0, 0.0};
    for (int r = 0; r < side; ++r) {
        const double x = -1.0 + (r + 0.5) * dx;
        for (int c = 0; c < side; ++c) {
            const double y = -1.0 + (c + 0.5) * dx;
            const double rho = std::sqrt(x * x + y * y);
            if (rho > 1.0) continue;
            const double theta = std::atan2(y, x);
            const double radial = zernike_radial(n, m, rho);
            acc += img.at(r, c) * radial * std::exp(std::complex<double>(0.0, -m * theta));
        }
    }
    return acc * ((n + 1) / std::numbers::pi * cell);
}

/// Zernike magnitude features |A_nm| for m >= 0, ordered as
/// zernike_index_pairs(order).
inline FeatureVector zm_compute(const GrayImage& img, int order) {
    if (order < 0) throw Error("moment order must be non-negative");
    auto moments = zm_complex(img, order);
    FeatureVector out;
    out.method = Method::zm;
    out.order = order;
    out.values.reserve(moments.size());
    for (const auto& a : moments) out.values.push_back(std::abs(a));
    return out;
}

}  // namespace momir
