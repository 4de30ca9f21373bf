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

#include <cassert>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "momir/features.hpp"
#include "momir/gray_image.hpp"

namespace momir {

/// Legendre polynomial P_p(x) by the three-term recurrence
/// (p+1) P_{p+1} = (2p+1) x P_p - p P_{p-1}, P_0 = 1, P_1 = x.
inline double legendre_poly(int p, double x) {
    assert(p >= 0);
    assert(x >= -1.0 && x <= 1.0);
    if (p == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int k = 1; k < p; ++k) {
        double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// P_0(x) .. P_pmax(x) in one recurrence sweep.
inline std::vector<double> legendre_all(int pmax, double x) {
    std::vector<double> out(static_cast<std::size_t>(pmax) + 1);
    out[0] = 1.0;
    if (pmax >= 1) out[1] = x;
    for (int k = 1; k < pmax; ++k)
        out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
    return out;
}

/// Per-cell Legendre integration table for an N-pixel axis of the [-1,1]
/// grid: table(p, i) = ((2p+1)/2) * integral of P_p over pixel cell i.
///
/// Two variants share the interface: `exact` evaluates the antiderivative
/// (2p+1)/(2p+2) * [x P_p(x) - P_{p-1}(x)] at the cell bounds; `midpoint`
/// is the classical zeroth-order approximation (2p+1)/2 * P_p(x_i) * dx
/// kept as the inaccuracy contrast. Row 0 is 1/N in both.
class LegendreKernel {
public:
    enum class Mode { exact, midpoint };

    LegendreKernel(int order, int side, Mode mode = Mode::exact)
        : order_(order), side_(side), mode_(mode),
          table_(static_cast<std::size_t>(order + 1) * side) {
        assert(order >= 0 && side >= 1);
        const double dx = 2.0 / side;
        for (int i = 0; i < side; ++i) table_[i] = 1.0 / side;
        if (order == 0) return;

        if (mode == Mode::exact) {
            // P rows at the N+1 cell boundaries u_i = -1 + i*dx.
            std::vector<std::vector<double>> pb(static_cast<std::size_t>(side) + 1);
            for (int i = 0; i <= side; ++i) pb[i] = legendre_all(order, -1.0 + i * dx);
            for (int p = 1; p <= order; ++p) {
                const double factor = (2.0 * p + 1.0) / (2.0 * p + 2.0);
                for (int i = 0; i < side; ++i) {
                    const double u0 = -1.0 + i * dx, u1 = -1.0 + (i + 1) * dx;
                    const double g1 = u1 * pb[i + 1][p] - pb[i + 1][p - 1];
                    const double g0 = u0 * pb[i][p] - pb[i][p - 1];
                    at(p, i) = factor * (g1 - g0);
                }
            }
        } else {
            for (int i = 0; i < side; ++i) {
                const double xc = -1.0 + (i + 0.5) * dx;
                auto pv = legendre_all(order, xc);
                for (int p = 1; p <= order; ++p) at(p, i) = (2.0 * p + 1.0) / 2.0 * pv[p] * dx;
            }
        }
    }

    int order() const { return order_; }
    int side() const { return side_; }
    Mode mode() const { return mode_; }

    double value(int p, int i) const { return table_[static_cast<std::size_t>(p) * side_ + i]; }
    const double* row(int p) const { return table_.data() + static_cast<std::size_t>(p) * side_; }

    /// Process-wide immutable cache; tables are shareable across threads.
    static const LegendreKernel& shared(int order, int side, Mode mode = Mode::exact) {
        static std::mutex mutex;
        static std::map<std::tuple<int, int, int>, std::unique_ptr<const LegendreKernel>> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto key = std::make_tuple(order, side, static_cast<int>(mode));
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, std::make_unique<const LegendreKernel>(order, side, mode)).first;
        return *it->second;
    }

private:
    double& at(int p, int i) { return table_[static_cast<std::size_t>(p) * side_ + i]; }

    int order_;
    int side_;
    Mode mode_;
    std::vector<double> table_;
};

namespace detail {

// Two-pass separable reduction: row moments Y_iq = sum_j I_q(y_j) f(x_i,y_j)
// with j inner, then L_pq = sum_i I_p(x_i) Y_iq. Row index is x, column
// index is y. Features ordered by ascending p+q, then ascending p.
inline FeatureVector legendre_moments(const GrayImage& img, int g, const LegendreKernel& kernel) {
    if (g < 0) throw Error("moment order must be non-negative");
    if (kernel.side() != img.side)
        throw Error("kernel side " + std::to_string(kernel.side()) + " does not match image side " +
                    std::to_string(img.side));
    if (kernel.order() < g)
        throw Error("kernel order " + std::to_string(kernel.order()) +
                    " is below requested moment order " + std::to_string(g));
    const int n = img.side;

    std::vector<double> row_moments(static_cast<std::size_t>(n) * (g + 1));
    for (int i = 0; i < n; ++i) {
        const double* f = img.pixels.data() + static_cast<std::size_t>(i) * n;
        for (int q = 0; q <= g; ++q) {
            const double* iq = kernel.row(q);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += iq[j] * f[j];
            row_moments[static_cast<std::size_t>(i) * (g + 1) + q] = acc;
        }
    }

    FeatureVector out;
    out.method = Method::elm;
    out.order = g;
    out.values.reserve(static_cast<std::size_t>(elm_feature_count(g)));
    for (int s = 0; s <= g; ++s) {
        for (int p = 0; p <= s; ++p) {
            const int q = s - p;
            const double* ip = kernel.row(p);
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += ip[i] * row_moments[static_cast<std::size_t>(i) * (g + 1) + q];
            out.values.push_back(acc);
        }
    }
    return out;
}

}  // namespace detail

/// Exact Legendre Moments of total order up to g, all (p,q) with p+q <= g.
inline FeatureVector elm_compute(const GrayImage& img, int g, const LegendreKernel& kernel) {
    return detail::legendre_moments(img, g, kernel);
}

inline FeatureVector elm_compute(const GrayImage& img, int g) {
    return detail::legendre_moments(img, g, LegendreKernel::shared(g, img.side));
}

/// Legendre moments via the midpoint-approximated kernel. Exact only through
/// degree 1; the error relative to elm_compute grows with the moment order.
inline FeatureVector elm_approximate(const GrayImage& img, int g, const LegendreKernel& kernel) {
    return detail::legendre_moments(img, g, kernel);
}

inline FeatureVector elm_approximate(const GrayImage& img, int g) {
    return detail::legendre_moments(
        img, g, LegendreKernel::shared(g, img.side, LegendreKernel::Mode::midpoint));
}

/// Inverse transform sampled at pixel centers:
/// fhat(x_i, y_j) = sum_{p+q<=g} L_pq P_p(x_i) P_q(y_j).
/// Returns a side*side row-major array (row = x, column = y).
inline std::vector<double> elm_reconstruct(const FeatureVector& features, int side) {
    const int g = features.order;
    if (features.method != Method::elm) throw Error("elm_reconstruct expects ELM features");
    if (features.dim() != elm_feature_count(g))
        throw Error("feature length " + std::to_string(features.dim()) +
                    " does not match order " + std::to_string(g));

    const double dx = 2.0 / side;
    std::vector<std::vector<double>> poly(static_cast<std::size_t>(side));
    for (int i = 0; i < side; ++i) poly[i] = legendre_all(g, -1.0 + (i + 0.5) * dx);

    std::vector<double> out(static_cast<std::size_t>(side) * side, 0.0);
    std::size_t t = 0;
    for (int s = 0; s <= g; ++s) {
        for (int p = 0; p <= s; ++p, ++t) {
            const int q = s - p;
            const double coeff = features.values[t];
            if (coeff == 0.0) continue;
            for (int i = 0; i < side; ++i) {
                const double cp = coeff * poly[i][p];
                double* row = out.data() + static_cast<std::size_t>(i) * side;
                for (int j = 0; j < side; ++j) row[j] += cp * poly[j][q];
            }
        }
    }
    return out;
}

}  // namespace momir
