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

// Test-only reference computations. These deliberately take different
// routes than the library: Legendre values come from explicit monomial
// coefficients instead of the value recurrence, cell integrals from
// term-wise monomial integration instead of the antiderivative identity,
// and Zernike radials from literal factorials.

#pragma once

#include <cassert>
#include <cmath>
#include <random>
#include <vector>

#include "momir/gray_image.hpp"
#include "momir/legendre.hpp"

namespace oracle {

/// Monomial coefficients c[p][k] with P_p(x) = sum_k c[p][k] x^k, built by
/// the coefficient-space recurrence. Exact in double for p <= 12.
inline std::vector<std::vector<double>> legendre_coeffs(int pmax) {
    std::vector<std::vector<double>> c(static_cast<std::size_t>(pmax) + 1);
    c[0] = {1.0};
    if (pmax >= 1) c[1] = {0.0, 1.0};
    for (int p = 1; p < pmax; ++p) {
        std::vector<double> next(static_cast<std::size_t>(p) + 2, 0.0);
        for (std::size_t k = 0; k < c[p].size(); ++k)
            next[k + 1] += (2.0 * p + 1.0) * c[p][k] / (p + 1.0);
        for (std::size_t k = 0; k < c[p - 1].size(); ++k) next[k] -= p * c[p - 1][k] / (p + 1.0);
        c[p + 1] = std::move(next);
    }
    return c;
}

inline double eval_poly(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

/// Integral of P_p over [a, b] by integrating each monomial term.
inline double legendre_cell_integral(const std::vector<double>& coeffs, double a, double b) {
    double acc = 0.0;
    double pa = a, pb = b;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        acc += coeffs[k] * (pb - pa) / (k + 1.0);
        pa *= a;
        pb *= b;
    }
    return acc;
}

/// Exact continuous Legendre moment of the piecewise-constant image:
/// (2p+1)(2q+1)/4 * sum_ij f_ij * (int of P_p over x-cell i)(int of P_q
/// over y-cell j). Row index is x, column index is y.
inline double exact_legendre_moment(const momir::GrayImage& img, int p, int q) {
    const int n = img.side;
    const double dx = 2.0 / n;
    const auto coeffs = legendre_coeffs(std::max(p, q));

    std::vector<double> ip(n), iq(n);
    for (int i = 0; i < n; ++i) {
        const double a = -1.0 + i * dx, b = -1.0 + (i + 1) * dx;
        ip[i] = legendre_cell_integral(coeffs[p], a, b);
        iq[i] = legendre_cell_integral(coeffs[q], a, b);
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += img.at(i, j) * ip[i] * iq[j];
    return (2.0 * p + 1.0) * (2.0 * q + 1.0) / 4.0 * acc;
}

/// Direct double sum over the kernel table, j inner then i outer.
inline double direct_double_sum(const momir::GrayImage& img, const momir::LegendreKernel& kernel,
                                int p, int q) {
    double acc = 0.0;
    for (int i = 0; i < img.side; ++i) {
        double inner = 0.0;
        for (int j = 0; j < img.side; ++j) inner += kernel.value(q, j) * img.at(i, j);
        acc += kernel.value(p, i) * inner;
    }
    return acc;
}

/// Composite 4-point Gauss-Legendre quadrature over [a, b].
template <typename F>
double quad_gl4(F f, double a, double b, int panels) {
    static const double nodes[4] = {-0.8611363115940526, -0.33998104358485626,
                                    0.33998104358485626, 0.8611363115940526};
    static const double weights[4] = {0.34785484513745385, 0.6521451548625461,
                                      0.6521451548625461, 0.34785484513745385};
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double mid = a + (i + 0.5) * h;
        for (int k = 0; k < 4; ++k) acc += weights[k] * f(mid + 0.5 * h * nodes[k]);
    }
    return acc * 0.5 * h;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Literal factorial-sum form of the Zernike radial polynomial; exact in
/// double for n <= 12.
inline double zernike_radial_direct(int n, int m, double rho) {
    m = std::abs(m);
    assert((n - m) % 2 == 0 && m <= n);
    double acc = 0.0;
    for (int s = 0; s <= (n - m) / 2; ++s) {
        const double term = (s % 2 == 0 ? 1.0 : -1.0) * factorial(n - s) /
                            (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
        acc += term * std::pow(rho, n - 2 * s);
    }
    return acc;
}

inline momir::GrayImage random_image(int side, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    momir::GrayImage img = momir::GrayImage::filled(side, 0.0);
    for (auto& v : img.pixels) v = dist(rng);
    return img;
}

inline momir::GrayImage random_image_8bit(int side, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(0, 255);
    momir::GrayImage img = momir::GrayImage::filled(side, 0.0);
    for (auto& v : img.pixels) v = dist(rng) / 255.0;
    return img;
}

/// Exact 90-degree grid rotation: pixel (r, c) moves to (N-1-c, r).
inline momir::GrayImage rotate90(const momir::GrayImage& img) {
    momir::GrayImage out = momir::GrayImage::filled(img.side, 0.0, img.id, img.class_label);
    for (int r = 0; r < img.side; ++r)
        for (int c = 0; c < img.side; ++c) out.at(img.side - 1 - c, r) = img.at(r, c);
    return out;
}

/// Integer translation on a zero background; content must stay in bounds.
inline momir::GrayImage translate(const momir::GrayImage& img, int dr, int dc) {
    momir::GrayImage out = momir::GrayImage::filled(img.side, 0.0, img.id, img.class_label);
    for (int r = 0; r < img.side; ++r)
        for (int c = 0; c < img.side; ++c) {
            if (img.at(r, c) == 0.0) continue;
            const int nr = r + dr, nc = c + dc;
            assert(nr >= 0 && nr < img.side && nc >= 0 && nc < img.side);
            out.at(nr, nc) = img.at(r, c);
        }
    return out;
}

/// 2x nearest-neighbor upsampling.
inline momir::GrayImage upsample2(const momir::GrayImage& img) {
    momir::GrayImage out = momir::GrayImage::filled(img.side * 2, 0.0, img.id, img.class_label);
    for (int r = 0; r < out.side; ++r)
        for (int c = 0; c < out.side; ++c) out.at(r, c) = img.at(r / 2, c / 2);
    return out;
}

}  // namespace oracle
