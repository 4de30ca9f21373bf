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
#include <stdexcept>
#include <string>
#include <vector>

#include "momir/gray_image.hpp"

namespace momir {

/// Feature extraction method: Exact Legendre Moments, Zernike Moments, or
/// Hu Moment Invariants.
enum class Method : std::uint8_t { elm = 1, zm = 2, mi = 3 };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::elm: return "elm";
        case Method::zm: return "zm";
        case Method::mi: return "mi";
    }
    throw Error("invalid method tag");
}

inline Method parse_method(const std::string& s) {
    if (s == "elm") return Method::elm;
    if (s == "zm") return Method::zm;
    if (s == "mi") return Method::mi;
    throw Error("unknown method '" + s + "' (expected elm, zm, or mi)");
}

/// Number of ELM features with p+q <= g.
inline int elm_feature_count(int g) { return (g + 1) * (g + 2) / 2; }

/// Number of Zernike magnitude features |A_nm| with n <= order, m >= 0,
/// n-m even.
inline int zm_feature_count(int order) {
    int count = 0;
    for (int n = 0; n <= order; ++n) count += n / 2 + 1;
    return count;
}

inline constexpr int kHuFeatureCount = 7;

inline int feature_dim(Method m, int order) {
    switch (m) {
        case Method::elm: return elm_feature_count(order);
        case Method::zm: return zm_feature_count(order);
        case Method::mi: return kHuFeatureCount;
    }
    throw Error("invalid method tag");
}

/// Ordered list of real-valued moment features with method/order metadata.
struct FeatureVector {
    Method method = Method::elm;
    int order = 0;  // total moment order; 0 for mi
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

}  // namespace momir
