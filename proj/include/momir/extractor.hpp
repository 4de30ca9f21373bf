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

#include "momir/features.hpp"
#include "momir/hu.hpp"
#include "momir/legendre.hpp"
#include "momir/zernike.hpp"

namespace momir {

/// Extracts features with the given method. `order` is the total moment
/// order for elm/zm and ignored for mi.
inline FeatureVector extract_features(const GrayImage& img, Method method, int order) {
    switch (method) {
        case Method::elm: return elm_compute(img, order);
        case Method::zm: return zm_compute(img, order);
        case Method::mi: return hu_invariants(img);
    }
    throw Error("invalid method tag");
}

}  // namespace momir
