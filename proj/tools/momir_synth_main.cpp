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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "momir/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"momir-synth: write a procedural COIL-style dataset for demos and testing"};
    std::string out;
    momir::SyntheticSpec spec;
    bool levels = false;
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--classes", spec.classes, "Number of object classes");
    app.add_option("--per-class", spec.per_class, "Views per class");
    app.add_option("--side", spec.side, "Image side length in pixels");
    app.add_flag("--levels", levels,
                 "Constant-intensity classes (perfectly separable fixture) instead of rotating "
                 "objects");
    CLI11_PARSE(app, argc, argv);

    try {
        if (levels)
            momir::write_levels_dataset(out, spec);
        else
            momir::write_synthetic_dataset(out, spec);
    } catch (const std::exception& e) {
        std::cerr << "momir-synth: error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << spec.classes * spec.per_class << " images (" << spec.classes
              << " classes x " << spec.per_class << " views, " << spec.side << "x" << spec.side
              << ") to " << out << "\n";
    return 0;
}
