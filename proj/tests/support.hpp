// SPDX-License-Identifier: Apache-2.0
//
// thz: terahertz ultra-massive MIMO link simulation library
// Copyright (C) 2026 The thz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "thz/spectro.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace thz::test {

inline std::string data_path(const std::string &name) { return std::string(THZ_DATA_DIR) + "/" + name; }

inline const LineDatabase &curated_lines()
{
    static const LineDatabase db = [] {
        std::ifstream in(data_path("h2o_o2_curated.csv"));
        if (!in)
            throw std::runtime_error("missing bundled line list");
        return parse_linelist(in, "h2o_o2_curated.csv");
    }();
    return db;
}

} // namespace thz::test
