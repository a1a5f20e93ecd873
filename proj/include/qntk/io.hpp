// Copyright 2026 The QNTK Diagnostics Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qntk::io {

/// Shortest round-trip text for a double (17 significant digits).
[[nodiscard]] std::string format_double(double v);

/// Joins already formatted cells with commas and appends a newline.
[[nodiscard]] std::string csv_row(const std::vector<std::string> &cells);

/// Writes `content` to `path`, replacing any existing file. Throws IoError.
void write_text(const std::filesystem::path &path, std::string_view content);

void write_json(const std::filesystem::path &path, const nlohmann::json &j);

[[nodiscard]] std::string read_text(const std::filesystem::path &path);

/// Minimal CSV reader for the files this library writes (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string &name) const;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path &path);

} // namespace qntk::io
