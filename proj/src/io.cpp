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
#include "qntk/io.hpp"

#include "qntk/error.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

namespace qntk::io {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string csv_row(const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += cells[i];
    }
    out += '\n';
    return out;
}

void write_text(const std::filesystem::path &path, std::string_view content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError(fmt::format("cannot open '{}' for writing",
                                  path.string()));
    }
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) {
        throw IoError(fmt::format("failed writing '{}'", path.string()));
    }
}

void write_json(const std::filesystem::path &path, const nlohmann::json &j) {
    write_text(path, j.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError(fmt::format("cannot open '{}' for reading",
                                  path.string()));
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t CsvTable::column(const std::string &name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw StructuralError(fmt::format("CSV has no column '{}'", name));
}

CsvTable read_csv(const std::filesystem::path &path) {
    std::istringstream is(read_text(path));
    CsvTable table;
    std::string line;
    auto split = [](const std::string &l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!l.empty() && l.back() == ',') {
            cells.emplace_back();
        }
        return cells;
    };
    if (std::getline(is, line)) {
        table.header = split(line);
    }
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto cells = split(line);
        if (cells.size() != table.header.size()) {
            throw StructuralError(fmt::format(
                "CSV row has {} cells, header has {}", cells.size(),
                table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

} // namespace qntk::io
