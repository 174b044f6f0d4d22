// Copyright 2026 The CAEN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Helpers for line-delimited JSON files.

#ifndef CAEN_DATA_JSONL_H_
#define CAEN_DATA_JSONL_H_

#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "caen/errors.h"
#include "json.hpp"

namespace caen::jsonl {

// Throws DataError unless `j` is an object with exactly these keys.
void require_keys(const nlohmann::json& j, std::initializer_list<const char*> keys);

// Parses one record per non-blank line. Any failure is rethrown as a
// DataError prefixed with "path:line: ".
template <typename T>
std::vector<T> read_records(const std::filesystem::path& path,
                            const std::function<T(const nlohmann::json&)>& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace caen::jsonl

#endif  // CAEN_DATA_JSONL_H_
