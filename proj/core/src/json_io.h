// Copyright 2026 The fnlgen Authors.
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

// JSON helpers shared by the file formats. Internal to the library.

#ifndef FNLGEN_SRC_JSON_IO_H_
#define FNLGEN_SRC_JSON_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fnlgen/numstat.h"
#include "json.hpp"

namespace fnlgen::json_io {

using Json = nlohmann::ordered_json;

Json to_json(std::span<const double> v);
Json to_json(const Matrix& m);
Json to_json(const SymMatrix& m);

// Every accessor throws FormatError naming `what` on a missing key or a
// value of the wrong type.
const Json& require(const Json& j, std::string_view key, std::string_view what);
double get_double(const Json& j, std::string_view key, std::string_view what);
std::uint64_t get_u64(const Json& j, std::string_view key, std::string_view what);
std::string get_string(const Json& j, std::string_view key, std::string_view what);
bool get_bool(const Json& j, std::string_view key, std::string_view what);

double as_double(const Json& j, std::string_view what);
Vec vec_from_json(const Json& j, std::string_view what);
Matrix matrix_from_json(const Json& j, std::string_view what);
SymMatrix sym_from_json(const Json& j, std::string_view what);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s, std::string_view what);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
Json parse(const std::string& text, std::string_view what);

}  // namespace fnlgen::json_io

#endif  // FNLGEN_SRC_JSON_IO_H_
