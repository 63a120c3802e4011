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

#include "json_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fnlgen/errors.h"

namespace fnlgen::json_io {
namespace {

[[noreturn]] void fail(std::string_view what, std::string_view detail) {
  throw FormatError(std::string(what) + ": " + std::string(detail));
}

}  // namespace

Json to_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(to_json(m.row(r)));
  return a;
}

Json to_json(const SymMatrix& m) { return to_json(m.matrix()); }

const Json& require(const Json& j, std::string_view key, std::string_view what) {
  if (!j.is_object()) fail(what, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(what, "missing field '" + std::string(key) + "'");
  return *it;
}

double as_double(const Json& j, std::string_view what) {
  if (!j.is_number()) fail(what, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(what, "non-finite number");
  return v;
}

double get_double(const Json& j, std::string_view key, std::string_view what) {
  return as_double(require(j, key, what), std::string(what) + "." + std::string(key));
}

std::uint64_t get_u64(const Json& j, std::string_view key, std::string_view what) {
  const Json& v = require(j, key, what);
  if (!v.is_number_unsigned()) {
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(what, "field '" + std::string(key) + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const Json& j, std::string_view key, std::string_view what) {
  const Json& v = require(j, key, what);
  if (!v.is_string()) fail(what, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const Json& j, std::string_view key, std::string_view what) {
  const Json& v = require(j, key, what);
  if (!v.is_boolean()) fail(what, "field '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

Vec vec_from_json(const Json& j, std::string_view what) {
  if (!j.is_array()) fail(what, "expected an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const Json& x : j) v.push_back(as_double(x, what));
  return v;
}

Matrix matrix_from_json(const Json& j, std::string_view what) {
  if (!j.is_array() || j.empty()) fail(what, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<double> data;
  for (const Json& row : j) {
    Vec r = vec_from_json(row, what);
    if (cols == 0) cols = r.size();
    if (r.size() != cols || cols == 0) fail(what, "ragged or empty matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows, cols, std::move(data));
}

SymMatrix sym_from_json(const Json& j, std::string_view what) {
  Matrix m = matrix_from_json(j, what);
  if (m.rows() != m.cols()) fail(what, "expected a square matrix");
  return SymMatrix(m);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::uint64_t parse_hex64(const std::string& s, std::string_view what) {
  if (s.size() < 3 || s.rfind("0x", 0) != 0) fail(what, "expected a 0x-prefixed hex value");
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(s.substr(2), &used, 16);
    if (used != s.size() - 2) fail(what, "bad hex value");
    return v;
  } catch (const std::logic_error&) {
    fail(what, "bad hex value");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

Json parse(const std::string& text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(what, std::string("malformed document (") + e.what() + ")");
  }
}

}  // namespace fnlgen::json_io
