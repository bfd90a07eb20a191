/*
 * json.hpp
 *
 * Copyright 2026 The tnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tnet {

using Json = nlohmann::json;

/// Canonical form: object keys sorted lexicographically, no insignificant
/// whitespace. nlohmann::json stores objects in a std::map, so dump() is
/// already key-ordered; this only pins the formatting flags.
inline std::string canonical(const Json& j) { return j.dump(-1, ' ', false); }

/// Reads a whole file; throws Error(IoError) on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes `data` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

/// Parses JSON text, mapping parse failures to Error(SyntaxError) with the
/// byte position reported by the parser.
Json parse_json(std::string_view text);

}  // namespace tnet
