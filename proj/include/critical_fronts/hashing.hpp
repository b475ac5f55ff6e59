// Copyright 2026 The critical-fronts Authors
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

#include <string>
#include <string_view>

namespace cfronts {

// 64-bit FNV-1a, 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

// SHA-1 of "blob <size>\0<bytes>", i.e. what `git hash-object` prints.
std::string git_blob_sha1(std::string_view bytes);

}  // namespace cfronts
