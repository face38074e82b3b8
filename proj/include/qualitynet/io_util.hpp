// Copyright 2026 The QualityNet Authors. All Rights Reserved.
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

#ifndef QUALITYNET_IO_UTIL_HPP_
#define QUALITYNET_IO_UTIL_HPP_

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace qnet {

// Writes a file atomically: the payload goes to a temporary file in the same
// directory which is renamed onto `path` only after a successful write, so an
// interrupted run never leaves a partial artifact at the target path.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace qnet

#endif  // QUALITYNET_IO_UTIL_HPP_
