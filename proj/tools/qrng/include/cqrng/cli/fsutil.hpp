// Copyright 2026 The cqrng Authors
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


#pragma once

// File-system helpers: atomic writes, whole-file reads, the output
// directory lock and the worker-count environment variable.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cqrng::cli {

namespace fs = std::filesystem;

/// Writes to a sibling temp file, then renames over `path`.
void atomic_write(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);
std::vector<std::uint8_t> read_bytes(const fs::path& path);

/// Exclusive lock on an output directory via a ".qrng.lock" file, created
/// with O_EXCL and removed on destruction. Creates the directory.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path file_;
};

/// QRNG_THREADS: unset or 0 means hardware concurrency. Throws ConfigError
/// on anything that is not a non-negative integer.
unsigned resolve_threads();

}  // namespace cqrng::cli
