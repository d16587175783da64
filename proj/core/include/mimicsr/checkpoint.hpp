// Copyright 2026 The mimicsr Authors
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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mimicsr {

namespace nn {
struct Parameter;
}

// Named float32 arrays plus a JSON header, in one binary file:
//
//   "MIMICSR1"  8-byte magic
//   u64         header length in bytes (little endian)
//   header      UTF-8 JSON: {"meta": {...}, "tensors": [{"name", "shape", "offset", "count"}]}
//   payload     concatenated little-endian float32 data
//
// Writes go to a temporary sibling and are renamed into place.
struct TensorArchive {
  struct Entry {
    std::vector<int> shape;
    std::vector<float> values;
  };

  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, Entry> tensors;

  bool contains(const std::string& name) const { return tensors.count(name) != 0; }
  const Entry& at(const std::string& name) const;
  void put(const std::string& name, std::vector<int> shape, std::vector<float> values);

  // Drop every tensor whose name starts with `prefix`.
  void erase_prefix(const std::string& prefix);

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);
};

// Copy parameter values into the archive under their own names.
void store_parameters(TensorArchive& archive, const std::vector<nn::Parameter*>& params);
// Load every listed parameter by name; a missing name or a shape mismatch is a
// DataError.
void restore_parameters(const TensorArchive& archive, const std::vector<nn::Parameter*>& params);

}  // namespace mimicsr
