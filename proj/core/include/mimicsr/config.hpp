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
#include <utility>
#include <vector>

namespace mimicsr {

// Flat view of a "key = value" tree. Keys are dotted paths; a "[section]"
// line in a file prefixes the keys that follow it. Every key must be in the
// schema and every value must parse as the key's type, so typos fail loudly
// instead of silently falling back to defaults.
class Config {
 public:
  enum class Type { kInt, kReal, kBool, kString, kRange, kIntList };

  struct Key {
    std::string name;
    Type type;
    std::string default_value;
    std::string help;
  };

  // Defaults for every schema key.
  Config();

  static const std::vector<Key>& schema();
  static const Key* find_key(const std::string& name);
  static std::string type_name(Type t);

  // Apply a config file on top of the current values.
  void load_file(const std::filesystem::path& path);
  // Same, from text; `origin` names the source in error messages.
  void load_text(const std::string& text, const std::string& origin);
  // Apply one "key=value" override.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& raw(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::pair<double, double> get_range(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Resolved values in file syntax, one "key = value" line each.
  std::string dump() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mimicsr
