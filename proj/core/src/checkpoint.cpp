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

#include "mimicsr/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mimicsr/error.hpp"
#include "mimicsr/nn/layers.hpp"

namespace mimicsr {
namespace {
constexpr char kMagic[8] = {'M', 'I', 'M', 'I', 'C', 'S', 'R', '1'};
}

const TensorArchive::Entry& TensorArchive::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void TensorArchive::put(const std::string& name, std::vector<int> shape, std::vector<float> values) {
  tensors[name] = Entry{std::move(shape), std::move(values)};
}

void TensorArchive::erase_prefix(const std::string& prefix) {
  for (auto it = tensors.begin(); it != tensors.end();) {
    if (it->first.rfind(prefix, 0) == 0)
      it = tensors.erase(it);
    else
      ++it;
  }
}

void TensorArchive::save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["meta"] = meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, e] : tensors) {
    header["tensors"].push_back({{"name", name}, {"shape", e.shape}, {"offset", offset}, {"count", e.values.size()}});
    offset += e.values.size();
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, e] : tensors) {
      out.write(reinterpret_cast<const char*>(e.values.data()),
                static_cast<std::streamsize>(e.values.size() * sizeof(float)));
    }
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a mimicsr checkpoint");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 32)) throw DataError("corrupt checkpoint header in " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint header in " + path.string());

  TensorArchive archive;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  archive.meta = header.value("meta", nlohmann::json::object());
  const std::streamoff payload = in.tellg();
  for (const auto& t : header.at("tensors")) {
    Entry e;
    e.shape = t.at("shape").get<std::vector<int>>();
    const auto count = t.at("count").get<std::uint64_t>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    e.values.resize(count);
    in.seekg(payload + static_cast<std::streamoff>(offset * sizeof(float)));
    in.read(reinterpret_cast<char*>(e.values.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw DataError("truncated tensor '" + t.at("name").get<std::string>() + "' in " + path.string());
    archive.tensors.emplace(t.at("name").get<std::string>(), std::move(e));
  }
  return archive;
}

void store_parameters(TensorArchive& archive, const std::vector<nn::Parameter*>& params) {
  for (const nn::Parameter* p : params) archive.put(p->name, p->shape, p->value);
}

void restore_parameters(const TensorArchive& archive, const std::vector<nn::Parameter*>& params) {
  for (nn::Parameter* p : params) {
    if (!archive.contains(p->name)) throw DataError("checkpoint is missing tensor " + p->name);
    const auto& e = archive.at(p->name);
    if (e.shape != p->shape) throw DataError("checkpoint tensor " + p->name + " has the wrong shape");
    p->value = e.values;
  }
}

}  // namespace mimicsr
