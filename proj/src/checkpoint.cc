/* Copyright 2026 The vqk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "vqk/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "vqk/features.h"

namespace vqk {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoints assume a little-endian host");

constexpr char kMagic[4] = {'V', 'Q', 'K', 'C'};
constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf_.insert(buf_.end(), bytes, bytes + sizeof(T));
  }
  void Bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void PutTensor(const std::string& name, const Tensor& t) {
    Put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    Bytes(name);
    Put<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) Put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : t.data()) Put<double>(v);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string where) : buf_(std::move(buf)), where_(std::move(where)) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::pair<std::string, Tensor> GetTensor() {
    std::string name = Bytes(Get<std::uint16_t>());
    Shape shape(Get<std::uint8_t>());
    for (std::size_t& d : shape) d = Get<std::uint32_t>();
    Tensor t(shape);
    for (double& v : t.data()) v = Get<double>();
    return {std::move(name), std::move(t)};
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void Need(std::size_t n) const {
    if (buf_.size() - pos_ < n) {
      throw CheckpointError(where_ + ": truncated at byte " + std::to_string(pos_) +
                            " (need " + std::to_string(n) + " more, file has " +
                            std::to_string(buf_.size()) + ")");
    }
  }
  std::vector<char> buf_;
  std::string where_;
  std::size_t pos_ = 0;
};

void ExpectTensor(Reader& r, const std::string& name, Tensor& slot, const std::string& where) {
  auto [got_name, t] = r.GetTensor();
  if (got_name != name) {
    throw CheckpointError(where + ": expected tensor '" + name + "', found '" + got_name + "'");
  }
  if (t.shape() != slot.shape()) {
    throw CheckpointError(where + ": tensor '" + name + "' has shape " + ShapeToString(t.shape()) +
                          ", model expects " + ShapeToString(slot.shape()));
  }
  slot = std::move(t);
}

}  // namespace

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w;
  w.Bytes(std::string(kMagic, 4));
  w.Put<std::uint16_t>(kVersion);
  nlohmann::ordered_json meta;
  meta["config"] = nlohmann::ordered_json::parse(ConfigToJson(ckpt.config));
  meta["classes"] = ckpt.classes;
  const std::string text = meta.dump();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.Bytes(text);

  std::vector<std::string> names;
  std::vector<const Tensor*> tensors;
  ModelParams params = ckpt.params;
  ForEachParam(
      [&](const std::string& name, Tensor& t) {
        names.push_back(name);
        tensors.push_back(&t);
      },
      params);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) w.PutTensor(names[i], *tensors[i]);

  const OptimizerState& opt = ckpt.optimizer;
  if (!opt.m.empty() && (opt.m.size() != names.size() || opt.v.size() != names.size())) {
    throw CheckpointError("optimizer state has " + std::to_string(opt.m.size()) +
                          " moments for " + std::to_string(names.size()) + " parameters");
  }
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(opt.step));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(opt.m.size() + opt.v.size()));
  for (std::size_t i = 0; i < opt.m.size(); ++i) w.PutTensor("m:" + names[i], opt.m[i]);
  for (std::size_t i = 0; i < opt.v.size(); ++i) w.PutTensor("v:" + names[i], opt.v[i]);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  Reader r(std::move(buf), where);

  if (r.Bytes(4) != std::string(kMagic, 4)) throw CheckpointError(where + ": bad magic");
  const auto version = r.Get<std::uint16_t>();
  if (version != kVersion) {
    throw CheckpointError(where + ": unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::string text = r.Bytes(r.Get<std::uint32_t>());
  try {
    const nlohmann::json meta = nlohmann::json::parse(text);
    ckpt.config = ParseConfig(meta.at("config").dump());
    ckpt.classes = meta.at("classes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(where + ": bad header: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(where + ": " + e.what());
  }
  if (!ckpt.classes.empty() && static_cast<int>(ckpt.classes.size()) != ckpt.config.model.num_classes) {
    throw CheckpointError(where + ": " + std::to_string(ckpt.classes.size()) +
                          " class names for a " + std::to_string(ckpt.config.model.num_classes) +
                          "-class model");
  }

  ckpt.params = InitParams(ckpt.config.model, 0);
  std::vector<std::string> names;
  std::vector<Tensor*> slots;
  ForEachParam(
      [&](const std::string& name, Tensor& t) {
        names.push_back(name);
        slots.push_back(&t);
      },
      ckpt.params);
  const auto count = r.Get<std::uint32_t>();
  if (count != names.size()) {
    throw CheckpointError(where + ": " + std::to_string(count) + " tensors, model has " +
                          std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < names.size(); ++i) ExpectTensor(r, names[i], *slots[i], where);

  ckpt.optimizer.step = static_cast<std::int64_t>(r.Get<std::uint64_t>());
  const auto moments = r.Get<std::uint32_t>();
  if (moments != 0 && moments != 2 * names.size()) {
    throw CheckpointError(where + ": " + std::to_string(moments) + " optimizer tensors for " +
                          std::to_string(names.size()) + " parameters");
  }
  if (moments) {
    ckpt.optimizer.m.resize(names.size());
    ckpt.optimizer.v.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      ckpt.optimizer.m[i] = Tensor(slots[i]->shape());
      ExpectTensor(r, "m:" + names[i], ckpt.optimizer.m[i], where);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      ckpt.optimizer.v[i] = Tensor(slots[i]->shape());
      ExpectTensor(r, "v:" + names[i], ckpt.optimizer.v[i], where);
    }
  }
  if (!r.done()) throw CheckpointError(where + ": trailing bytes after optimizer state");
  return ckpt;
}

}  // namespace vqk
