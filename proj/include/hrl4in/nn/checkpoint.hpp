#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hrl4in/nn/optim.hpp"

namespace hrl4in::nn {

// Versioned container of named tensors, used for policy and optimizer state.
// Byte layout (little-endian):
//   magic   8 bytes  "HRL4INCK"
//   version u32      1
//   count   u32
//   entries: name_len u32 | name bytes | elem_size u8 (4|8) |
//            rows u32 | cols u32 | raw values (rows*cols*elem_size bytes)
class Checkpoint {
 public:
  static constexpr char kMagic[9] = "HRL4INCK";
  static constexpr uint32_t kVersion = 1;

  struct Entry {
    uint8_t elem_size = 0;
    uint32_t rows = 0, cols = 0;
    std::vector<unsigned char> raw;
  };

  template <typename T>
  void put(const std::string& name, const Tensor<T>& t) {
    Entry e;
    e.elem_size = sizeof(T);
    e.rows = static_cast<uint32_t>(t.rows);
    e.cols = static_cast<uint32_t>(t.cols);
    e.raw.resize(t.size() * sizeof(T));
    std::memcpy(e.raw.data(), t.v.data(), e.raw.size());
    entries_[name] = std::move(e);
  }

  void put_scalar(const std::string& name, double v) {
    put(name, Tensor<double>::scalar(v));
  }

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }

  template <typename T>
  Tensor<T> get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("checkpoint: missing entry '" + name + "'");
    const Entry& e = it->second;
    if (e.elem_size != sizeof(T))
      throw ConfigError("checkpoint: precision mismatch for '" + name + "'");
    Tensor<T> t(static_cast<int>(e.rows), static_cast<int>(e.cols));
    std::memcpy(t.v.data(), e.raw.data(), e.raw.size());
    return t;
  }

  double get_scalar(const std::string& name) const { return get<double>(name)[0]; }

  template <typename T>
  void put_params(const std::string& prefix, const std::vector<Parameter<T>*>& params) {
    for (const Parameter<T>* p : params) put(prefix + p->name, p->value);
  }

  template <typename T>
  void load_params(const std::string& prefix, const std::vector<Parameter<T>*>& params) const {
    for (Parameter<T>* p : params) {
      Tensor<T> t = get<T>(prefix + p->name);
      if (!t.same_shape(p->value))
        throw ConfigError("checkpoint: shape mismatch for '" + p->name + "'");
      p->value = std::move(t);
    }
  }

  template <typename T>
  void put_adam(const std::string& prefix, Adam<T>& opt) {
    const auto& params = opt.params();
    for (size_t i = 0; i < params.size(); ++i) {
      put(prefix + "adam/m/" + params[i]->name, opt.slots()[i].m);
      put(prefix + "adam/v/" + params[i]->name, opt.slots()[i].v);
    }
    put_scalar(prefix + "adam/t", static_cast<double>(opt.step_count()));
  }

  template <typename T>
  void load_adam(const std::string& prefix, Adam<T>& opt) const {
    const auto& params = opt.params();
    for (size_t i = 0; i < params.size(); ++i) {
      opt.slots()[i].m = get<T>(prefix + "adam/m/" + params[i]->name);
      opt.slots()[i].v = get<T>(prefix + "adam/v/" + params[i]->name);
    }
    opt.set_step_count(static_cast<int64_t>(get_scalar(prefix + "adam/t")));
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("checkpoint: cannot write '" + path + "'");
    f.write(kMagic, 8);
    write_u32(f, kVersion);
    write_u32(f, static_cast<uint32_t>(entries_.size()));
    for (const auto& [name, e] : entries_) {
      write_u32(f, static_cast<uint32_t>(name.size()));
      f.write(name.data(), static_cast<std::streamsize>(name.size()));
      f.put(static_cast<char>(e.elem_size));
      write_u32(f, e.rows);
      write_u32(f, e.cols);
      f.write(reinterpret_cast<const char*>(e.raw.data()),
              static_cast<std::streamsize>(e.raw.size()));
    }
    if (!f) throw ConfigError("checkpoint: write failed for '" + path + "'");
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("checkpoint: cannot open '" + path + "'");
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
      throw ConfigError("checkpoint: bad magic in '" + path + "'");
    if (read_u32(f) != kVersion) throw ConfigError("checkpoint: unsupported version");
    uint32_t count = read_u32(f);
    Checkpoint ck;
    for (uint32_t i = 0; i < count; ++i) {
      uint32_t name_len = read_u32(f);
      std::string name(name_len, '\0');
      f.read(name.data(), name_len);
      Entry e;
      e.elem_size = static_cast<uint8_t>(f.get());
      e.rows = read_u32(f);
      e.cols = read_u32(f);
      e.raw.resize(static_cast<size_t>(e.rows) * e.cols * e.elem_size);
      f.read(reinterpret_cast<char*>(e.raw.data()),
             static_cast<std::streamsize>(e.raw.size()));
      if (!f) throw ConfigError("checkpoint: truncated file '" + path + "'");
      ck.entries_[name] = std::move(e);
    }
    return ck;
  }

 private:
  std::map<std::string, Entry> entries_;

  static void write_u32(std::ofstream& f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<char*>(b), 4);
  }
  static uint32_t read_u32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }
};

}  // namespace hrl4in::nn
