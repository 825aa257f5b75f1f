#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hrl4in {

struct Vec2i {
  int x = 0;
  int y = 0;
  friend bool operator==(const Vec2i&, const Vec2i&) = default;
};

// Configuration problems: bad layout files, inconsistent configs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: stepping a done episode, empty buffers, shape mismatches.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// splitmix64, used to derive independent seed streams from one master seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable seed for a named stream ("env/3", "policy_ll", ...) under a master
// seed. FNV-1a over the tag, mixed with the master through splitmix64.
inline uint64_t derive_seed(uint64_t master, const std::string& tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  uint64_t s = master ^ h;
  return splitmix64(s);
}

}  // namespace hrl4in
