#pragma once

// Small helpers shared by the test binaries: scratch directories and
// hand-rolled random generators. Everything is seeded so failures replay.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "scibench/io.hpp"

namespace scibench::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("scibench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  void write(const std::string& name, const std::string& contents) const {
    io::write_file_atomic(path_ / name, contents);
  }

 private:
  std::filesystem::path path_;
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t range(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  /// Lowercase ASCII word of 1..max_len letters drawn from the first
  /// `alphabet` letters, so collisions are common with a small alphabet.
  std::string word(std::size_t max_len = 3, std::size_t alphabet = 4) {
    std::string w(range(1, max_len), 'a');
    for (auto& c : w) c = static_cast<char>('a' + below(alphabet));
    return w;
  }

  std::vector<std::string> words(std::size_t n, std::size_t max_len = 3, std::size_t alphabet = 4) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(word(max_len, alphabet));
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace scibench::testing
