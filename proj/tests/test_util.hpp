#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/grid.hpp"

// Checks that `expr` throws deptrail::Error with exactly `code_`.
#define REQUIRE_ERROR_CODE(expr, code_)                               \
  do {                                                                \
    bool thrown = false;                                              \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const deptrail::Error& err) {                            \
      thrown = true;                                                  \
      CHECK(err.code() == (code_));                                   \
    }                                                                 \
    REQUIRE(thrown);                                                  \
  } while (0)

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

template <typename Fn>
deptrail::DepthFrame make_frame(int width, int height, Fn&& value) {
  deptrail::DepthFrame f;
  f.width = width;
  f.height = height;
  f.depth.resize(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      f.at(r, c) = static_cast<std::uint16_t>(value(r, c));
  return f;
}

inline deptrail::DepthFrame random_frame(int width, int height, std::mt19937_64& gen,
                                         std::uint16_t max_depth = 4000) {
  std::uniform_int_distribution<int> dist(0, max_depth);
  return make_frame(width, height, [&](int, int) { return dist(gen); });
}

inline deptrail::DepthSequence random_sequence(int width, int height, int frames,
                                               std::mt19937_64& gen,
                                               std::uint16_t max_depth = 4000) {
  deptrail::DepthSequence seq;
  seq.action_id = 1;
  seq.subject_id = 1;
  seq.trial_id = 1;
  for (int t = 0; t < frames; ++t) seq.frames.push_back(random_frame(width, height, gen, max_depth));
  return seq;
}

inline deptrail::Grid<float> random_image(int rows, int cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  deptrail::Grid<float> img(rows, cols);
  for (auto& v : img.data()) v = dist(gen);
  return img;
}

inline std::string read_file_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Unique scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / (tag + "_" + std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp directory for " + tag);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace testutil
