#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "deptrail/errors.hpp"

namespace deptrail {

/// Dense row-major 2D grid. The one container everything else is built on.
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    require(rows > 0 && cols > 0, ErrorCode::NonPositiveDims,
            "grid dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

struct Rect {
  int r0 = 0;
  int c0 = 0;
  int rows = 0;
  int cols = 0;
};

/// Tight bounding box of nonzero cells; nullopt for an all-zero grid.
template <typename T>
std::optional<Rect> nonzero_bbox(const Grid<T>& g) {
  int rmin = g.rows(), rmax = -1, cmin = g.cols(), cmax = -1;
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      if (g(r, c) != T{}) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
      }
    }
  }
  if (rmax < 0) return std::nullopt;
  return Rect{rmin, cmin, rmax - rmin + 1, cmax - cmin + 1};
}

template <typename T>
Grid<T> crop(const Grid<T>& g, const Rect& rect) {
  require(rect.r0 >= 0 && rect.c0 >= 0 && rect.rows > 0 && rect.cols > 0 &&
              rect.r0 + rect.rows <= g.rows() && rect.c0 + rect.cols <= g.cols(),
          ErrorCode::InvalidArgument, "crop rect outside grid");
  Grid<T> out(rect.rows, rect.cols);
  for (int r = 0; r < rect.rows; ++r)
    for (int c = 0; c < rect.cols; ++c) out(r, c) = g(rect.r0 + r, rect.c0 + c);
  return out;
}

/// Bilinear resampling with half-pixel centers and clamped borders.
inline Grid<float> resize_bilinear(const Grid<float>& src, int out_rows, int out_cols) {
  require(out_rows > 0 && out_cols > 0, ErrorCode::NonPositiveDims,
          "resize target must be positive");
  if (src.rows() == out_rows && src.cols() == out_cols) return src;
  Grid<float> dst(out_rows, out_cols);
  const double scale_r = static_cast<double>(src.rows()) / out_rows;
  const double scale_c = static_cast<double>(src.cols()) / out_cols;
  for (int r = 0; r < out_rows; ++r) {
    const double fr = (r + 0.5) * scale_r - 0.5;
    int r0 = static_cast<int>(std::floor(fr));
    const double wr = fr - r0;
    int r1 = std::clamp(r0 + 1, 0, src.rows() - 1);
    r0 = std::clamp(r0, 0, src.rows() - 1);
    for (int c = 0; c < out_cols; ++c) {
      const double fc = (c + 0.5) * scale_c - 0.5;
      int c0 = static_cast<int>(std::floor(fc));
      const double wc = fc - c0;
      int c1 = std::clamp(c0 + 1, 0, src.cols() - 1);
      c0 = std::clamp(c0, 0, src.cols() - 1);
      const double top = (1.0 - wc) * src(r0, c0) + wc * src(r0, c1);
      const double bot = (1.0 - wc) * src(r1, c0) + wc * src(r1, c1);
      dst(r, c) = static_cast<float>((1.0 - wr) * top + wr * bot);
    }
  }
  return dst;
}

/// Binary 8-bit PGM (P5) encoding of a byte grid.
inline std::vector<std::uint8_t> encode_pgm(const Grid<std::uint8_t>& img) {
  std::string header = "P5\n" + std::to_string(img.cols()) + " " +
                       std::to_string(img.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

}  // namespace deptrail
