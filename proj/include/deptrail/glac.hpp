#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "deptrail/errors.hpp"
#include "deptrail/grid.hpp"

namespace deptrail {

enum class GradientOperator { Roberts, Sobel, Central1D };

inline const char* to_string(GradientOperator op) {
  switch (op) {
    case GradientOperator::Roberts: return "roberts";
    case GradientOperator::Sobel: return "sobel";
    case GradientOperator::Central1D: return "central1d";
  }
  return "?";
}

inline GradientOperator parse_gradient_operator(const std::string& name) {
  for (GradientOperator op :
       {GradientOperator::Roberts, GradientOperator::Sobel, GradientOperator::Central1D}) {
    if (name == to_string(op)) return op;
  }
  fail(ErrorCode::ParseError, "unknown gradient operator '" + name + "'");
}

/// Gradient local auto-correlation parameters. Per spatial cell the
/// descriptor holds D zeroth-order entries followed by 4*D*D first-order
/// entries (one D x D block per shift pattern).
struct GlacConfig {
  int bins = 8;               // D
  int delta_r = 1;            // shift distance in pixels
  int spatial_rows = 1;       // b_s grid
  int spatial_cols = 2;
  GradientOperator gradient_operator = GradientOperator::Roberts;
  bool signed_orientation = true;  // full [0, 2pi) circle; false folds to [0, pi)

  int cell_length() const { return bins + 4 * bins * bins; }
  int descriptor_length() const { return spatial_rows * spatial_cols * cell_length(); }

  void validate() const {
    require(bins >= 2, ErrorCode::InvalidArgument, "need at least 2 orientation bins");
    require(delta_r >= 1, ErrorCode::InvalidArgument, "delta_r must be >= 1");
    require(spatial_rows >= 1 && spatial_cols >= 1, ErrorCode::InvalidArgument,
            "spatial grid must be at least 1x1");
  }
};

/// Per-pixel gradient magnitude and orientation. Orientation is wrapped into
/// [0, period) where period is 2*pi (signed) or pi (unsigned); pixels whose
/// stencil leaves the image carry magnitude 0.
struct GradientField {
  Grid<double> magnitude;
  Grid<double> orientation;
  double period = 2.0 * std::numbers::pi;
};

inline GradientField gradient_field(const Grid<float>& image, GradientOperator op,
                                    bool signed_orientation = true) {
  require(image.rows() >= 2 && image.cols() >= 2, ErrorCode::ImageTooSmall,
          "gradient needs at least a 2x2 image");
  const int rows = image.rows();
  const int cols = image.cols();
  GradientField field;
  field.magnitude = Grid<double>(rows, cols);
  field.orientation = Grid<double>(rows, cols);
  field.period = signed_orientation ? 2.0 * std::numbers::pi : std::numbers::pi;

  const auto set = [&](int r, int c, double gx, double gy) {
    const double m = std::hypot(gx, gy);
    field.magnitude(r, c) = m;
    if (m == 0.0) return;  // orientation stays 0, carries no vote weight
    double theta = std::atan2(gy, gx);
    theta = std::fmod(theta + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    if (!signed_orientation) theta = std::fmod(theta, std::numbers::pi);
    if (theta >= field.period) theta = 0.0;  // fmod rounding guard
    field.orientation(r, c) = theta;
  };

  switch (op) {
    case GradientOperator::Roberts:
      // 2x2 cross pair; the axes sit at 45 degrees to the raster but the
      // descriptor only needs a consistent orientation frame.
      for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c)
          set(r, c, image(r, c) - image(r + 1, c + 1),
              image(r, c + 1) - image(r + 1, c));
      break;
    case GradientOperator::Sobel:
      for (int r = 1; r + 1 < rows; ++r) {
        for (int c = 1; c + 1 < cols; ++c) {
          const double gx = (image(r - 1, c + 1) + 2.0 * image(r, c + 1) + image(r + 1, c + 1)) -
                            (image(r - 1, c - 1) + 2.0 * image(r, c - 1) + image(r + 1, c - 1));
          const double gy = (image(r + 1, c - 1) + 2.0 * image(r + 1, c) + image(r + 1, c + 1)) -
                            (image(r - 1, c - 1) + 2.0 * image(r - 1, c) + image(r - 1, c + 1));
          set(r, c, gx, gy);
        }
      }
      break;
    case GradientOperator::Central1D:
      for (int r = 1; r + 1 < rows; ++r)
        for (int c = 1; c + 1 < cols; ++c)
          set(r, c, image(r, c + 1) - image(r, c - 1), image(r + 1, c) - image(r - 1, c));
      break;
  }
  return field;
}

/// Orientation vote split over the two nearest of D evenly spaced bin
/// centers; the two weights always sum to 1 (both carried by bin_a when the
/// angle sits exactly on a center). Zero-magnitude pixels vote nothing.
struct OrientationVote {
  int bin_a = 0;
  double w_a = 0.0;
  int bin_b = 0;
  double w_b = 0.0;
};

inline OrientationVote orientation_code(double theta, double magnitude, int bins,
                                        double period = 2.0 * std::numbers::pi) {
  if (magnitude <= 0.0) return {0, 0.0, 0, 0.0};
  const double pos = theta / period * bins;  // in [0, bins)
  int lo = static_cast<int>(std::floor(pos));
  double frac = pos - lo;
  lo %= bins;
  if (lo < 0) lo += bins;
  const int hi = (lo + 1) % bins;
  const double w_a = 1.0 - frac;
  return {lo, w_a, hi, 1.0 - w_a};
}

struct Region {
  int r0 = 0;
  int c0 = 0;
  int rows = 0;
  int cols = 0;
};

// First-order shift patterns, written (dx, dy) with y growing downward:
// (dr, 0), (0, dr), (dr, dr), (dr, -dr). Their negations are redundant by
// the symmetry of the correlation sum.
inline std::array<std::pair<int, int>, 4> shift_patterns(int delta_r) {
  return {{{0, delta_r}, {delta_r, 0}, {delta_r, delta_r}, {-delta_r, delta_r}}};  // (dy, dx)
}

namespace detail {
inline void check_region(const GradientField& field, const Region& region) {
  require(region.rows > 0 && region.cols > 0, ErrorCode::EmptyRegion, "empty region");
  require(region.r0 >= 0 && region.c0 >= 0 &&
              region.r0 + region.rows <= field.magnitude.rows() &&
              region.c0 + region.cols <= field.magnitude.cols(),
          ErrorCode::InvalidArgument, "region outside image");
}
}  // namespace detail

/// Zeroth-order sum: F0[d] = sum_r m(r) * g_d(r) over the region.
inline std::vector<double> glac_0(const GradientField& field, const Region& region, int bins) {
  detail::check_region(field, region);
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  for (int r = region.r0; r < region.r0 + region.rows; ++r) {
    for (int c = region.c0; c < region.c0 + region.cols; ++c) {
      const double m = field.magnitude(r, c);
      if (m == 0.0) continue;
      const auto vote = orientation_code(field.orientation(r, c), m, bins, field.period);
      out[vote.bin_a] += m * vote.w_a;
      out[vote.bin_b] += m * vote.w_b;
    }
  }
  return out;
}

/// First-order sums over the four shift patterns:
///   F1[p][d0][d1] = sum_r min(m(r), m(r+b_p)) * g_d0(r) * g_d1(r+b_p),
/// with terms whose partner pixel leaves the region skipped. Layout is
/// pattern-major, then d0, then d1.
inline std::vector<double> glac_1(const GradientField& field, const Region& region, int bins,
                                  int delta_r) {
  detail::check_region(field, region);
  require(delta_r >= 1, ErrorCode::InvalidArgument, "delta_r must be >= 1");
  const auto patterns = shift_patterns(delta_r);
  std::vector<double> out(static_cast<std::size_t>(4) * bins * bins, 0.0);
  for (int p = 0; p < 4; ++p) {
    const auto [dy, dx] = patterns[p];
    double* block = out.data() + static_cast<std::size_t>(p) * bins * bins;
    for (int r = region.r0; r < region.r0 + region.rows; ++r) {
      const int r2 = r + dy;
      if (r2 < region.r0 || r2 >= region.r0 + region.rows) continue;
      for (int c = region.c0; c < region.c0 + region.cols; ++c) {
        const int c2 = c + dx;
        if (c2 < region.c0 || c2 >= region.c0 + region.cols) continue;
        const double m0 = field.magnitude(r, c);
        const double m1 = field.magnitude(r2, c2);
        if (m0 == 0.0 || m1 == 0.0) continue;
        const double w = std::min(m0, m1);
        const auto v0 = orientation_code(field.orientation(r, c), m0, bins, field.period);
        const auto v1 = orientation_code(field.orientation(r2, c2), m1, bins, field.period);
        block[v0.bin_a * bins + v1.bin_a] += w * v0.w_a * v1.w_a;
        block[v0.bin_a * bins + v1.bin_b] += w * v0.w_a * v1.w_b;
        block[v0.bin_b * bins + v1.bin_a] += w * v0.w_b * v1.w_a;
        block[v0.bin_b * bins + v1.bin_b] += w * v0.w_b * v1.w_b;
      }
    }
  }
  return out;
}

/// Equal spatial cells, remainder pixels assigned to the last row/column.
inline Region spatial_cell(int image_rows, int image_cols, int grid_rows, int grid_cols,
                           int cell_r, int cell_c) {
  const int base_h = image_rows / grid_rows;
  const int base_w = image_cols / grid_cols;
  Region region;
  region.r0 = cell_r * base_h;
  region.c0 = cell_c * base_w;
  region.rows = (cell_r == grid_rows - 1) ? image_rows - region.r0 : base_h;
  region.cols = (cell_c == grid_cols - 1) ? image_cols - region.c0 : base_w;
  return region;
}

/// Full per-image descriptor: the gradient field is computed once, then
/// [F0; F1] per spatial cell, cells concatenated row-major.
inline std::vector<double> glac_descriptor(const Grid<float>& image, const GlacConfig& cfg) {
  cfg.validate();
  require(image.rows() >= cfg.spatial_rows && image.cols() >= cfg.spatial_cols,
          ErrorCode::ImageTooSmall, "image smaller than the spatial grid");
  require(image.rows() >= 2 && image.cols() >= 2, ErrorCode::ImageTooSmall,
          "gradient needs at least a 2x2 image");
  const GradientField field =
      gradient_field(image, cfg.gradient_operator, cfg.signed_orientation);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.descriptor_length()));
  for (int cr = 0; cr < cfg.spatial_rows; ++cr) {
    for (int cc = 0; cc < cfg.spatial_cols; ++cc) {
      const Region region = spatial_cell(image.rows(), image.cols(), cfg.spatial_rows,
                                         cfg.spatial_cols, cr, cc);
      const auto f0 = glac_0(field, region, cfg.bins);
      const auto f1 = glac_1(field, region, cfg.bins, cfg.delta_r);
      out.insert(out.end(), f0.begin(), f0.end());
      out.insert(out.end(), f1.begin(), f1.end());
    }
  }
  return out;
}

}  // namespace deptrail
