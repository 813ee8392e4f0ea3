#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/grid.hpp"

namespace deptrail {

enum class Plane { xOy = 0, yOz = 1, xOz = 2 };
enum class TemplateKind { MHI = 0, SHI = 1 };

inline const char* to_string(Plane p) {
  switch (p) {
    case Plane::xOy: return "xOy";
    case Plane::yOz: return "yOz";
    case Plane::xOz: return "xOz";
  }
  return "?";
}

inline const char* to_string(TemplateKind k) {
  return k == TemplateKind::MHI ? "MHI" : "SHI";
}

struct MtmConfig {
  double zeta_m = 10.0;  // motion threshold, raw depth units (front plane)
  double zeta_s = 10.0;  // static threshold, raw depth units (front plane)
  int z_bins = 64;
  std::optional<std::pair<double, double>> z_range;  // nullopt = scan the sequence

  void validate() const {
    require(zeta_m > 0 && zeta_s > 0, ErrorCode::InvalidArgument,
            "thresholds must be positive");
    require(z_bins >= 1, ErrorCode::InvalidArgument, "z_bins must be >= 1");
    if (z_range)
      require(z_range->first < z_range->second, ErrorCode::InvalidArgument,
              "explicit z_range needs min < max");
  }
};

// The occupancy planes carry {0,1} values, so any threshold in (0,1) means
// "any flip is motion / stable occupancy is static". The raw-unit config
// thresholds apply to the depth-valued front plane only.
inline constexpr double kOccupancyThreshold = 0.5;

/// Front (the depth map itself), side (z,y) and top (x,z) occupancy views of
/// one frame. Side cell (z_bin, y) and top cell (x, z_bin) are 1 when any
/// nonzero pixel of that row/column quantizes to z_bin.
struct ProjectionTriple {
  Grid<float> front;  // height x width, raw depth
  Grid<float> side;   // z_bins x height, binary
  Grid<float> top;    // width x z_bins, binary
  int z_bins = 0;
};

inline int quantize_depth(double depth, double z_min, double z_max, int z_bins) {
  if (z_max <= z_min) return 0;
  const int bin = static_cast<int>(std::floor((depth - z_min) / (z_max - z_min) * z_bins));
  return std::clamp(bin, 0, z_bins - 1);
}

/// Depth range actually used for quantization: the config's explicit range,
/// or the [min, max] of nonzero depths over the whole sequence.
inline std::pair<double, double> resolve_z_range(const DepthSequence& seq,
                                                 const MtmConfig& cfg) {
  if (cfg.z_range) return *cfg.z_range;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& f : seq.frames) {
    for (std::uint16_t d : f.depth) {
      if (d == 0) continue;
      lo = std::min(lo, static_cast<double>(d));
      hi = std::max(hi, static_cast<double>(d));
    }
  }
  if (lo > hi) return {0.0, 0.0};  // all-background sequence
  return {lo, hi};
}

inline ProjectionTriple project_frame(const DepthFrame& frame, const MtmConfig& cfg) {
  frame.validate();
  cfg.validate();
  double z_min, z_max;
  if (cfg.z_range) {
    z_min = cfg.z_range->first;
    z_max = cfg.z_range->second;
  } else {
    // single-frame auto mode; compute_mtm resolves the range over the sequence
    z_min = std::numeric_limits<double>::infinity();
    z_max = -std::numeric_limits<double>::infinity();
    for (std::uint16_t d : frame.depth) {
      if (d == 0) continue;
      z_min = std::min(z_min, static_cast<double>(d));
      z_max = std::max(z_max, static_cast<double>(d));
    }
    if (z_min > z_max) z_min = z_max = 0.0;
  }

  ProjectionTriple out;
  out.z_bins = cfg.z_bins;
  out.front = Grid<float>(frame.height, frame.width);
  out.side = Grid<float>(cfg.z_bins, frame.height);
  out.top = Grid<float>(frame.width, cfg.z_bins);
  for (int r = 0; r < frame.height; ++r) {
    for (int c = 0; c < frame.width; ++c) {
      const std::uint16_t d = frame.at(r, c);
      out.front(r, c) = static_cast<float>(d);
      if (d == 0) continue;
      if (cfg.z_range)
        require(d >= z_min && d <= z_max, ErrorCode::DepthOutOfRange,
                "depth " + std::to_string(d) + " outside explicit z_range");
      const int bin = quantize_depth(d, z_min, z_max, cfg.z_bins);
      out.side(bin, r) = 1.0f;
      out.top(c, bin) = 1.0f;
    }
  }
  return out;
}

/// Motion update: 1 where the inter-frame difference magnitude exceeds the
/// threshold (strict inequality).
inline Grid<std::uint8_t> motion_update(const Grid<float>& prev, const Grid<float>& cur,
                                        double zeta_m) {
  require(prev.same_shape(cur), ErrorCode::ShapeMismatch,
          "motion_update needs same-shape grids");
  Grid<std::uint8_t> out(cur.rows(), cur.cols());
  for (int r = 0; r < cur.rows(); ++r)
    for (int c = 0; c < cur.cols(); ++c)
      out(r, c) = std::abs(cur(r, c) - prev(r, c)) > zeta_m ? 1 : 0;
  return out;
}

/// Static update: 1 where a pixel is present and not moving, i.e. its value
/// minus the difference magnitude still exceeds the threshold.
inline Grid<std::uint8_t> static_update(const Grid<float>& prev, const Grid<float>& cur,
                                        double zeta_s) {
  require(prev.same_shape(cur), ErrorCode::ShapeMismatch,
          "static_update needs same-shape grids");
  Grid<std::uint8_t> out(cur.rows(), cur.cols());
  for (int r = 0; r < cur.rows(); ++r)
    for (int c = 0; c < cur.cols(); ++c)
      out(r, c) = cur(r, c) - std::abs(cur(r, c) - prev(r, c)) > zeta_s ? 1 : 0;
  return out;
}

/// One history template: values in [0, horizon], where a pixel whose update
/// fired at the final step holds exactly horizon.
struct HistoryImage {
  Plane plane = Plane::xOy;
  TemplateKind kind = TemplateKind::MHI;
  Grid<float> values;
  int horizon = 0;
};

/// Fold T-1 consecutive update maps into a history template: a firing pixel
/// jumps to T, anything else decays by 1 per step, clamped at 0 from an
/// all-zero initial state.
inline HistoryImage fold_history(const std::vector<Grid<std::uint8_t>>& updates, int horizon,
                                 Plane plane = Plane::xOy,
                                 TemplateKind kind = TemplateKind::MHI) {
  require(!updates.empty(), ErrorCode::EmptyInput, "fold_history needs update maps");
  require(horizon == static_cast<int>(updates.size()) + 1, ErrorCode::DimensionMismatch,
          "expected horizon-1 update maps");
  HistoryImage h;
  h.plane = plane;
  h.kind = kind;
  h.horizon = horizon;
  h.values = Grid<float>(updates.front().rows(), updates.front().cols());
  for (const auto& u : updates) {
    require(u.same_shape(updates.front()), ErrorCode::ShapeMismatch,
            "update maps must share one shape");
    for (int r = 0; r < u.rows(); ++r)
      for (int c = 0; c < u.cols(); ++c)
        h.values(r, c) = u(r, c) ? static_cast<float>(horizon)
                                 : std::max(0.0f, h.values(r, c) - 1.0f);
  }
  return h;
}

/// The six templates of one sequence plus the sample metadata they came from.
struct MtmOutput {
  std::array<HistoryImage, 3> mhi;  // indexed by Plane
  std::array<HistoryImage, 3> shi;
  int action_id = 0;
  int subject_id = 0;
  int trial_id = 0;
  std::string sample_id;

  const HistoryImage& get(Plane p, TemplateKind k) const {
    return (k == TemplateKind::MHI ? mhi : shi)[static_cast<int>(p)];
  }
};

inline MtmOutput compute_mtm(const DepthSequence& seq, const MtmConfig& cfg) {
  seq.validate();
  cfg.validate();
  MtmConfig resolved = cfg;
  resolved.z_range = resolve_z_range(seq, cfg);
  if (resolved.z_range->first >= resolved.z_range->second)
    resolved.z_range = std::nullopt;  // degenerate range: single-bin quantization

  const int horizon = seq.length();
  std::vector<ProjectionTriple> projections;
  projections.reserve(seq.frames.size());
  for (const auto& f : seq.frames) projections.push_back(project_frame(f, resolved));

  MtmOutput out;
  out.action_id = seq.action_id;
  out.subject_id = seq.subject_id;
  out.trial_id = seq.trial_id;
  out.sample_id = seq.id();

  const auto plane_grid = [](const ProjectionTriple& p, Plane plane) -> const Grid<float>& {
    switch (plane) {
      case Plane::xOy: return p.front;
      case Plane::yOz: return p.side;
      default: return p.top;
    }
  };

  for (Plane plane : {Plane::xOy, Plane::yOz, Plane::xOz}) {
    const bool occupancy = plane != Plane::xOy;
    const double zm = occupancy ? kOccupancyThreshold : cfg.zeta_m;
    const double zs = occupancy ? kOccupancyThreshold : cfg.zeta_s;
    std::vector<Grid<std::uint8_t>> motion, still;
    motion.reserve(seq.frames.size() - 1);
    still.reserve(seq.frames.size() - 1);
    for (std::size_t t = 1; t < projections.size(); ++t) {
      const Grid<float>& prev = plane_grid(projections[t - 1], plane);
      const Grid<float>& cur = plane_grid(projections[t], plane);
      motion.push_back(motion_update(prev, cur, zm));
      still.push_back(static_update(prev, cur, zs));
    }
    out.mhi[static_cast<int>(plane)] = fold_history(motion, horizon, plane, TemplateKind::MHI);
    out.shi[static_cast<int>(plane)] = fold_history(still, horizon, plane, TemplateKind::SHI);
  }
  return out;
}

/// Scale values into [0, 1] by the horizon. The result carries horizon 1, so
/// normalizing twice is a no-op.
inline HistoryImage normalize_history(const HistoryImage& h) {
  require(h.horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  HistoryImage out = h;
  if (h.horizon > 1) {
    const float inv = 1.0f / static_cast<float>(h.horizon);
    for (auto& v : out.values.data()) v *= inv;
  }
  out.horizon = 1;
  return out;
}

/// Descriptor-input conditioning: normalize, crop to the nonzero bounding box
/// (skipped for all-zero templates), then resize to a fixed size.
struct TemplatePrep {
  bool crop = true;
  int rows = 64;
  int cols = 64;
};

inline Grid<float> prepare_template(const HistoryImage& h, const TemplatePrep& prep) {
  Grid<float> img = normalize_history(h).values;
  if (prep.crop) {
    if (auto box = nonzero_bbox(img)) img = crop(img, *box);
  }
  return resize_bilinear(img, prep.rows, prep.cols);
}

/// 8-bit PGM rendering, value * 255 / horizon rounded half-up.
inline std::vector<std::uint8_t> history_to_pgm(const HistoryImage& h) {
  Grid<std::uint8_t> img(h.values.rows(), h.values.cols());
  const double scale = 255.0 / std::max(1, h.horizon);
  for (int r = 0; r < h.values.rows(); ++r)
    for (int c = 0; c < h.values.cols(); ++c)
      img(r, c) = static_cast<std::uint8_t>(
          std::min(255.0, std::floor(h.values(r, c) * scale + 0.5)));
  return encode_pgm(img);
}

inline std::string pgm_filename(const std::string& sample_id, Plane plane, TemplateKind kind) {
  return sample_id + "_" + to_string(plane) + "_" + to_string(kind) + ".pgm";
}

}  // namespace deptrail
