#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"

namespace deptrail {

enum class MotionProgram {
  TranslateRight,
  TranslateLeft,
  Oscillate,
  Grow,
  StaticPose,
  StaticArmRaise,
};

inline const char* to_string(MotionProgram p) {
  switch (p) {
    case MotionProgram::TranslateRight: return "translate_right";
    case MotionProgram::TranslateLeft: return "translate_left";
    case MotionProgram::Oscillate: return "oscillate";
    case MotionProgram::Grow: return "grow";
    case MotionProgram::StaticPose: return "static_pose";
    case MotionProgram::StaticArmRaise: return "static_arm_raise";
  }
  return "?";
}

inline MotionProgram parse_motion_program(const std::string& name) {
  for (MotionProgram p :
       {MotionProgram::TranslateRight, MotionProgram::TranslateLeft, MotionProgram::Oscillate,
        MotionProgram::Grow, MotionProgram::StaticPose, MotionProgram::StaticArmRaise}) {
    if (name == to_string(p)) return p;
  }
  fail(ErrorCode::ParseError, "unknown motion program '" + name + "'");
}

/// Deterministic desk-scale dataset: one blob actor per sample executing its
/// class's motion program, with subject/trial-dependent geometry offsets.
struct SynthSpec {
  std::vector<MotionProgram> classes = {MotionProgram::TranslateRight,
                                        MotionProgram::Oscillate,
                                        MotionProgram::StaticArmRaise};
  int subjects = 4;
  int trials = 5;
  int width = 32;
  int height = 32;
  int frames = 16;
  int noise_amplitude = 0;
  std::uint64_t seed = 1;

  void validate() const {
    require(!classes.empty() && subjects >= 1 && trials >= 1, ErrorCode::InvalidArgument,
            "classes/subjects/trials must be >= 1");
    require(width >= 8 && height >= 8, ErrorCode::InvalidArgument,
            "frame size must be at least 8x8");
    require(frames >= 2, ErrorCode::InvalidArgument, "need at least 2 frames");
    require(noise_amplitude >= 0, ErrorCode::InvalidArgument,
            "noise amplitude must be >= 0");
  }
};

namespace detail {

// splitmix64; standardized output, no distribution-dependent behavior
struct SynthRng {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

inline std::uint64_t mix_seed(std::uint64_t seed, int a, int s, int e) {
  SynthRng rng{seed ^ (static_cast<std::uint64_t>(a) << 40) ^
               (static_cast<std::uint64_t>(s) << 20) ^ static_cast<std::uint64_t>(e)};
  return rng.next();
}

inline void fill_rect(DepthFrame& f, int r0, int c0, int h, int w, std::uint16_t depth) {
  const int r1 = std::min(f.height, r0 + h);
  const int c1 = std::min(f.width, c0 + w);
  for (int r = std::max(0, r0); r < r1; ++r)
    for (int c = std::max(0, c0); c < c1; ++c) f.at(r, c) = depth;
}

inline void fill_ellipse(DepthFrame& f, double cr, double cc, double rr, double rc,
                         std::uint16_t depth) {
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      const double dr = (r - cr) / rr;
      const double dc = (c - cc) / rc;
      if (dr * dr + dc * dc <= 1.0) f.at(r, c) = depth;
    }
  }
}

}  // namespace detail

/// Render one sample. Geometry is a pure function of (program, subject,
/// trial, frame); the seed only drives the optional depth noise, so zero
/// noise keeps construction symmetries (e.g. left/right mirrors) exact.
inline DepthSequence render_synth_sample(const SynthSpec& spec, MotionProgram program,
                                         int action_id, int subject, int trial) {
  const int W = spec.width;
  const int H = spec.height;
  const int body_w = std::max(4, W / 4 + (subject % 3) - 1);
  const int body_h = std::max(5, H / 2 + ((subject + 1) % 3) - 1);
  // fast enough that every subject's translation reaches the frame edge, so
  // the static trail keeps the same ramp-plus-rest structure across subjects
  const int speed = 2 + (subject % 2);
  const std::uint16_t plateau = static_cast<std::uint16_t>(
      300 + 20 * ((subject - 1) % 5) + 4 * ((trial - 1) % 3));
  const int x_start = 1 + ((trial - 1) % 2);
  const int y0 = (H - body_h) / 2;

  detail::SynthRng noise_rng{detail::mix_seed(spec.seed, action_id, subject, trial)};

  DepthSequence seq;
  seq.action_id = action_id;
  seq.subject_id = subject;
  seq.trial_id = trial;
  seq.frames.reserve(spec.frames);

  for (int t = 0; t < spec.frames; ++t) {
    DepthFrame frame;
    frame.width = W;
    frame.height = H;
    frame.depth.assign(static_cast<std::size_t>(W) * H, 0);

    switch (program) {
      case MotionProgram::TranslateRight: {
        const int x0 = std::clamp(x_start + speed * t, 0, W - body_w);
        detail::fill_rect(frame, y0, x0, body_h, body_w, plateau);
        break;
      }
      case MotionProgram::TranslateLeft: {
        // exact column mirror of TranslateRight for the same (subject, trial)
        const int x0 = W - body_w - std::clamp(x_start + speed * t, 0, W - body_w);
        detail::fill_rect(frame, y0, x0, body_h, body_w, plateau);
        break;
      }
      case MotionProgram::Oscillate: {
        // vertical bob, so its trail never shares pixels with the translate trails
        const int amp = 3 + (subject % 2);
        const int period = 8;
        const double phase = 2.0 * std::numbers::pi * ((trial - 1) % 4) / 8.0;
        const int x0 = (W - body_w) / 2;
        const int yt = std::clamp(
            y0 + static_cast<int>(std::lround(
                     amp * std::sin(2.0 * std::numbers::pi * t / period + phase))),
            0, H - body_h);
        detail::fill_rect(frame, yt, x0, body_h, body_w, plateau);
        break;
      }
      case MotionProgram::Grow: {
        const double growth = 0.5 + 0.25 * (subject % 2);
        const double rr = std::min(H / 2.0 - 1.0, body_h / 2.0 + growth * t);
        const double rc = std::min(W / 2.0 - 1.0, body_w / 2.0 + growth * t);
        detail::fill_ellipse(frame, (H - 1) / 2.0, (W - 1) / 2.0, rr, rc, plateau);
        break;
      }
      case MotionProgram::StaticPose: {
        detail::fill_rect(frame, y0, (W - body_w) / 2, body_h, body_w, plateau);
        break;
      }
      case MotionProgram::StaticArmRaise: {
        const int x0 = (W - body_w) / 2;
        detail::fill_rect(frame, y0, x0, body_h, body_w, plateau);
        const int rate = 1 + (subject % 2);
        const int arm_len = std::min(y0, rate * t);
        const std::uint16_t arm_depth = static_cast<std::uint16_t>(plateau - 40);
        if (arm_len > 0)
          detail::fill_rect(frame, y0 - arm_len, x0 + body_w - 2, arm_len, 2, arm_depth);
        break;
      }
    }

    if (spec.noise_amplitude > 0) {
      for (auto& d : frame.depth) {
        if (d == 0) continue;
        const int jitter = noise_rng.range(-spec.noise_amplitude, spec.noise_amplitude);
        d = static_cast<std::uint16_t>(std::max(1, static_cast<int>(d) + jitter));
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

/// Full dataset in (action, subject, trial) order, byte-deterministic under
/// the spec's seed.
inline std::vector<DepthSequence> generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<DepthSequence> out;
  out.reserve(static_cast<std::size_t>(spec.classes.size()) * spec.subjects * spec.trials);
  for (std::size_t ci = 0; ci < spec.classes.size(); ++ci)
    for (int s = 1; s <= spec.subjects; ++s)
      for (int e = 1; e <= spec.trials; ++e)
        out.push_back(render_synth_sample(spec, spec.classes[ci],
                                          static_cast<int>(ci) + 1, s, e));
  return out;
}

}  // namespace deptrail
