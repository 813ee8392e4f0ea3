#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "deptrail/errors.hpp"
#include "deptrail/grid.hpp"

namespace deptrail {

/// One depth map. Depth is row-major, 16-bit sensor units, 0 = background.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> depth;

  std::uint16_t at(int r, int c) const {
    return depth[static_cast<std::size_t>(r) * width + c];
  }
  std::uint16_t& at(int r, int c) {
    return depth[static_cast<std::size_t>(r) * width + c];
  }

  void validate() const {
    require(width > 0 && height > 0, ErrorCode::NonPositiveDims,
            "frame dimensions must be positive");
    require(depth.size() == static_cast<std::size_t>(width) * height,
            ErrorCode::DimensionMismatch, "depth grid length != width*height");
  }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;
};

/// Ordered frames of one action sample plus its recording metadata.
struct DepthSequence {
  std::vector<DepthFrame> frames;
  int subject_id = 0;
  int action_id = 0;
  int trial_id = 0;

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  int length() const { return static_cast<int>(frames.size()); }

  /// Canonical sample id, e.g. "a01_s03_e02".
  std::string id() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "a%02d_s%02d_e%02d", action_id, subject_id, trial_id);
    return buf;
  }

  void validate() const {
    require(frames.size() >= 2, ErrorCode::DimensionMismatch,
            "sequence needs at least 2 frames");
    for (const auto& f : frames) {
      f.validate();
      require(f.width == width() && f.height == height(), ErrorCode::DimensionMismatch,
              "all frames must share identical width/height");
    }
  }

  friend bool operator==(const DepthSequence&, const DepthSequence&) = default;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorCode::TruncatedStream,
            "stream ends inside a field");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Canonical sequence file, all little-endian:
//   magic "DSEQ", version u16 = 1, reserved u16 = 0,
//   frames u32, width u32, height u32,
//   subject u16, action u16, trial u16, pad u16 = 0,
//   then frames*height*width u16 depth values (row-major).
inline constexpr std::size_t kCanonicalHeaderSize = 28;

inline std::vector<std::uint8_t> write_canonical(const DepthSequence& seq) {
  seq.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kCanonicalHeaderSize +
              2 * seq.frames.size() * static_cast<std::size_t>(seq.width()) * seq.height());
  out.insert(out.end(), {'D', 'S', 'E', 'Q'});
  detail::put_u16(out, 1);
  detail::put_u16(out, 0);
  detail::put_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.height()));
  detail::put_u16(out, static_cast<std::uint16_t>(seq.subject_id));
  detail::put_u16(out, static_cast<std::uint16_t>(seq.action_id));
  detail::put_u16(out, static_cast<std::uint16_t>(seq.trial_id));
  detail::put_u16(out, 0);
  for (const auto& f : seq.frames)
    for (std::uint16_t d : f.depth) detail::put_u16(out, d);
  return out;
}

inline DepthSequence read_canonical(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kCanonicalHeaderSize, ErrorCode::TruncatedStream,
          "stream shorter than header");
  require(bytes[0] == 'D' && bytes[1] == 'S' && bytes[2] == 'E' && bytes[3] == 'Q',
          ErrorCode::BadMagic, "missing DSEQ magic");
  detail::ByteReader in(bytes.subspan(4));
  const std::uint16_t version = in.u16();
  require(version == 1, ErrorCode::BadMagic,
          "unsupported version " + std::to_string(version));
  in.u16();  // reserved
  const std::uint32_t frames = in.u32();
  const std::uint32_t width = in.u32();
  const std::uint32_t height = in.u32();
  require(frames >= 2, ErrorCode::DimensionMismatch, "sequence needs at least 2 frames");
  require(width > 0 && height > 0, ErrorCode::DimensionMismatch,
          "frame dimensions must be positive");

  DepthSequence seq;
  seq.subject_id = in.u16();
  seq.action_id = in.u16();
  seq.trial_id = in.u16();
  in.u16();  // pad

  const std::size_t per_frame = static_cast<std::size_t>(width) * height;
  require(in.remaining() == 2 * per_frame * frames, ErrorCode::TruncatedStream,
          "payload size does not match declared frames*width*height");
  seq.frames.reserve(frames);
  for (std::uint32_t t = 0; t < frames; ++t) {
    DepthFrame f;
    f.width = static_cast<int>(width);
    f.height = static_cast<int>(height);
    f.depth.reserve(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i) f.depth.push_back(in.u16());
    seq.frames.push_back(std::move(f));
  }
  seq.validate();
  return seq;
}

/// Sample metadata parsed from an "aNN_sNN_eNN*" style name.
struct SampleName {
  int action_id = 0;
  int subject_id = 0;
  int trial_id = 0;
};

inline std::optional<SampleName> parse_sample_name(const std::string& name) {
  // Expected stem prefix: a<digits>_s<digits>_e<digits>
  auto read_int = [&](std::size_t& pos, char tag) -> std::optional<int> {
    if (pos >= name.size() || name[pos] != tag) return std::nullopt;
    ++pos;
    std::size_t start = pos;
    while (pos < name.size() && std::isdigit(static_cast<unsigned char>(name[pos]))) ++pos;
    if (pos == start) return std::nullopt;
    return std::stoi(name.substr(start, pos - start));
  };
  std::size_t pos = 0;
  auto a = read_int(pos, 'a');
  if (!a || pos >= name.size() || name[pos] != '_') return std::nullopt;
  ++pos;
  auto s = read_int(pos, 's');
  if (!s || pos >= name.size() || name[pos] != '_') return std::nullopt;
  ++pos;
  auto e = read_int(pos, 'e');
  if (!e) return std::nullopt;
  return SampleName{*a, *s, *e};
}

// MSR-Action3D .bin adapter: 3 little-endian u32 (frames, width, height),
// then frames*height*width little-endian u32 depth words, row-major.
// Values above 65535 saturate into the 16-bit canonical model; the count of
// saturated words is reported through `saturated` when given.
inline DepthSequence read_msr_bin(std::span<const std::uint8_t> bytes,
                                  const SampleName& meta = {},
                                  std::size_t* saturated = nullptr) {
  require(bytes.size() >= 12, ErrorCode::TruncatedStream, "stream shorter than header");
  detail::ByteReader in(bytes);
  const std::uint32_t frames = in.u32();
  const std::uint32_t width = in.u32();
  const std::uint32_t height = in.u32();
  require(frames > 0 && width > 0 && height > 0, ErrorCode::NonPositiveDims,
          "header declares non-positive dimensions");
  require(frames >= 2, ErrorCode::DimensionMismatch, "sequence needs at least 2 frames");
  const std::size_t per_frame = static_cast<std::size_t>(width) * height;
  require(in.remaining() == 4 * per_frame * frames, ErrorCode::TruncatedStream,
          "payload size does not match declared frames*width*height");

  std::size_t clipped = 0;
  DepthSequence seq;
  seq.action_id = meta.action_id;
  seq.subject_id = meta.subject_id;
  seq.trial_id = meta.trial_id;
  seq.frames.reserve(frames);
  for (std::uint32_t t = 0; t < frames; ++t) {
    DepthFrame f;
    f.width = static_cast<int>(width);
    f.height = static_cast<int>(height);
    f.depth.reserve(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i) {
      std::uint32_t d = in.u32();
      if (d > 0xffff) {
        d = 0xffff;
        ++clipped;
      }
      f.depth.push_back(static_cast<std::uint16_t>(d));
    }
    seq.frames.push_back(std::move(f));
  }
  if (saturated) *saturated = clipped;
  seq.validate();
  return seq;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

inline DepthSequence load_canonical_file(const std::filesystem::path& path) {
  return read_canonical(read_file_bytes(path));
}

inline void save_canonical_file(const std::filesystem::path& path, const DepthSequence& seq) {
  write_file_bytes(path, write_canonical(seq));
}

/// Optional metadata override: tab-separated "file action subject trial" rows.
inline std::map<std::string, SampleName> read_manifest(const std::filesystem::path& path) {
  std::map<std::string, SampleName> out;
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string file;
    SampleName meta;
    if (!(ss >> file >> meta.action_id >> meta.subject_id >> meta.trial_id))
      fail(ErrorCode::ParseError,
           path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    out[file] = meta;
  }
  return out;
}

inline SampleName metadata_for_file(const std::filesystem::path& file,
                                    const std::map<std::string, SampleName>& manifest) {
  const std::string base = file.filename().string();
  if (auto it = manifest.find(base); it != manifest.end()) return it->second;
  auto parsed = parse_sample_name(base);
  require(parsed.has_value(), ErrorCode::ParseError,
          base + ": filename does not match aNN_sNN_eNN pattern and no manifest entry");
  return *parsed;
}

/// MSR-Action3D sample file read with filename/manifest metadata attached.
inline DepthSequence load_msr_file(const std::filesystem::path& path,
                                   const std::map<std::string, SampleName>& manifest = {},
                                   std::size_t* saturated = nullptr) {
  return read_msr_bin(read_file_bytes(path), metadata_for_file(path, manifest), saturated);
}

inline std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                                     const std::string& extension) {
  require(std::filesystem::is_directory(dir), ErrorCode::IoError,
          dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

enum class DatasetFormat { Canonical, MsrBin };

/// Load every sample under `dir` (".dseq" canonical files or "*.bin" MSR
/// files), sorted by (action, subject, trial) for deterministic downstream
/// ordering. A "manifest.tsv" in the directory overrides filename metadata.
inline std::vector<DepthSequence> load_directory(const std::filesystem::path& dir,
                                                 DatasetFormat format) {
  std::map<std::string, SampleName> manifest;
  if (std::filesystem::exists(dir / "manifest.tsv"))
    manifest = read_manifest(dir / "manifest.tsv");

  std::vector<DepthSequence> out;
  if (format == DatasetFormat::Canonical) {
    for (const auto& file : list_files(dir, ".dseq")) out.push_back(load_canonical_file(file));
  } else {
    for (const auto& file : list_files(dir, ".bin"))
      out.push_back(load_msr_file(file, manifest));
  }
  std::sort(out.begin(), out.end(), [](const DepthSequence& a, const DepthSequence& b) {
    return std::tie(a.action_id, a.subject_id, a.trial_id) <
           std::tie(b.action_id, b.subject_id, b.trial_id);
  });
  return out;
}

}  // namespace deptrail
