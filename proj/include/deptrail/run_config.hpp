#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/evaluation.hpp"
#include "deptrail/glac.hpp"
#include "deptrail/mtm.hpp"
#include "deptrail/synth.hpp"

namespace deptrail {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Flat "key = value" configuration with a closed key registry. Values are
/// kept as strings; typed accessors parse on demand. Later assignments
/// override earlier ones, which is also how command-line overrides work.
class RunConfig {
 public:
  // {key, default}; the resolved echo lists every key in this order
  static const std::vector<std::pair<std::string, std::string>>& registry() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"dataset.dir", ""},
        {"dataset.format", "canonical"},
        {"out.dir", "out"},
        {"protocol", "custom"},
        {"protocol.subset", ""},
        {"split.train_subjects", ""},
        {"split.train_ids", ""},
        {"split.resubstitution", "false"},
        {"features", "fused"},
        {"mtm.zeta_m", "10"},
        {"mtm.zeta_s", "10"},
        {"mtm.z_bins", "64"},
        {"mtm.z_min", ""},
        {"mtm.z_max", ""},
        {"prep.crop", "true"},
        {"prep.rows", "64"},
        {"prep.cols", "64"},
        {"glac.bins", "8"},
        {"glac.delta_r", "1"},
        {"glac.spatial_rows", "1"},
        {"glac.spatial_cols", "2"},
        {"glac.operator", "roberts"},
        {"glac.signed", "true"},
        {"crc.mu", "0.0001"},
        {"pca.retention", "0.99"},
        {"workers", "0"},
        {"seed", "1"},
        {"synth.classes", "translate_right,oscillate,static_arm_raise"},
        {"synth.subjects", "4"},
        {"synth.trials", "5"},
        {"synth.width", "32"},
        {"synth.height", "32"},
        {"synth.frames", "16"},
        {"synth.noise", "0"},
        {"tune.bins", "8"},
        {"tune.delta_r", "1"},
        {"tune.grid", "1x2"},
        {"tune.mu", "0.0001"},
        {"tune.folds", "5"},
    };
    return keys;
  }

  void set(const std::string& key, const std::string& value) {
    require(is_known(key), ErrorCode::ParseError, "unknown config key '" + key + "'");
    values_[key] = value;
  }

  /// "key = value" or "key=value".
  void apply_assignment(const std::string& text) {
    const auto eq = text.find('=');
    require(eq != std::string::npos, ErrorCode::ParseError,
            "expected key=value, got '" + text + "'");
    const std::string key = detail::trim(text.substr(0, eq));
    require(!key.empty(), ErrorCode::ParseError, "missing key in '" + text + "'");
    set(key, detail::trim(text.substr(eq + 1)));
  }

  void parse_text(const std::string& text) {
    std::size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
      const auto nl = text.find('\n', start);
      std::string line = text.substr(start, nl == std::string::npos ? std::string::npos
                                                                    : nl - start);
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (!line.empty()) {
        try {
          apply_assignment(line);
        } catch (const Error& e) {
          fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
      }
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }

  void parse_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    parse_text(std::string(bytes.begin(), bytes.end()));
  }

  std::string get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    for (const auto& [k, def] : registry())
      if (k == key) return def;
    fail(ErrorCode::ParseError, "unknown config key '" + key + "'");
  }

  bool get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrorCode::ParseError, key + ": expected a boolean, got '" + v + "'");
  }

  int get_int(const std::string& key) const {
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const int parsed = std::stoi(v, &used);
      require(used == v.size(), ErrorCode::ParseError, "trailing text");
      return parsed;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(ErrorCode::ParseError, key + ": expected an integer, got '" + v + "'");
    }
  }

  double get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const double parsed = std::stod(v, &used);
      require(used == v.size(), ErrorCode::ParseError, "trailing text");
      return parsed;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(ErrorCode::ParseError, key + ": expected a number, got '" + v + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const unsigned long long parsed = std::stoull(v, &used);
      require(used == v.size(), ErrorCode::ParseError, "trailing text");
      return parsed;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(ErrorCode::ParseError, key + ": expected an unsigned integer, got '" + v + "'");
    }
  }

  std::vector<int> get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& piece : detail::split_commas(get(key))) {
      try {
        out.push_back(std::stoi(piece));
      } catch (...) {
        fail(ErrorCode::ParseError, key + ": expected integers, got '" + piece + "'");
      }
    }
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& piece : detail::split_commas(get(key))) {
      try {
        out.push_back(std::stod(piece));
      } catch (...) {
        fail(ErrorCode::ParseError, key + ": expected numbers, got '" + piece + "'");
      }
    }
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    return detail::split_commas(get(key));
  }

  /// "RxC" grid entries, e.g. "1x2,3x5".
  std::vector<std::pair<int, int>> get_grid_list(const std::string& key) const {
    std::vector<std::pair<int, int>> out;
    for (const auto& piece : detail::split_commas(get(key))) {
      const auto x = piece.find('x');
      bool ok = x != std::string::npos && x > 0 && x + 1 < piece.size();
      if (ok) {
        try {
          out.emplace_back(std::stoi(piece.substr(0, x)), std::stoi(piece.substr(x + 1)));
        } catch (...) {
          ok = false;
        }
      }
      require(ok, ErrorCode::ParseError, key + ": expected RxC entries, got '" + piece + "'");
    }
    return out;
  }

  // --- typed views -------------------------------------------------------

  /// DEPTRAIL_DATA, when set, overrides the configured dataset directory.
  std::filesystem::path dataset_dir() const {
    if (const char* env = std::getenv("DEPTRAIL_DATA"); env != nullptr && *env != '\0')
      return env;
    return std::filesystem::path(get("dataset.dir"));
  }

  DatasetFormat dataset_format() const {
    const std::string v = get("dataset.format");
    if (v == "canonical") return DatasetFormat::Canonical;
    if (v == "msr_bin") return DatasetFormat::MsrBin;
    fail(ErrorCode::ParseError, "dataset.format: expected canonical or msr_bin, got '" + v + "'");
  }

  std::filesystem::path out_dir() const { return std::filesystem::path(get("out.dir")); }

  Protocol protocol() const {
    Protocol p;
    p.name = parse_protocol_name(get("protocol"));
    if (const std::string s = get("protocol.subset"); !s.empty()) p.subset = parse_msr_subset(s);
    p.train_subjects = get_int_list("split.train_subjects");
    p.train_ids = get_string_list("split.train_ids");
    p.resubstitution = get_bool("split.resubstitution");
    p.validate();
    return p;
  }

  PipelineConfig pipeline() const {
    PipelineConfig c;
    c.mtm.zeta_m = get_double("mtm.zeta_m");
    c.mtm.zeta_s = get_double("mtm.zeta_s");
    c.mtm.z_bins = get_int("mtm.z_bins");
    const std::string z_min = get("mtm.z_min");
    const std::string z_max = get("mtm.z_max");
    require(z_min.empty() == z_max.empty(), ErrorCode::ParseError,
            "mtm.z_min and mtm.z_max must be set together");
    if (!z_min.empty()) c.mtm.z_range = {get_double("mtm.z_min"), get_double("mtm.z_max")};
    c.prep.crop = get_bool("prep.crop");
    c.prep.rows = get_int("prep.rows");
    c.prep.cols = get_int("prep.cols");
    c.glac.bins = get_int("glac.bins");
    c.glac.delta_r = get_int("glac.delta_r");
    c.glac.spatial_rows = get_int("glac.spatial_rows");
    c.glac.spatial_cols = get_int("glac.spatial_cols");
    c.glac.gradient_operator = parse_gradient_operator(get("glac.operator"));
    c.glac.signed_orientation = get_bool("glac.signed");
    const std::string f = get("features");
    if (f == "fused")
      c.features = FeatureSet::Fused;
    else if (f == "gmhi")
      c.features = FeatureSet::MhiOnly;
    else if (f == "gshi")
      c.features = FeatureSet::ShiOnly;
    else
      fail(ErrorCode::ParseError, "features: expected fused, gmhi or gshi, got '" + f + "'");
    c.mu = get_double("crc.mu");
    c.retention = get_double("pca.retention");
    c.workers = get_int("workers");
    c.validate();
    return c;
  }

  SynthSpec synth() const {
    SynthSpec s;
    s.classes.clear();
    for (const auto& name : get_string_list("synth.classes"))
      s.classes.push_back(parse_motion_program(name));
    s.subjects = get_int("synth.subjects");
    s.trials = get_int("synth.trials");
    s.width = get_int("synth.width");
    s.height = get_int("synth.height");
    s.frames = get_int("synth.frames");
    s.noise_amplitude = get_int("synth.noise");
    s.seed = get_u64("seed");
    s.validate();
    return s;
  }

  /// Every registry key with its effective value; dataset.dir reflects the
  /// environment override.
  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(registry().size());
    for (const auto& [key, def] : registry()) {
      std::string value = get(key);
      if (key == "dataset.dir") value = dataset_dir().string();
      out.emplace_back(key, value);
    }
    return out;
  }

 private:
  static bool is_known(const std::string& key) {
    for (const auto& [k, def] : registry())
      if (k == key) return true;
    return false;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace deptrail
