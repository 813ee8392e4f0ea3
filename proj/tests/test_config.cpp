#include "test_util.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "deptrail/run_config.hpp"

using namespace deptrail;

namespace {

// RAII guard so DEPTRAIL_DATA tests cannot leak into each other
class EnvVar {
 public:
  EnvVar(const char* name, const char* value) : name_(name) {
    const char* old = std::getenv(name);
    if (old) saved_ = old;
    if (value)
      ::setenv(name, value, 1);
    else
      ::unsetenv(name);
  }
  ~EnvVar() {
    if (saved_)
      ::setenv(name_.c_str(), saved_->c_str(), 1);
    else
      ::unsetenv(name_.c_str());
  }

 private:
  std::string name_;
  std::optional<std::string> saved_;
};

}  // namespace

TEST_CASE("defaults answer through the typed getters") {
  RunConfig cfg;
  CHECK(cfg.get("glac.bins") == "8");
  CHECK(cfg.get_int("glac.bins") == 8);
  CHECK(cfg.get_double("crc.mu") == 0.0001);
  CHECK(cfg.get_bool("prep.crop"));
  CHECK_FALSE(cfg.get_bool("split.resubstitution"));
  CHECK(cfg.get_u64("seed") == 1u);
  CHECK(cfg.get("out.dir") == "out");
  CHECK(cfg.get_int_list("split.train_subjects").empty());
  CHECK(cfg.get_string_list("synth.classes") ==
        std::vector<std::string>{"translate_right", "oscillate", "static_arm_raise"});
}

TEST_CASE("assignments override earlier values and reject unknown keys") {
  RunConfig cfg;
  cfg.set("glac.bins", "12");
  cfg.set("glac.bins", "6");
  CHECK(cfg.get_int("glac.bins") == 6);

  cfg.apply_assignment("crc.mu=0.5");
  CHECK(cfg.get_double("crc.mu") == 0.5);
  cfg.apply_assignment("  crc.mu =  0.25 ");
  CHECK(cfg.get_double("crc.mu") == 0.25);

  REQUIRE_ERROR_CODE(cfg.set("glac.bin", "8"), ErrorCode::ParseError);
  REQUIRE_ERROR_CODE(cfg.get("nope"), ErrorCode::ParseError);
  REQUIRE_ERROR_CODE(cfg.apply_assignment("no equals sign"), ErrorCode::ParseError);
  REQUIRE_ERROR_CODE(cfg.apply_assignment("= orphan value"), ErrorCode::ParseError);

  try {
    cfg.set("mtm.zbins", "4");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mtm.zbins") != std::string::npos);
  }
}

TEST_CASE("config text supports comments and reports failing lines") {
  RunConfig cfg;
  cfg.parse_text(
      "# pipeline overrides\n"
      "glac.bins = 4   # coarse orientation\n"
      "\n"
      "  workers = 2\n"
      "features = gshi");
  CHECK(cfg.get_int("glac.bins") == 4);
  CHECK(cfg.get_int("workers") == 2);
  CHECK(cfg.get("features") == "gshi");

  RunConfig bad;
  try {
    bad.parse_text("seed = 7\nmystery.key = 1\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("mystery.key") != std::string::npos);
  }
}

TEST_CASE("config files parse like inline text") {
  testutil::TempDir dir("deptrail_config");
  const auto file = dir.path() / "run.conf";
  {
    std::ofstream out(file);
    out << "protocol = msr_all_cross\nprep.rows = 48\n";
  }
  RunConfig cfg;
  cfg.parse_file(file);
  CHECK(cfg.get("protocol") == "msr_all_cross");
  CHECK(cfg.get_int("prep.rows") == 48);
  REQUIRE_ERROR_CODE(RunConfig().parse_file(dir.path() / "absent.conf"), ErrorCode::IoError);
}

TEST_CASE("scalar parsers demand clean values") {
  RunConfig cfg;
  cfg.set("workers", "12x");
  REQUIRE_ERROR_CODE(cfg.get_int("workers"), ErrorCode::ParseError);
  cfg.set("crc.mu", "fast");
  REQUIRE_ERROR_CODE(cfg.get_double("crc.mu"), ErrorCode::ParseError);
  cfg.set("prep.crop", "maybe");
  REQUIRE_ERROR_CODE(cfg.get_bool("prep.crop"), ErrorCode::ParseError);
  cfg.set("seed", "12345678901234567890");
  CHECK(cfg.get_u64("seed") == 12345678901234567890ull);

  for (const char* yes : {"true", "1", "yes"}) {
    cfg.set("glac.signed", yes);
    CHECK(cfg.get_bool("glac.signed"));
  }
  for (const char* no : {"false", "0", "no"}) {
    cfg.set("glac.signed", no);
    CHECK_FALSE(cfg.get_bool("glac.signed"));
  }
}

TEST_CASE("list parsers split commas and parse grid shapes") {
  RunConfig cfg;
  cfg.set("split.train_subjects", "1, 3,5 ,7");
  CHECK(cfg.get_int_list("split.train_subjects") == std::vector<int>{1, 3, 5, 7});
  cfg.set("tune.mu", "0.1,0.01");
  CHECK(cfg.get_double_list("tune.mu") == std::vector<double>{0.1, 0.01});
  cfg.set("split.train_ids", "a01_s01_e01 , a02_s01_e01");
  CHECK(cfg.get_string_list("split.train_ids") ==
        std::vector<std::string>{"a01_s01_e01", "a02_s01_e01"});

  cfg.set("tune.grid", "1x2, 3x5");
  const auto grids = cfg.get_grid_list("tune.grid");
  REQUIRE(grids.size() == 2u);
  CHECK(grids[0] == std::pair<int, int>(1, 2));
  CHECK(grids[1] == std::pair<int, int>(3, 5));

  for (const char* bad : {"x2", "3x", "axb", "3-5"}) {
    cfg.set("tune.grid", bad);
    REQUIRE_ERROR_CODE(cfg.get_grid_list("tune.grid"), ErrorCode::ParseError);
  }

  cfg.set("split.train_subjects", "1,two");
  REQUIRE_ERROR_CODE(cfg.get_int_list("split.train_subjects"), ErrorCode::ParseError);
}

TEST_CASE("environment variable overrides the dataset directory") {
  RunConfig cfg;
  cfg.set("dataset.dir", "/data/configured");
  {
    EnvVar env("DEPTRAIL_DATA", "/data/mounted");
    CHECK(cfg.dataset_dir() == std::filesystem::path("/data/mounted"));
    const auto echo = cfg.resolved();
    bool found = false;
    for (const auto& [k, v] : echo)
      if (k == "dataset.dir") {
        found = true;
        CHECK(v == "/data/mounted");
      }
    CHECK(found);
  }
  {
    EnvVar env("DEPTRAIL_DATA", "");
    CHECK(cfg.dataset_dir() == std::filesystem::path("/data/configured"));
  }
  {
    EnvVar env("DEPTRAIL_DATA", nullptr);
    CHECK(cfg.dataset_dir() == std::filesystem::path("/data/configured"));
  }
}

TEST_CASE("protocol view assembles and validates split settings") {
  RunConfig cfg;
  // custom protocol with no split mode picked
  REQUIRE_ERROR_CODE(cfg.protocol(), ErrorCode::InvalidArgument);

  cfg.set("split.resubstitution", "true");
  const Protocol resub = cfg.protocol();
  CHECK(resub.name == ProtocolName::Custom);
  CHECK(resub.resubstitution);

  RunConfig named;
  named.set("protocol", "msr_subset_test1");
  named.set("protocol.subset", "AS2");
  const Protocol p = named.protocol();
  CHECK(p.name == ProtocolName::MsrSubsetTest1);
  REQUIRE(p.subset.has_value());
  CHECK(*p.subset == MsrSubset::AS2);

  named.set("protocol.subset", "AS9");
  REQUIRE_ERROR_CODE(named.protocol(), ErrorCode::ParseError);

  RunConfig subjects;
  subjects.set("split.train_subjects", "2,4");
  const Protocol s = subjects.protocol();
  CHECK(s.train_subjects == std::vector<int>{2, 4});
}

TEST_CASE("pipeline view maps keys onto the processing stages") {
  RunConfig cfg;
  const PipelineConfig def = cfg.pipeline();
  CHECK(def.mtm.zeta_m == 10.0);
  CHECK(def.mtm.z_bins == 64);
  CHECK_FALSE(def.mtm.z_range.has_value());
  CHECK(def.prep.rows == 64);
  CHECK(def.glac.bins == 8);
  CHECK(def.glac.gradient_operator == GradientOperator::Roberts);
  CHECK(def.features == FeatureSet::Fused);
  CHECK(def.mu == 0.0001);
  CHECK(def.retention == 0.99);

  cfg.set("mtm.z_min", "500");
  REQUIRE_ERROR_CODE(cfg.pipeline(), ErrorCode::ParseError);  // z_max missing
  cfg.set("mtm.z_max", "2000");
  const PipelineConfig ranged = cfg.pipeline();
  REQUIRE(ranged.mtm.z_range.has_value());
  CHECK(ranged.mtm.z_range->first == 500.0);
  CHECK(ranged.mtm.z_range->second == 2000.0);

  cfg.set("features", "gmhi");
  CHECK(cfg.pipeline().features == FeatureSet::MhiOnly);
  cfg.set("features", "gshi");
  CHECK(cfg.pipeline().features == FeatureSet::ShiOnly);
  cfg.set("features", "hog");
  REQUIRE_ERROR_CODE(cfg.pipeline(), ErrorCode::ParseError);
  cfg.set("features", "fused");

  cfg.set("glac.operator", "sobel");
  CHECK(cfg.pipeline().glac.gradient_operator == GradientOperator::Sobel);
  cfg.set("glac.operator", "prewitt");
  REQUIRE_ERROR_CODE(cfg.pipeline(), ErrorCode::ParseError);
  cfg.set("glac.operator", "roberts");

  cfg.set("crc.mu", "0");  // pipeline validation still applies
  REQUIRE_ERROR_CODE(cfg.pipeline(), ErrorCode::InvalidArgument);
}

TEST_CASE("synthesis view parses programs and the generator seed") {
  RunConfig cfg;
  const SynthSpec def = cfg.synth();
  REQUIRE(def.classes.size() == 3u);
  CHECK(def.classes[0] == MotionProgram::TranslateRight);
  CHECK(def.classes[1] == MotionProgram::Oscillate);
  CHECK(def.classes[2] == MotionProgram::StaticArmRaise);
  CHECK(def.subjects == 4);
  CHECK(def.trials == 5);
  CHECK(def.width == 32);
  CHECK(def.frames == 16);
  CHECK(def.seed == 1u);

  cfg.set("synth.classes", "grow, static_pose");
  cfg.set("seed", "99");
  const SynthSpec s = cfg.synth();
  REQUIRE(s.classes.size() == 2u);
  CHECK(s.classes[0] == MotionProgram::Grow);
  CHECK(s.classes[1] == MotionProgram::StaticPose);
  CHECK(s.seed == 99u);

  cfg.set("synth.classes", "moonwalk");
  REQUIRE_ERROR_CODE(cfg.synth(), ErrorCode::ParseError);
  cfg.set("synth.classes", "grow");
  cfg.set("synth.frames", "1");
  REQUIRE_ERROR_CODE(cfg.synth(), ErrorCode::InvalidArgument);
}

TEST_CASE("resolved echo lists every registered key in registry order") {
  RunConfig cfg;
  cfg.set("glac.bins", "12");
  const auto echo = cfg.resolved();
  const auto& reg = RunConfig::registry();
  REQUIRE(echo.size() == reg.size());
  CHECK(echo.size() == 39u);
  for (std::size_t i = 0; i < reg.size(); ++i) CHECK(echo[i].first == reg[i].first);
  for (const auto& [k, v] : echo)
    if (k == "glac.bins") CHECK(v == "12");
}
