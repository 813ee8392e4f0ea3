#include "test_util.hpp"

#include <cstdint>
#include <vector>

#include "deptrail/depth_io.hpp"

using namespace deptrail;

namespace {

DepthSequence tiny_sequence() {
  DepthSequence seq;
  seq.action_id = 2;
  seq.subject_id = 3;
  seq.trial_id = 1;
  seq.frames.push_back(testutil::make_frame(4, 4, [](int, int) { return 0; }));
  seq.frames.push_back(testutil::make_frame(4, 4, [](int, int) { return 0; }));
  return seq;
}

std::vector<std::uint8_t> msr_bytes(std::uint32_t frames, std::uint32_t width,
                                    std::uint32_t height,
                                    const std::vector<std::uint32_t>& words) {
  std::vector<std::uint8_t> out;
  auto put = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  };
  put(frames);
  put(width);
  put(height);
  for (auto w : words) put(w);
  return out;
}

}  // namespace

TEST_CASE("canonical stream layout is fixed") {
  const auto bytes = write_canonical(tiny_sequence());
  REQUIRE(bytes.size() == kCanonicalHeaderSize + 2 * 4 * 4 * 2);
  CHECK(bytes[0] == 'D');
  CHECK(bytes[1] == 'S');
  CHECK(bytes[2] == 'E');
  CHECK(bytes[3] == 'Q');
  CHECK(bytes[4] == 1);  // version, little-endian u16
  CHECK(bytes[5] == 0);
  // frame count u32 at offset 8, width at 12, height at 16
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 4);
  CHECK(bytes[16] == 4);
  // subject, action, trial u16s at offsets 20, 22, 24
  CHECK(bytes[20] == 3);
  CHECK(bytes[22] == 2);
  CHECK(bytes[24] == 1);
  for (std::size_t i = kCanonicalHeaderSize; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("single pixel payload is little-endian u16 per frame") {
  DepthSequence seq;
  seq.action_id = 1;
  seq.subject_id = 1;
  seq.trial_id = 1;
  seq.frames.push_back(testutil::make_frame(1, 1, [](int, int) { return 5; }));
  seq.frames.push_back(testutil::make_frame(1, 1, [](int, int) { return 7; }));
  const auto bytes = write_canonical(seq);
  REQUIRE(bytes.size() == kCanonicalHeaderSize + 4);
  CHECK(bytes[kCanonicalHeaderSize + 0] == 5);
  CHECK(bytes[kCanonicalHeaderSize + 1] == 0);
  CHECK(bytes[kCanonicalHeaderSize + 2] == 7);
  CHECK(bytes[kCanonicalHeaderSize + 3] == 0);
}

TEST_CASE("canonical round trip preserves everything") {
  auto gen = testutil::rng(11);
  for (int it = 0; it < 20; ++it) {
    std::uniform_int_distribution<int> dim(1, 9);
    std::uniform_int_distribution<int> len(2, 6);
    auto seq = testutil::random_sequence(dim(gen), dim(gen), len(gen), gen, 65535);
    seq.action_id = it % 5 + 1;
    seq.subject_id = it % 7 + 1;
    seq.trial_id = it % 3 + 1;
    const auto bytes = write_canonical(seq);
    CHECK(read_canonical(bytes) == seq);
    CHECK(write_canonical(seq) == bytes);  // deterministic
  }
}

TEST_CASE("canonical reader rejects malformed streams") {
  const auto good = write_canonical(tiny_sequence());

  auto wrong_magic = good;
  wrong_magic[0] = 'X';
  REQUIRE_ERROR_CODE(read_canonical(wrong_magic), ErrorCode::BadMagic);

  auto wrong_version = good;
  wrong_version[4] = 9;
  REQUIRE_ERROR_CODE(read_canonical(wrong_version), ErrorCode::BadMagic);

  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  REQUIRE_ERROR_CODE(read_canonical(truncated), ErrorCode::TruncatedStream);

  auto missing_frame = good;
  missing_frame[8] = 3;  // declares 3 frames, payload holds 2
  REQUIRE_ERROR_CODE(read_canonical(missing_frame), ErrorCode::TruncatedStream);

  auto zero_width = good;
  zero_width[12] = 0;
  REQUIRE_ERROR_CODE(read_canonical(zero_width), ErrorCode::DimensionMismatch);

  auto one_frame = good;
  one_frame[8] = 1;
  REQUIRE_ERROR_CODE(read_canonical(one_frame), ErrorCode::DimensionMismatch);

  REQUIRE_ERROR_CODE(read_canonical(std::vector<std::uint8_t>{'D', 'S'}),
                     ErrorCode::TruncatedStream);
}

TEST_CASE("sequence id and validation") {
  auto seq = tiny_sequence();
  CHECK(seq.id() == "a02_s03_e01");
  seq.action_id = 12;
  seq.subject_id = 10;
  seq.trial_id = 3;
  CHECK(seq.id() == "a12_s10_e03");

  DepthSequence bad = tiny_sequence();
  bad.frames.pop_back();
  REQUIRE_ERROR_CODE(bad.validate(), ErrorCode::DimensionMismatch);

  DepthSequence ragged = tiny_sequence();
  ragged.frames[1] = testutil::make_frame(3, 4, [](int, int) { return 0; });
  REQUIRE_ERROR_CODE(ragged.validate(), ErrorCode::DimensionMismatch);

  DepthFrame short_payload;
  short_payload.width = 2;
  short_payload.height = 2;
  short_payload.depth = {1, 2, 3};
  REQUIRE_ERROR_CODE(short_payload.validate(), ErrorCode::DimensionMismatch);
}

TEST_CASE("sample name parsing") {
  auto name = parse_sample_name("a01_s03_e02_sdepth.bin");
  REQUIRE(name.has_value());
  CHECK(name->action_id == 1);
  CHECK(name->subject_id == 3);
  CHECK(name->trial_id == 2);

  auto plain = parse_sample_name("a20_s10_e03.dseq");
  REQUIRE(plain.has_value());
  CHECK(plain->action_id == 20);
  CHECK(plain->subject_id == 10);
  CHECK(plain->trial_id == 3);

  CHECK_FALSE(parse_sample_name("s01_a02_e03.bin").has_value());
  CHECK_FALSE(parse_sample_name("a_s01_e01").has_value());
  CHECK_FALSE(parse_sample_name("random.bin").has_value());
}

TEST_CASE("msr reader header and payload") {
  // 2 frames of 4x4, all zero words
  const auto bytes = msr_bytes(2, 4, 4, std::vector<std::uint32_t>(32, 0));
  const auto seq = read_msr_bin(bytes, SampleName{5, 6, 7});
  CHECK(seq.length() == 2);
  CHECK(seq.width() == 4);
  CHECK(seq.height() == 4);
  CHECK(seq.action_id == 5);
  CHECK(seq.subject_id == 6);
  CHECK(seq.trial_id == 7);
  for (const auto& f : seq.frames)
    for (auto v : f.depth) CHECK(v == 0);
}

TEST_CASE("msr reader row-major order and errors") {
  std::vector<std::uint32_t> words(2 * 2 * 2);
  for (std::size_t i = 0; i < words.size(); ++i) words[i] = static_cast<std::uint32_t>(i + 1);
  const auto seq = read_msr_bin(msr_bytes(2, 2, 2, words));
  CHECK(seq.frames[0].at(0, 0) == 1);
  CHECK(seq.frames[0].at(0, 1) == 2);
  CHECK(seq.frames[0].at(1, 0) == 3);
  CHECK(seq.frames[0].at(1, 1) == 4);
  CHECK(seq.frames[1].at(0, 0) == 5);

  REQUIRE_ERROR_CODE(read_msr_bin(msr_bytes(0, 4, 4, {})), ErrorCode::NonPositiveDims);
  REQUIRE_ERROR_CODE(read_msr_bin(msr_bytes(2, 0, 4, {})), ErrorCode::NonPositiveDims);
  REQUIRE_ERROR_CODE(read_msr_bin(msr_bytes(1, 1, 1, {9})), ErrorCode::DimensionMismatch);
  REQUIRE_ERROR_CODE(read_msr_bin(msr_bytes(2, 2, 2, std::vector<std::uint32_t>(7, 0))),
                     ErrorCode::TruncatedStream);
  REQUIRE_ERROR_CODE(read_msr_bin(std::vector<std::uint8_t>{1, 2, 3}),
                     ErrorCode::TruncatedStream);
}

TEST_CASE("msr reader saturates wide words and counts them") {
  std::vector<std::uint32_t> words(2, 0);
  words[0] = 70000;
  words[1] = 65535;
  std::size_t saturated = 99;
  const auto seq = read_msr_bin(msr_bytes(2, 1, 1, words), SampleName{1, 1, 1}, &saturated);
  CHECK(seq.frames[0].at(0, 0) == 65535);
  CHECK(seq.frames[1].at(0, 0) == 65535);
  CHECK(saturated == 1);
}

TEST_CASE("directory loading sorts and honors the manifest") {
  testutil::TempDir dir("deptrail_io");

  DepthSequence a = tiny_sequence();  // a02_s03_e01
  DepthSequence b = tiny_sequence();
  b.action_id = 1;
  b.subject_id = 9;
  b.trial_id = 2;
  DepthSequence c = tiny_sequence();
  c.action_id = 2;
  c.subject_id = 1;
  c.trial_id = 1;
  save_canonical_file(dir.path() / (a.id() + ".dseq"), a);
  save_canonical_file(dir.path() / (b.id() + ".dseq"), b);
  save_canonical_file(dir.path() / (c.id() + ".dseq"), c);

  const auto loaded = load_directory(dir.path(), DatasetFormat::Canonical);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].id() == "a01_s09_e02");
  CHECK(loaded[1].id() == "a02_s01_e01");
  CHECK(loaded[2].id() == "a02_s03_e01");

  // MSR format with a manifest override for a file whose name encodes nothing
  const auto raw = msr_bytes(2, 2, 2, std::vector<std::uint32_t>(8, 100));
  write_file_bytes(dir.path() / "mystery.bin", raw);
  {
    std::vector<std::uint8_t> manifest_bytes;
    const std::string text = "# file action subject trial\nmystery.bin\t4\t2\t3\n";
    manifest_bytes.assign(text.begin(), text.end());
    write_file_bytes(dir.path() / "manifest.tsv", manifest_bytes);
  }
  const auto msr_loaded = load_directory(dir.path(), DatasetFormat::MsrBin);
  REQUIRE(msr_loaded.size() == 1);
  CHECK(msr_loaded[0].id() == "a04_s02_e03");

  REQUIRE_ERROR_CODE(load_directory(dir.path() / "missing", DatasetFormat::Canonical),
                     ErrorCode::IoError);
}

TEST_CASE("msr file without parsable name or manifest entry fails") {
  testutil::TempDir dir("deptrail_io_name");
  const auto raw = msr_bytes(2, 2, 2, std::vector<std::uint32_t>(8, 1));
  write_file_bytes(dir.path() / "unlabeled.bin", raw);
  REQUIRE_ERROR_CODE(load_msr_file(dir.path() / "unlabeled.bin"), ErrorCode::ParseError);
}
