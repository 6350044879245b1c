#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "support.hpp"
#include "tattooed/errors.hpp"
#include "tattooed/model_io.hpp"

using namespace tattooed;
using testing::test_seed;

namespace {

// Builds a container file byte by byte: magic, LE length, JSON, padding, blob.
std::vector<std::uint8_t> handmade(const std::string& json, const std::vector<float>& blob,
                                   const char* magic = "TNSR0001") {
  std::vector<std::uint8_t> out(magic, magic + 8);
  std::uint64_t len = json.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), json.begin(), json.end());
  while (out.size() % 4 != 0) out.push_back(' ');
  for (float f : blob) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

const std::string kTwoTensors =
    R"({"tensors":[{"name":"A","shape":[2,2],"dtype":"f32","offset":0,"byte_length":16},)"
    R"({"name":"B","shape":[3],"dtype":"f32","offset":16,"byte_length":12}]})";

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TensorContainer three_tensors() {
  TensorContainer c;
  const std::vector<float> a{1.0f, -2.5f, 3.25f, 0.0f, 1e-30f, -0.0f};
  const std::vector<float> b{7.0f};
  const std::vector<float> d{0.5f, 0.25f, 0.125f, 1e30f};
  c.add_tensor("conv.weight", {2, 3}, a);
  c.add_tensor("scale", {}, b);
  c.add_tensor("head.bias", {4}, d);
  return c;
}

}  // namespace

TEST_CASE("hand-built file loads") {
  const auto bytes = handmade(kTwoTensors, {1, 2, 3, 4, 0.5f, -1, 2});
  const TensorContainer c = deserialize(bytes);
  REQUIRE(c.size() == 2);
  CHECK(c.manifest()[0].name == "A");
  CHECK(c.manifest()[0].shape == std::vector<std::size_t>{2, 2});
  CHECK(c.manifest()[1].offset == 16);
  CHECK(c.parameter_count() == 7);
  const ParameterVector v = flatten(c);
  CHECK(v.values == std::vector<float>{1, 2, 3, 4, 0.5f, -1, 2});
}

TEST_CASE("key order and whitespace in the manifest do not matter") {
  const std::string json =
      "{ \"tensors\" : [ { \"byte_length\": 8, \"offset\": 0, \"dtype\": \"f32\",\n"
      "  \"shape\": [2], \"name\": \"x\" } ] }";
  const TensorContainer c = deserialize(handmade(json, {1.5f, -3.0f}));
  CHECK(flatten(c).values == std::vector<float>{1.5f, -3.0f});
}

TEST_CASE("serialised layout") {
  TensorContainer c;
  const std::vector<float> a{1, 2, 3, 4}, b{0.5f, -1, 2};
  c.add_tensor("A", {2, 2}, a);
  c.add_tensor("B", {3}, b);
  const auto bytes = serialize(c);
  REQUIRE(bytes.size() > 16);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "TNSR0001");
  std::uint64_t len = 0;
  for (int i = 7; i >= 0; --i) len = (len << 8) | bytes[8 + i];
  const std::size_t blob_start = (16 + len + 3) / 4 * 4;
  CHECK(bytes.size() == blob_start + 28);
  for (std::size_t i = 16 + len; i < blob_start; ++i) CHECK(bytes[i] == ' ');
  float first = 0;
  std::memcpy(&first, bytes.data() + blob_start, 4);
  CHECK(first == 1.0f);
  CHECK(deserialize(bytes) == c);
}

TEST_CASE("save then load is byte identical") {
  testing::TempDir dir;
  const TensorContainer c = three_tensors();
  save_container(c, dir / "a.tnsr");
  const TensorContainer loaded = load_container(dir / "a.tnsr");
  CHECK(loaded == c);
  save_container(loaded, dir / "b.tnsr");
  CHECK(read_bytes(dir / "a.tnsr") == read_bytes(dir / "b.tnsr"));
}

TEST_CASE("flatten order and unflatten") {
  TensorContainer c;
  const std::vector<float> a{0, 1, 10, 11}, b{20, 21, 22};
  c.add_tensor("A", {2, 2}, a);
  c.add_tensor("B", {3}, b);
  const ParameterVector v = flatten(c);
  CHECK(v.values == std::vector<float>{0, 1, 10, 11, 20, 21, 22});
  CHECK(v.provenance == content_hash(v.values));
  CHECK(unflatten(v, c.manifest()) == c);

  const TensorContainer t = three_tensors();
  CHECK(unflatten(flatten(t), t.manifest()) == t);

  CHECK_THROWS_AS(unflatten(std::vector<float>(6), c.manifest()), FormatError);
  CHECK_THROWS_AS(unflatten(std::vector<float>(8), c.manifest()), FormatError);
}

TEST_CASE("content hash") {
  const std::vector<float> empty;
  // SHA-256 of no bytes.
  CHECK(content_hash(empty) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::vector<float> a{1.0f}, b{1.0000001f};
  CHECK(content_hash(a) != content_hash(b));
}

TEST_CASE("malformed files are rejected") {
  const std::vector<float> blob{1, 2, 3, 4, 0.5f, -1, 2};
  CHECK_THROWS_AS(deserialize(handmade(kTwoTensors, blob, "TNSR0002")), FormatError);
  CHECK_THROWS_AS(deserialize(handmade("{\"tensors\": [", blob)), FormatError);
  CHECK_THROWS_AS(deserialize(handmade("[]", blob)), FormatError);

  std::string f16 = kTwoTensors;
  f16.replace(f16.find("f32"), 3, "f16");
  CHECK_THROWS_AS(deserialize(handmade(f16, blob)), FormatError);

  std::string overlap = kTwoTensors;
  overlap.replace(overlap.find("\"offset\":16"), 11, "\"offset\":12");
  CHECK_THROWS_AS(deserialize(handmade(overlap, blob)), FormatError);

  std::string dup = kTwoTensors;
  dup.replace(dup.find("\"B\""), 3, "\"A\"");
  CHECK_THROWS_AS(deserialize(handmade(dup, blob)), FormatError);

  std::string wrong_len = kTwoTensors;
  wrong_len.replace(wrong_len.find("\"byte_length\":12"), 16, "\"byte_length\":16");
  CHECK_THROWS_AS(deserialize(handmade(wrong_len, blob)), FormatError);

  std::vector<float> short_blob = blob;
  short_blob.pop_back();
  CHECK_THROWS_AS(deserialize(handmade(kTwoTensors, short_blob)), FormatError);
  std::vector<float> long_blob = blob;
  long_blob.push_back(9);
  CHECK_THROWS_AS(deserialize(handmade(kTwoTensors, long_blob)), FormatError);

  auto truncated = handmade(kTwoTensors, blob);
  truncated.resize(12);
  CHECK_THROWS_AS(deserialize(truncated), FormatError);

  auto huge = handmade(kTwoTensors, blob);
  huge[15] = 0x7f;
  CHECK_THROWS_AS(deserialize(huge), FormatError);

  CHECK_THROWS_AS(load_container("/nonexistent/model.tnsr"), FormatError);
}

TEST_CASE("container construction errors") {
  TensorContainer c;
  const std::vector<float> four(4);
  c.add_tensor("w", {2, 2}, four);
  CHECK_THROWS_AS(c.add_tensor("w", {4}, four), FormatError);
  CHECK_THROWS_AS(c.add_tensor("v", {3}, four), FormatError);
  CHECK(c.find("w") == 0);
  CHECK(c.find("missing") == c.size());
}

TEST_CASE("synthetic models") {
  const std::vector<std::size_t> small{4, 3};
  const TensorContainer m = synth_model(small, test_seed("synth", 0));
  REQUIRE(m.size() == 2);
  CHECK(m.manifest()[0].name == "layer0.weight");
  CHECK(m.manifest()[0].shape == std::vector<std::size_t>{3, 4});
  CHECK(m.manifest()[1].name == "layer0.bias");
  CHECK(m.manifest()[1].shape == std::vector<std::size_t>{3});
  CHECK(synth_model(small, test_seed("synth", 0)) == m);
  CHECK_FALSE(synth_model(small, test_seed("synth", 1)) == m);

  CHECK(testing::fixture_model(0).parameter_count() == 198656);
  CHECK(testing::fixture_model(0).size() == 8);

  const std::vector<std::size_t> one{4}, zero{4, 0};
  CHECK_THROWS_AS(synth_model(one, test_seed("synth", 0)), FormatError);
  CHECK_THROWS_AS(synth_model(zero, test_seed("synth", 0)), FormatError);
}

TEST_CASE("synthetic weights follow N(0, 1/fan_in)") {
  const std::vector<std::size_t> sizes{400, 250};
  const TensorContainer m = synth_model(sizes, test_seed("synth", 2));
  const auto w = m.tensor(m.find("layer0.weight"));
  REQUIRE(w.size() == 100000);
  std::vector<double> z(w.begin(), w.end());
  for (auto& v : z) v *= std::sqrt(400.0);
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  const double n = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = testing::normal_cdf(z[i]);
    ks = std::max({ks, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  CHECK(ks < 0.02);
}
