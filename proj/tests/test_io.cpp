#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "photosplat/io.hpp"
#include "photosplat/random.hpp"
#include "photosplat/toml.hpp"

using namespace photosplat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "photosplat_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("toml parses scalars, comments, and sections") {
  const std::string text =
      "# header comment\n"
      "count = 12\n"
      "ratio = -0.75   # trailing comment\n"
      "label = \"orbit cams\"\n"
      "enabled = true\n"
      "\n"
      "[nested]\n"
      "weights = [1.0, 2.5, -3]\n"
      "flag = false\n";
  auto doc = toml_parse(text);
  CHECK(doc.integer("count") == 12);
  CHECK(doc.number("ratio") == doctest::Approx(-0.75));
  CHECK(doc.string_or("label", "") == "orbit cams");
  CHECK(doc.boolean_or("enabled", false));
  CHECK_FALSE(doc.boolean_or("nested.flag", true));
  auto w = doc.list_or("nested.weights", {});
  REQUIRE(w.size() == 3);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 2.5);
  CHECK(w[2] == -3.0);

  CHECK(doc.has("count"));
  CHECK_FALSE(doc.has("missing"));
  CHECK(doc.number_or("missing", 4.5) == 4.5);
  CHECK(doc.integer_or("missing", 9) == 9);
  CHECK(doc.string_or("missing", "d") == "d");
  CHECK(doc.list_or("missing", {7.0}) == std::vector<double>{7.0});
}

TEST_CASE("toml parses arrays of tables in order") {
  const std::string text =
      "[[blob]]\n"
      "radius = 0.2\n"
      "center = [0.1, -0.3]\n"
      "[[blob]]\n"
      "radius = 0.05\n"
      "center = [0.6, 0.4]\n";
  auto doc = toml_parse(text);
  const auto& blobs = doc.table_array("blob");
  REQUIRE(blobs.size() == 2);
  CHECK(toml_entry_number(blobs[0], "radius") == doctest::Approx(0.2));
  CHECK(toml_entry_number(blobs[1], "radius") == doctest::Approx(0.05));
  CHECK(toml_entry_list(blobs[0], "center") ==
        std::vector<double>{0.1, -0.3});
  CHECK(doc.table_array("absent").empty());
}

TEST_CASE("toml rejects malformed input with line numbers") {
  CHECK_THROWS_WITH_AS(toml_parse("just words\n"), doctest::Contains("line 1"),
                       Error);
  CHECK_THROWS_WITH_AS(toml_parse("a = 1\nb =\n"), doctest::Contains("line 2"),
                       Error);
  CHECK_THROWS_WITH_AS(toml_parse("x = [1, 2\n"), doctest::Contains("line 1"),
                       Error);
  CHECK_THROWS_WITH_AS(toml_parse("s = \"open\n"), doctest::Contains("line 1"),
                       Error);
  CHECK_THROWS_AS(toml_parse("[]\n"), Error);
}

TEST_CASE("toml accessors enforce kinds and integrality") {
  auto doc = toml_parse("n = 3.5\ns = \"x\"\n");
  CHECK_THROWS_WITH_AS(doc.number("gone"), doctest::Contains("missing key"),
                       Error);
  CHECK_THROWS_AS(doc.number("s"), Error);
  CHECK_THROWS_WITH_AS(doc.integer("n"), doctest::Contains("integer"), Error);
}

TEST_CASE("toml_parse_file reads from disk and names missing files") {
  auto path = scratch("cfg.toml");
  write_text_file(path.string(), "alpha = 2\n");
  auto doc = toml_parse_file(path.string());
  CHECK(doc.integer("alpha") == 2);
  CHECK_THROWS_WITH_AS(toml_parse_file((path / "nope").string()),
                       doctest::Contains("cannot open"), Error);
}

TEST_CASE("sha256 matches published vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
        "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
  const std::string abc = "abc";
  CHECK(sha256_hex(abc.data(), abc.size()) == sha256_hex(abc));
}

TEST_CASE("sha256_hex_file hashes file bytes") {
  auto path = scratch("payload.bin");
  write_text_file(path.string(), "abc");
  CHECK(sha256_hex_file(path.string()) == sha256_hex("abc"));
  CHECK_THROWS_WITH_AS(sha256_hex_file(scratch("missing.bin").string()),
                       doctest::Contains("cannot open"), Error);
}

TEST_CASE("png round-trips grid-aligned values bit-exactly") {
  for (std::size_t channels : {std::size_t{1}, std::size_t{3}}) {
    Image img(7, 5, channels);
    Rng rng(31 + channels);
    for (auto& p : img.pixels)
      p = static_cast<double>(rng.uniform_int(0, 65535)) / 65535.0;
    auto path = scratch("grid" + std::to_string(channels) + ".png");
    write_png16(path.string(), img);
    auto back = read_png16(path.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.channels == channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      CHECK(back.pixels[i] == img.pixels[i]);
  }
}

TEST_CASE("png quantizes to the nearest 16-bit level and clamps") {
  Image img(3, 1, 1);
  img.at(0, 0, 0) = 0.123456789;
  img.at(0, 1, 0) = -0.25;
  img.at(0, 2, 0) = 1.75;
  auto path = scratch("quant.png");
  write_png16(path.string(), img);
  auto back = read_png16(path.string());
  CHECK(back.at(0, 0, 0) ==
        std::round(0.123456789 * 65535.0) / 65535.0);
  CHECK(back.at(0, 1, 0) == 0.0);
  CHECK(back.at(0, 2, 0) == 1.0);
}

TEST_CASE("png reader reports corrupt and missing files by name") {
  auto path = scratch("broken.png");
  {
    Image img(6, 6, 3);
    write_png16(path.string(), img);
  }
  auto bytes = read_text_file(path.string());
  write_text_file(path.string(), bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_WITH_AS(read_png16(path.string()),
                       doctest::Contains("broken.png"), Error);

  write_text_file(path.string(), "not a png at all");
  CHECK_THROWS_AS(read_png16(path.string()), Error);

  CHECK_THROWS_WITH_AS(read_png16(scratch("absent.png").string()),
                       doctest::Contains("cannot open"), Error);
}

TEST_CASE("png writer rejects unsupported channel counts") {
  Image img(4, 4, 2);
  CHECK_THROWS_AS(write_png16(scratch("two.png").string(), img), Error);
}

TEST_CASE("image and tensor views agree") {
  Rng rng(5);
  Image rgb(4, 3, 3);
  for (auto& p : rgb.pixels) p = rng.uniform();
  auto t = image_to_tensor(rgb);
  REQUIRE(t->shape() == std::vector<std::size_t>{3, 4, 3});
  auto back = tensor_to_image(*t);
  CHECK(back.pixels == rgb.pixels);

  Image gray(4, 3, 1);
  for (auto& p : gray.pixels) p = rng.uniform();
  auto g = image_to_tensor(gray);
  REQUIRE(g->shape() == std::vector<std::size_t>{3, 4});
  CHECK(tensor_to_image(*g).pixels == gray.pixels);
}

TEST_CASE("checkpoint round-trips doubles bit-exactly") {
  Checkpoint ckpt;
  ckpt.iteration = 123456789012345ull;
  Rng rng(9);
  std::vector<double> wild;
  for (int i = 0; i < 64; ++i) wild.push_back(rng.normal() * 1e3);
  wild.push_back(0.0);
  wild.push_back(-0.0);
  wild.push_back(1e-308);
  wild.push_back(-1.7976931348623157e308);
  ckpt.add("weights", wild);
  ckpt.add_scalar("lr", 1.6e-3);
  ckpt.add("empty", {});

  auto path = scratch("state.ckpt");
  write_checkpoint(path.string(), ckpt);
  auto back = read_checkpoint(path.string());
  CHECK(back.iteration == ckpt.iteration);
  REQUIRE(back.has("weights"));
  const auto& w = back.block("weights");
  REQUIRE(w.size() == wild.size());
  for (std::size_t i = 0; i < wild.size(); ++i) {
    CHECK(std::memcmp(&w[i], &wild[i], sizeof(double)) == 0);
  }
  CHECK(back.scalar("lr") == 1.6e-3);
  CHECK(back.block("empty").empty());
  CHECK_FALSE(back.has("ghost"));
}

TEST_CASE("checkpoint reader rejects damaged files") {
  Checkpoint ckpt;
  ckpt.add("block", {1.0, 2.0, 3.0});
  auto path = scratch("damaged.ckpt");
  write_checkpoint(path.string(), ckpt);

  auto bytes = read_text_file(path.string());
  write_text_file(path.string(), bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_WITH_AS(read_checkpoint(path.string()),
                       doctest::Contains("damaged.ckpt"), Error);

  write_text_file(path.string(), "XXXXXXXX" + bytes.substr(8));
  CHECK_THROWS_AS(read_checkpoint(path.string()), Error);

  CHECK_THROWS_WITH_AS(read_checkpoint(scratch("void.ckpt").string()),
                       doctest::Contains("cannot open"), Error);

  Checkpoint missing;
  CHECK_THROWS_WITH_AS(missing.block("weights"),
                       doctest::Contains("checkpoint block not found"), Error);
}
