#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "ncreg/idx.hpp"

using ncreg::Dataset;

namespace {

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// 3 images of 2x2 pixels with easily recognizable byte values
std::vector<unsigned char> image_bytes(std::uint32_t magic = 0x00000803,
                                       std::uint32_t count = 3) {
  std::vector<unsigned char> out;
  push_u32(out, magic);
  push_u32(out, count);
  push_u32(out, 2);
  push_u32(out, 2);
  for (unsigned i = 0; i < 12; ++i) out.push_back(static_cast<unsigned char>(i * 20));
  return out;
}

std::vector<unsigned char> label_bytes(std::uint32_t magic = 0x00000801,
                                       std::uint32_t count = 3) {
  std::vector<unsigned char> out;
  push_u32(out, magic);
  push_u32(out, count);
  out.push_back(7);
  out.push_back(0);
  out.push_back(2);
  return out;
}

std::string thrown(const std::string& img, const std::string& lab, std::size_t max = 0) {
  try {
    ncreg::load_idx(img, lab, max);
  } catch (const std::runtime_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("well-formed pair loads with scaled pixels") {
  write_file("tmp_idx_img", image_bytes());
  write_file("tmp_idx_lab", label_bytes());
  Dataset d = ncreg::load_idx("tmp_idx_img", "tmp_idx_lab");

  REQUIRE(d.n() == 3);
  REQUIRE(d.p() == 4);
  CHECK(d.X(0, 0) == doctest::Approx(0.0));
  CHECK(d.X(0, 1) == doctest::Approx(20.0 / 255.0).epsilon(1e-12));
  CHECK(d.X(2, 3) == doctest::Approx(220.0 / 255.0).epsilon(1e-12));
  CHECK(d.y(0) == 7.0);
  CHECK(d.y(1) == 0.0);
  CHECK(d.y(2) == 2.0);
  REQUIRE(d.roles.size() == 3);
  for (auto r : d.roles) CHECK(r == ncreg::Role::train);
  REQUIRE(d.feature_names.size() == 4);
  CHECK(d.feature_names[0] == "px0");
  CHECK(d.feature_names[3] == "px3");

  SUBCASE("max_records truncates both sides") {
    Dataset head = ncreg::load_idx("tmp_idx_img", "tmp_idx_lab", 2);
    CHECK(head.n() == 2);
    CHECK(head.y(1) == 0.0);
    // larger than the file is a no-op
    CHECK(ncreg::load_idx("tmp_idx_img", "tmp_idx_lab", 99).n() == 3);
  }
}

TEST_CASE("bad magic is reported with the hex value and offset") {
  write_file("tmp_idx_badmagic", image_bytes(0x00000804));
  write_file("tmp_idx_lab", label_bytes());
  std::string msg = thrown("tmp_idx_badmagic", "tmp_idx_lab");
  CHECK(msg.find("bad magic 0x00000804") != std::string::npos);
  CHECK(msg.find("want 00000803") != std::string::npos);
  CHECK(msg.find("at byte offset 0") != std::string::npos);

  // labels checked with their own magic
  write_file("tmp_idx_img", image_bytes());
  write_file("tmp_idx_lab_badmagic", label_bytes(0x00000803));
  std::string msg2 = thrown("tmp_idx_img", "tmp_idx_lab_badmagic");
  CHECK(msg2.find("want 00000801") != std::string::npos);
}

TEST_CASE("truncation errors carry the byte offset") {
  std::vector<unsigned char> img = image_bytes();
  img.resize(20);  // header survives, pixel data cut off
  write_file("tmp_idx_trunc", img);
  write_file("tmp_idx_lab", label_bytes());
  std::string msg = thrown("tmp_idx_trunc", "tmp_idx_lab");
  CHECK(msg.find("truncated image data") != std::string::npos);
  CHECK(msg.find("at byte offset 20") != std::string::npos);

  std::vector<unsigned char> short_header = {0x00, 0x00, 0x08};
  write_file("tmp_idx_short", short_header);
  CHECK(thrown("tmp_idx_short", "tmp_idx_lab").find("truncated header") != std::string::npos);

  std::vector<unsigned char> lab = label_bytes();
  lab.resize(9);  // promises 3 labels, delivers 1
  write_file("tmp_idx_lab_trunc", lab);
  write_file("tmp_idx_img", image_bytes());
  std::string msg3 = thrown("tmp_idx_img", "tmp_idx_lab_trunc");
  CHECK(msg3.find("truncated label data") != std::string::npos);
  CHECK(msg3.find("at byte offset 9") != std::string::npos);
}

TEST_CASE("image/label count mismatch") {
  write_file("tmp_idx_img", image_bytes());
  std::vector<unsigned char> lab;
  push_u32(lab, 0x00000801);
  push_u32(lab, 2);
  lab.push_back(1);
  lab.push_back(2);
  write_file("tmp_idx_lab2", lab);
  std::string msg = thrown("tmp_idx_img", "tmp_idx_lab2");
  CHECK(msg.find("label count 2 does not match image count 3") != std::string::npos);
  CHECK(msg.find("at byte offset 4") != std::string::npos);
}

TEST_CASE("missing file") {
  CHECK(thrown("tmp_idx_nonexistent", "tmp_idx_lab").find("cannot open") != std::string::npos);
}
