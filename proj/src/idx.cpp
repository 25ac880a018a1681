#include "ncreg/idx.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ncreg {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  throw std::runtime_error(path + ": " + what + " at byte offset " +
                           std::to_string(offset));
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_u32(const std::vector<unsigned char>& bytes,
                       const std::string& path, std::size_t offset) {
  if (offset + 4 > bytes.size()) fail(path, offset, "truncated header");
  return (std::uint32_t(bytes[offset]) << 24) |
         (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) |
         std::uint32_t(bytes[offset + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t max_records) {
  auto img = slurp(images_path);
  std::uint32_t magic = read_u32(img, images_path, 0);
  if (magic != kImagesMagic)
    fail(images_path, 0, "bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", magic);
      return std::string(buf);
    }() + " (want 00000803)");
  std::size_t n_images = read_u32(img, images_path, 4);
  std::size_t rows = read_u32(img, images_path, 8);
  std::size_t cols = read_u32(img, images_path, 12);
  std::size_t pixels = rows * cols;
  if (img.size() < 16 + n_images * pixels)
    fail(images_path, img.size(), "truncated image data");

  auto lab = slurp(labels_path);
  magic = read_u32(lab, labels_path, 0);
  if (magic != kLabelsMagic)
    fail(labels_path, 0, "bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", magic);
      return std::string(buf);
    }() + " (want 00000801)");
  std::size_t n_labels = read_u32(lab, labels_path, 4);
  if (lab.size() < 8 + n_labels)
    fail(labels_path, lab.size(), "truncated label data");

  if (n_images != n_labels)
    fail(labels_path, 4,
         "label count " + std::to_string(n_labels) +
             " does not match image count " + std::to_string(n_images));

  std::size_t n = n_images;
  if (max_records > 0 && max_records < n) n = max_records;

  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  d.y.resize(static_cast<Eigen::Index>(n));
  d.roles.assign(n, Role::train);
  d.feature_names.resize(pixels);
  for (std::size_t j = 0; j < pixels; ++j)
    d.feature_names[j] = "px" + std::to_string(j);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* px = img.data() + 16 + i * pixels;
    for (std::size_t j = 0; j < pixels; ++j)
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          px[j] / 255.0;
    d.y(static_cast<Eigen::Index>(i)) = lab[8 + i];
  }
  return d;
}

}  // namespace ncreg
