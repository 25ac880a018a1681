#pragma once

#include <cstddef>
#include <string>

#include "ncreg/dataset.hpp"

namespace ncreg {

// Reads a big-endian IDX image/label pair (magic 0x00000803 for images,
// 0x00000801 for labels) into a Dataset: one row per record, pixel bytes
// scaled to [0,1], labels as the response column. max_records > 0 keeps only
// the first max_records entries of both files. Malformed input (bad magic,
// truncation, image/label count mismatch) raises std::runtime_error naming
// the offending byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t max_records = 0);

}  // namespace ncreg
