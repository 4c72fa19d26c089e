#pragma once

#include "bwnn/dataset.hpp"
#include "bwnn/rng.hpp"

namespace bwnn {

// CSV with a header row and numeric features; rows are L2-normalized, labels
// mapped to class indices in first-seen order. Throws with row/column context.
Dataset load_csv(const std::string& path, const std::string& label_column);

void write_csv(const Dataset& data, const std::string& path, const std::string& label_column);

// Standard IDX pair (big-endian magic 0x803 images / 0x801 labels). Pixels are
// scaled to [0,1], flattened, L2-normalized; subsample drawn without
// replacement from the seed (0 = keep all).
Dataset load_idx(const std::string& images_path, const std::string& labels_path, int subsample,
                 std::uint64_t seed);

}  // namespace bwnn
