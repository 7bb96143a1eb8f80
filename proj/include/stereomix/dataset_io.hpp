#pragma once

#include <string>
#include <vector>

#include "stereomix/data.hpp"

namespace smx {

// On-disk layout: one directory per sample holding left.png / right.png
// (8-bit), gt.pfm (32-bit float, raw disparity in pixels) and meta.txt
// (d_max, sr_factor, seed, base size). A manifest at the root lists splits
// and seeds.
void write_sample(const std::string& dir, const StereoSample& sample);
StereoSample load_sample(const std::string& dir);

struct DatasetCounts {
    int train = 0, val = 0, test = 0, ood = 0;
};

void write_dataset(const std::string& root, const Dataset& ds, const SceneConfig& tmpl,
                   uint64_t master_seed);

// Sample directories of one split ("train", "val", "test", "ood"), from the
// manifest, in index order.
std::vector<std::string> list_split(const std::string& root, const std::string& split);

std::vector<StereoSample> load_split(const std::string& root, const std::string& split);

// Flat key = value parser shared by meta/manifest files.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path);

} // namespace smx
