#pragma once

#include <string>

#include "stereomix/backbone.hpp"

namespace smx {

// Everything needed to resume or rerun a training job bitwise-identically:
// model tensors, optimizer state, the training configuration and progress.
struct Checkpoint {
    Model model;
    AdamState adam;
    TrainConfig cfg;
    int n_down = 3, base_ch = 16;
    int epochs_done = 0;
};

// Versioned binary container; written atomically (temp file + rename).
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

} // namespace smx
