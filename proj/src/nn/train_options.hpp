// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace cmadiff {

// Shared optimization knobs: Adam at lr 1e-4, step decay x0.9 every 30
// epochs, batch 64 unless overridden.
struct TrainOptions {
  int epochs = 100;
  int batch_size = 64;
  double lr = 1e-4;
  int lr_step_epochs = 30;
  double lr_decay = 0.9;
  int save_interval = 0;  // epochs between periodic checkpoints; 0 disables
  bool verbose = false;   // per-epoch progress on stderr
};

inline double scheduled_lr(const TrainOptions& opts, int epoch /*1-based*/) {
  double lr = opts.lr;
  if (opts.lr_step_epochs > 0) {
    for (int e = opts.lr_step_epochs; e < epoch; e += opts.lr_step_epochs) lr *= opts.lr_decay;
  }
  return lr;
}

}  // namespace cmadiff
