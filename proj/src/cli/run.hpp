// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace cmadiff {

// Full command-line entrypoint (subcommands: build-dataset, featurize,
// train-cvae, train-aligner, train-diffusion, generate, evaluate, selftest).
// Returns a process exit code; errors print one line to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace cmadiff
