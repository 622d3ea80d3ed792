// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/checkpoint.hpp"

#include <fstream>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace cmadiff {

namespace {
constexpr char kMagic[] = "CMADIFFCK";
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic) - 1);
  write_u32(out, kVersion);
  write_str(out, ckpt.kind);
  write_str(out, ckpt.config_json);
  write_u64(out, ckpt.arrays.size());
  for (const auto& [name, mat] : ckpt.arrays) {
    write_str(out, name);
    write_u64(out, static_cast<uint64_t>(mat.rows()));
    write_u64(out, static_cast<uint64_t>(mat.cols()));
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) write_f64(out, mat(i, j));
    }
  }
  if (!out) fail(ErrorCode::Io, "checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint: " + path);
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, sizeof(magic)) != kMagic) {
    fail(ErrorCode::Parse, "not a checkpoint file: " + path);
  }
  const uint32_t version = read_u32(in);
  if (version != kVersion) {
    fail(ErrorCode::Config, "checkpoint " + path + " has format version " +
                                std::to_string(version) + ", this build reads version " +
                                std::to_string(kVersion));
  }
  Checkpoint ckpt;
  ckpt.kind = read_str(in);
  ckpt.config_json = read_str(in);
  const uint64_t count = read_u64(in);
  for (uint64_t a = 0; a < count; ++a) {
    const std::string name = read_str(in);
    const auto rows = static_cast<Eigen::Index>(read_u64(in));
    const auto cols = static_cast<Eigen::Index>(read_u64(in));
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 32)) {
      fail(ErrorCode::Parse, "checkpoint array '" + name + "' has implausible shape");
    }
    ad::Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_f64(in);
    }
    ckpt.arrays.emplace(name, std::move(m));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, const std::string& expected_kind) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != expected_kind) {
    fail(ErrorCode::Config, "checkpoint " + path + " holds a '" + ckpt.kind +
                                "' model, expected '" + expected_kind + "'");
  }
  return ckpt;
}

}  // namespace cmadiff
