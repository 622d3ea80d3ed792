// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "core/gzip_stream.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <vector>

#include "core/error.hpp"

namespace cmadiff {

namespace {

// Incremental zlib inflate as a read-only streambuf (window 15+16 = gzip).
class GzipInBuf : public std::streambuf {
 public:
  explicit GzipInBuf(std::unique_ptr<std::ifstream> src)
      : src_(std::move(src)), in_(kChunk), out_(kChunk) {
    std::memset(&strm_, 0, sizeof(strm_));
    if (inflateInit2(&strm_, 15 + 16) != Z_OK) {
      fail(ErrorCode::Internal, "inflateInit2 failed");
    }
  }

  ~GzipInBuf() override { inflateEnd(&strm_); }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    if (finished_) return traits_type::eof();

    strm_.next_out = reinterpret_cast<Bytef*>(out_.data());
    strm_.avail_out = static_cast<uInt>(out_.size());
    while (strm_.avail_out == out_.size()) {
      if (strm_.avail_in == 0 && !src_->eof()) {
        src_->read(in_.data(), static_cast<std::streamsize>(in_.size()));
        strm_.next_in = reinterpret_cast<Bytef*>(in_.data());
        strm_.avail_in = static_cast<uInt>(src_->gcount());
      }
      const int rc = inflate(&strm_, Z_NO_FLUSH);
      if (rc == Z_STREAM_END) {
        finished_ = true;
        break;
      }
      if (rc != Z_OK) {
        fail(ErrorCode::Parse, std::string("gzip decompression failed: ") +
                                   (strm_.msg ? strm_.msg : "corrupt stream"));
      }
      if (strm_.avail_in == 0 && src_->eof() && strm_.avail_out == out_.size()) {
        fail(ErrorCode::Parse, "gzip stream truncated");
      }
    }
    const size_t produced = out_.size() - strm_.avail_out;
    if (produced == 0) return traits_type::eof();
    setg(out_.data(), out_.data(), out_.data() + produced);
    return traits_type::to_int_type(*gptr());
  }

 private:
  static constexpr size_t kChunk = 1 << 16;
  std::unique_ptr<std::ifstream> src_;
  std::vector<char> in_, out_;
  z_stream strm_;
  bool finished_ = false;
};

class GzipIStream : public std::istream {
 public:
  explicit GzipIStream(std::unique_ptr<std::ifstream> src)
      : std::istream(nullptr), buf_(std::move(src)) {
    rdbuf(&buf_);
  }

 private:
  GzipInBuf buf_;
};

}  // namespace

std::unique_ptr<std::istream> open_maybe_gzip(const std::string& path) {
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) fail(ErrorCode::Io, "cannot open input file: " + path);
  const int b0 = file->get();
  const int b1 = file->get();
  file->clear();
  file->seekg(0);
  if (b0 == 0x1f && b1 == 0x8b) {
    return std::make_unique<GzipIStream>(std::move(file));
  }
  return file;
}

}  // namespace cmadiff
