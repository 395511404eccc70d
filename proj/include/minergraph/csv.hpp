#pragma once

#include <zlib.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <streambuf>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "minergraph/error.hpp"

namespace minergraph {

// std::streambuf over a zlib gzFile.
class GzStreamBuf : public std::streambuf {
 public:
  explicit GzStreamBuf(gzFile file) : file_(file) { setg(buffer_.data(), buffer_.data(), buffer_.data()); }
  GzStreamBuf(const GzStreamBuf&) = delete;
  GzStreamBuf& operator=(const GzStreamBuf&) = delete;
  ~GzStreamBuf() override {
    if (file_ != nullptr) gzclose(file_);
  }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
    if (n <= 0) return traits_type::eof();
    setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  std::array<char, 1 << 16> buffer_{};
};

// Input file opened by extension: "*.gz" is decompressed on the fly.
class InputFile {
 public:
  explicit InputFile(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
      throw FileError(path.string(), "no such file");
    }
    if (path.extension() == ".gz") {
      gzFile f = gzopen(path.c_str(), "rb");
      if (f == nullptr) throw FileError(path.string(), "cannot open");
      gzbuffer(f, 1 << 17);
      gz_ = std::make_unique<GzStreamBuf>(f);
      stream_ = std::make_unique<std::istream>(gz_.get());
    } else {
      auto f = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*f) throw FileError(path.string(), "cannot open");
      stream_ = std::move(f);
    }
  }

  std::istream& stream() noexcept { return *stream_; }

 private:
  std::unique_ptr<GzStreamBuf> gz_;
  std::unique_ptr<std::istream> stream_;
};

// Line-oriented reader for comma-delimited text with a mandatory header.
// Fields are views into the current line and stay valid until next().
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads the header and checks it against `expected` (exact column names).
  void expect_header(const std::vector<std::string_view>& expected) {
    if (!next()) throw ParseError(1, "missing header");
    bool ok = fields_.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = trimmed(fields_[i]) == expected[i];
    if (!ok) {
      std::string want;
      for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
      throw ParseError(line_number_, "expected header " + want);
    }
  }

  // Advances to the next non-blank line. Returns false at end of input.
  bool next() {
    while (std::getline(in_, line_)) {
      ++line_number_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      split();
      return true;
    }
    return false;
  }

  std::size_t line_number() const noexcept { return line_number_; }
  const std::vector<std::string_view>& fields() const noexcept { return fields_; }

  std::string_view field(std::size_t i) const {
    if (i >= fields_.size()) throw ParseError(line_number_, "missing column " + std::to_string(i + 1));
    return trimmed(fields_[i]);
  }

  void require_columns(std::size_t n) const {
    if (fields_.size() != n) {
      throw ParseError(line_number_, "expected " + std::to_string(n) + " columns, got " +
                                         std::to_string(fields_.size()));
    }
  }

  template <typename Int>
  Int integer(std::size_t i, std::string_view name) const {
    const auto text = field(i);
    Int value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ParseError(line_number_, "invalid " + std::string(name) + " '" + std::string(text) + "'");
    }
    return value;
  }

  double real(std::size_t i, std::string_view name) const {
    const auto text = field(i);
    double value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ParseError(line_number_, "invalid " + std::string(name) + " '" + std::string(text) + "'");
    }
    return value;
  }

 private:
  static std::string_view trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
  }

  void split() {
    fields_.clear();
    std::string_view rest(line_);
    for (;;) {
      const auto comma = rest.find(',');
      fields_.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }

  std::istream& in_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::size_t line_number_ = 0;
};

// Writes to "<path>.tmp" and renames over `path` on commit(). An uncommitted
// file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw FileError(path_.string(), "cannot open for writing");
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() noexcept { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw FileError(path_.string(), "write failed");
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw FileError(path_.string(), "rename failed: " + ec.message());
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace minergraph
