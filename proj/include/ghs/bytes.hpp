#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::bytes {

template <typename T>
T byteswap(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
    std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

/// Appends little-endian encodings to a byte buffer.
class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  void put_bytes(std::span<const unsigned char> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }

  void put_string(const std::string& s) {
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  /// Fixed-width field, NUL padded; longer strings are an error.
  void put_fixed(const std::string& s, std::size_t width) {
    if (s.size() > width) {
      throw ConfigError("string '" + s + "' exceeds fixed field width " +
                        std::to_string(width));
    }
    put_string(s);
    buf_.insert(buf_.end(), width - s.size(), 0);
  }

  const std::vector<unsigned char>& data() const { return buf_; }
  std::vector<unsigned char> take() { return std::move(buf_); }

 private:
  std::vector<unsigned char> buf_;
};

/// Bounds-checked little-endian cursor; truncation reports the byte offset.
class Reader {
 public:
  explicit Reader(std::span<const unsigned char> data) : data_(data) {}

  template <typename T>
  T get(const char* field) {
    static_assert(std::is_arithmetic_v<T>);
    require(sizeof(T), field);
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    return value;
  }

  std::string get_string(std::size_t n, const char* field) {
    require(n, field);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void require(std::size_t n, const char* field) const {
    if (data_.size() - pos_ < n) {
      throw FormatError(std::string("truncated while reading ") + field, pos_);
    }
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, std::span<const unsigned char> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace ghs::bytes
