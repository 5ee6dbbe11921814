#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "intercom/error.hpp"

namespace intercom {

// Host-endian (little-endian on supported targets) binary helpers for model files.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void write(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void write_string(const std::string& s) {
    write<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void write_doubles(const std::vector<double>& v) {
    write<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T read() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  std::string read_string() {
    const auto n = read<std::uint32_t>();
    if (n > (1u << 26)) throw DataError("binary model: implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    check();
    return s;
  }
  std::vector<double> read_doubles() {
    const auto n = read<std::uint64_t>();
    if (n > (1ull << 32)) throw DataError("binary model: implausible array length");
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    check();
    return v;
  }
  void expect_magic(const std::string& magic) {
    std::string got(magic.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    check();
    if (got != magic) throw DataError("binary model: bad magic, expected " + magic);
  }

 private:
  void check() {
    if (!in_) throw DataError("binary model: truncated file");
  }
  std::istream& in_;
};

}  // namespace intercom
