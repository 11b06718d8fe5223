#pragma once

// PRF1 field files: "PRF1" | u32 width | u32 height | u8 dtype | 3 zero bytes |
// row-major little-endian f64 payload (dtype 0 real, 1 interleaved complex).

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sparsephase/grid.hpp"

namespace sparsephase {

class PrfError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Truncated, UnknownDtype, BadShape };

  PrfError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class PrfDtype : std::uint8_t { Real = 0, Complex = 1 };

using FieldFile = std::variant<RealGrid, ComplexField>;

namespace detail {

inline constexpr std::array<char, 4> kPrfMagic{'P', 'R', 'F', '1'};
inline constexpr std::size_t kPrfHeaderSize = 16;

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

inline std::vector<unsigned char> prf_header(std::size_t w, std::size_t h, PrfDtype dtype) {
  std::vector<unsigned char> out(kPrfMagic.begin(), kPrfMagic.end());
  put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(h));
  out.push_back(static_cast<unsigned char>(dtype));
  out.insert(out.end(), 3, 0);
  return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw PrfError(PrfError::Kind::Io, "cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw PrfError(PrfError::Kind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace detail

inline std::vector<unsigned char> encode_prf(const ComplexField& field) {
  auto out = detail::prf_header(field.width(), field.height(), PrfDtype::Complex);
  out.reserve(out.size() + field.size() * 16);
  for (const auto& v : field.data()) {
    detail::put_f64(out, v.real());
    detail::put_f64(out, v.imag());
  }
  return out;
}

inline std::vector<unsigned char> encode_prf(const RealGrid& grid) {
  auto out = detail::prf_header(grid.width(), grid.height(), PrfDtype::Real);
  out.reserve(out.size() + grid.size() * 8);
  for (double v : grid.data()) detail::put_f64(out, v);
  return out;
}

inline FieldFile decode_prf(const std::vector<unsigned char>& bytes, const std::string& origin = "<memory>") {
  using detail::kPrfHeaderSize;
  if (bytes.size() < 4 || !std::equal(detail::kPrfMagic.begin(), detail::kPrfMagic.end(), bytes.begin())) {
    throw PrfError(PrfError::Kind::BadMagic, "'" + origin + "' is not a PRF1 file (bad magic)");
  }
  if (bytes.size() < kPrfHeaderSize) {
    throw PrfError(PrfError::Kind::Truncated, "'" + origin + "' has a truncated header");
  }
  const std::size_t w = detail::get_u32(bytes.data() + 4);
  const std::size_t h = detail::get_u32(bytes.data() + 8);
  const auto dtype = bytes[12];
  if (dtype > 1) {
    throw PrfError(PrfError::Kind::UnknownDtype,
                   "'" + origin + "' has unknown dtype code " + std::to_string(dtype));
  }
  if (w < 2 || h < 2) {
    throw PrfError(PrfError::Kind::BadShape, "'" + origin + "' declares a grid smaller than 2x2");
  }
  const std::size_t per_sample = dtype == 0 ? 8 : 16;
  const std::size_t expected = kPrfHeaderSize + w * h * per_sample;
  if (bytes.size() < expected) {
    throw PrfError(PrfError::Kind::Truncated, "'" + origin + "' payload is truncated: " +
                                                  std::to_string(bytes.size()) + " of " +
                                                  std::to_string(expected) + " bytes");
  }
  const unsigned char* p = bytes.data() + kPrfHeaderSize;
  if (dtype == 0) {
    std::vector<double> data(w * h);
    for (auto& v : data) {
      v = detail::get_f64(p);
      p += 8;
    }
    return RealGrid(w, h, std::move(data));
  }
  std::vector<complex_t> data(w * h);
  for (auto& v : data) {
    v = complex_t(detail::get_f64(p), detail::get_f64(p + 8));
    p += 16;
  }
  return ComplexField(w, h, std::move(data));
}

inline void write_field_file(const ComplexField& field, const std::filesystem::path& path) {
  detail::write_bytes(path, encode_prf(field));
}

inline void write_field_file(const RealGrid& grid, const std::filesystem::path& path) {
  detail::write_bytes(path, encode_prf(grid));
}

inline void write_field_file(const MagnitudeData& mag, const std::filesystem::path& path) {
  write_field_file(RealGrid::from(mag), path);
}

inline FieldFile read_field_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PrfError(PrfError::Kind::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_prf(bytes, path.string());
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
  auto file = read_field_file(path);
  if (auto* c = std::get_if<ComplexField>(&file)) return std::move(*c);
  throw PrfError(PrfError::Kind::UnknownDtype, "'" + path.string() + "' holds a real grid, expected complex");
}

inline RealGrid read_real_grid(const std::filesystem::path& path) {
  auto file = read_field_file(path);
  if (auto* r = std::get_if<RealGrid>(&file)) return std::move(*r);
  throw PrfError(PrfError::Kind::UnknownDtype, "'" + path.string() + "' holds a complex field, expected real");
}

}  // namespace sparsephase
