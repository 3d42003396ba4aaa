#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtxc/types.hpp"

namespace rtxc::io {

/// Element types of the RTXC container. Complex data is stored as interleaved
/// 32-bit float pairs ("c8"); the other tags follow numpy-style sizes.
enum class DType { u1, i8, f4, f8, c8 };

std::string dtype_name(DType t);
DType dtype_from_name(const std::string& name);
size_t dtype_size(DType t);

struct Array {
  std::string name;
  DType dtype = DType::f8;
  std::vector<size_t> shape;
  std::vector<unsigned char> bytes;  ///< raw little-endian payload

  size_t element_count() const;
};

/// File layout: magic "RTXC" | version u32 LE | header length u64 LE |
/// JSON header (array names, dtypes, shapes, metadata) | raw payload in
/// header order. Round trips are bit-exact.
struct Container {
  std::vector<Array> arrays;
  nlohmann::json metadata = nlohmann::json::object();

  const Array& get(const std::string& name) const;  ///< throws when missing
  bool has(const std::string& name) const;

  void add_f8(const std::string& name, const std::vector<double>& v,
              std::vector<size_t> shape = {});
  void add_u1(const std::string& name, const std::vector<uint8_t>& v,
              std::vector<size_t> shape = {});
  void add_i8(const std::string& name, const std::vector<int64_t>& v,
              std::vector<size_t> shape = {});
  void add_c8(const std::string& name, const std::vector<cplx>& v,
              std::vector<size_t> shape = {});  ///< cast down to float pairs
};

std::vector<double> as_f8(const Array& a);
std::vector<uint8_t> as_u1(const Array& a);
std::vector<int64_t> as_i8(const Array& a);
std::vector<cplx> as_c8(const Array& a);  ///< widened back to double precision

void write_container(const std::string& path, const Container& container);
Container read_container(const std::string& path);

}  // namespace rtxc::io
