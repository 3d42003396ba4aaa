#include "rtxc/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rtxc::io {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'X', 'C'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "RTXC container I/O assumes a little-endian host");

template <typename T>
void append_raw(std::vector<unsigned char>& bytes, const T* data, size_t count) {
  const size_t off = bytes.size();
  bytes.resize(off + count * sizeof(T));
  std::memcpy(bytes.data() + off, data, count * sizeof(T));
}

std::vector<size_t> default_shape(std::vector<size_t> shape, size_t n) {
  if (shape.empty()) shape = {n};
  size_t prod = 1;
  for (size_t s : shape) prod *= s;
  require(prod == n, "container: shape does not match element count");
  return shape;
}

}  // namespace

std::string dtype_name(DType t) {
  switch (t) {
    case DType::u1: return "u1";
    case DType::i8: return "i8";
    case DType::f4: return "f4";
    case DType::f8: return "f8";
    case DType::c8: return "c8";
  }
  throw std::logic_error("container: unknown dtype");
}

DType dtype_from_name(const std::string& name) {
  if (name == "u1") return DType::u1;
  if (name == "i8") return DType::i8;
  if (name == "f4") return DType::f4;
  if (name == "f8") return DType::f8;
  if (name == "c8") return DType::c8;
  throw std::runtime_error("container: unsupported dtype '" + name + "'");
}

size_t dtype_size(DType t) {
  switch (t) {
    case DType::u1: return 1;
    case DType::i8: return 8;
    case DType::f4: return 4;
    case DType::f8: return 8;
    case DType::c8: return 8;  // two float32
  }
  throw std::logic_error("container: unknown dtype");
}

size_t Array::element_count() const {
  size_t n = 1;
  for (size_t s : shape) n *= s;
  return n;
}

const Array& Container::get(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw std::runtime_error("container: no array named '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return true;
  return false;
}

void Container::add_f8(const std::string& name, const std::vector<double>& v,
                       std::vector<size_t> shape) {
  Array a;
  a.name = name;
  a.dtype = DType::f8;
  a.shape = default_shape(std::move(shape), v.size());
  append_raw(a.bytes, v.data(), v.size());
  arrays.push_back(std::move(a));
}

void Container::add_u1(const std::string& name, const std::vector<uint8_t>& v,
                       std::vector<size_t> shape) {
  Array a;
  a.name = name;
  a.dtype = DType::u1;
  a.shape = default_shape(std::move(shape), v.size());
  append_raw(a.bytes, v.data(), v.size());
  arrays.push_back(std::move(a));
}

void Container::add_i8(const std::string& name, const std::vector<int64_t>& v,
                       std::vector<size_t> shape) {
  Array a;
  a.name = name;
  a.dtype = DType::i8;
  a.shape = default_shape(std::move(shape), v.size());
  append_raw(a.bytes, v.data(), v.size());
  arrays.push_back(std::move(a));
}

void Container::add_c8(const std::string& name, const std::vector<cplx>& v,
                       std::vector<size_t> shape) {
  Array a;
  a.name = name;
  a.dtype = DType::c8;
  a.shape = default_shape(std::move(shape), v.size());
  std::vector<float> interleaved(2 * v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    interleaved[2 * i] = static_cast<float>(v[i].real());
    interleaved[2 * i + 1] = static_cast<float>(v[i].imag());
  }
  append_raw(a.bytes, interleaved.data(), interleaved.size());
  arrays.push_back(std::move(a));
}

std::vector<double> as_f8(const Array& a) {
  require(a.dtype == DType::f8, "container: array '" + a.name + "' is not f8");
  std::vector<double> v(a.element_count());
  std::memcpy(v.data(), a.bytes.data(), a.bytes.size());
  return v;
}

std::vector<uint8_t> as_u1(const Array& a) {
  require(a.dtype == DType::u1, "container: array '" + a.name + "' is not u1");
  return {a.bytes.begin(), a.bytes.end()};
}

std::vector<int64_t> as_i8(const Array& a) {
  require(a.dtype == DType::i8, "container: array '" + a.name + "' is not i8");
  std::vector<int64_t> v(a.element_count());
  std::memcpy(v.data(), a.bytes.data(), a.bytes.size());
  return v;
}

std::vector<cplx> as_c8(const Array& a) {
  require(a.dtype == DType::c8, "container: array '" + a.name + "' is not c8");
  std::vector<float> interleaved(2 * a.element_count());
  std::memcpy(interleaved.data(), a.bytes.data(), a.bytes.size());
  std::vector<cplx> v(a.element_count());
  for (size_t i = 0; i < v.size(); ++i) v[i] = cplx(interleaved[2 * i], interleaved[2 * i + 1]);
  return v;
}

void write_container(const std::string& path, const Container& container) {
  nlohmann::json header;
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : container.arrays) {
    require(!a.name.empty(), "container: array names must be non-empty");
    for (const auto& other : container.arrays)
      require(&other == &a || other.name != a.name,
              "container: duplicate array name '" + a.name + "'");
    require(a.bytes.size() == a.element_count() * dtype_size(a.dtype),
            "container: payload size mismatch for '" + a.name + "'");
    header["arrays"].push_back(
        {{"name", a.name}, {"dtype", dtype_name(a.dtype)}, {"shape", a.shape}});
  }
  header["metadata"] = container.metadata;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("container: cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  const uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& a : container.arrays)
    out.write(reinterpret_cast<const char*>(a.bytes.data()),
              static_cast<std::streamsize>(a.bytes.size()));
  if (!out) throw std::runtime_error("container: write failed for '" + path + "'");
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("container: cannot open '" + path + "'");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("container: bad magic in '" + path + "' (not an RTXC file)");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kVersion)
    throw std::runtime_error("container: unsupported version " + std::to_string(version));
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw std::runtime_error("container: truncated header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("container: truncated header");

  nlohmann::json header = nlohmann::json::parse(header_text);
  Container c;
  c.metadata = header.value("metadata", nlohmann::json::object());
  for (const auto& entry : header.at("arrays")) {
    Array a;
    a.name = entry.at("name").get<std::string>();
    a.dtype = dtype_from_name(entry.at("dtype").get<std::string>());
    a.shape = entry.at("shape").get<std::vector<size_t>>();
    const size_t nbytes = a.element_count() * dtype_size(a.dtype);
    a.bytes.resize(nbytes);
    in.read(reinterpret_cast<char*>(a.bytes.data()), static_cast<std::streamsize>(nbytes));
    if (!in)
      throw std::runtime_error("container: truncated payload for array '" + a.name +
                               "' (header shape inconsistent with file size)");
    c.arrays.push_back(std::move(a));
  }
  return c;
}

}  // namespace rtxc::io
