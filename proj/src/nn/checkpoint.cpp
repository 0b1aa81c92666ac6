#include "trauma/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "trauma/errors.hpp"

namespace trauma::nn {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(os, v);
}

float get_f32(std::istream& is) {
  const std::uint32_t v = get_u32(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

void save_params(const std::string& path, const ParamSet& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("save_params: cannot open " + path);
  for (const auto& [name, v] : params.items) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& sh = v->value.shape();
    put_u32(os, static_cast<std::uint32_t>(sh.size()));
    for (auto d : sh) put_u32(os, static_cast<std::uint32_t>(d));
    for (std::int64_t i = 0; i < v->value.numel(); ++i)
      put_f32(os, static_cast<float>(v->value[i]));
  }
  if (!os) throw io_error("save_params: write failed for " + path);
}

void load_params(const std::string& path, ParamSet& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("load_params: cannot open " + path);
  struct Record {
    std::vector<std::uint32_t> dims;
    std::vector<float> payload;
  };
  std::map<std::string, Record> records;
  while (true) {
    const std::uint32_t name_len = get_u32(is);
    if (is.eof()) break;
    if (!is) throw io_error("load_params: truncated record in " + path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    Record rec;
    const std::uint32_t rank = get_u32(is);
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      rec.dims.push_back(get_u32(is));
      n *= rec.dims.back();
    }
    rec.payload.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) rec.payload[i] = get_f32(is);
    if (!is) throw io_error("load_params: truncated payload in " + path);
    records.emplace(std::move(name), std::move(rec));
    // Peek for EOF cleanly.
    is.peek();
    if (is.eof()) break;
  }
  if (records.size() != params.items.size())
    throw contract_error("load_params: checkpoint has " +
                         std::to_string(records.size()) + " records, model has " +
                         std::to_string(params.items.size()));
  for (auto& [name, v] : params.items) {
    auto it = records.find(name);
    if (it == records.end())
      throw contract_error("load_params: missing parameter " + name);
    const auto& sh = v->value.shape();
    if (it->second.dims.size() != sh.size())
      throw contract_error("load_params: rank mismatch for " + name);
    for (std::size_t i = 0; i < sh.size(); ++i)
      if (static_cast<std::int64_t>(it->second.dims[i]) != sh[i])
        throw contract_error("load_params: dim mismatch for " + name);
    for (std::int64_t i = 0; i < v->value.numel(); ++i)
      v->value[i] = static_cast<double>(it->second.payload[static_cast<std::size_t>(i)]);
  }
}

}  // namespace trauma::nn
