#include "bessrl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace bessrl {

namespace {

const char* kNetworkTensorNames[10] = {
    "lstm1.w_ih", "lstm1.w_hh", "lstm1.b",      "lstm2.w_ih",   "lstm2.w_hh",
    "lstm2.b",    "actor_head.w", "actor_head.b", "critic_head.w", "critic_head.b"};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw DataError("checkpoint " + path + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8))
    throw DataError("checkpoint " + path + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in, const std::string& path) {
  std::uint64_t bits = get_u64(in, path);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_tensors(const std::string& path, const NamedTensors& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint " + path + ": cannot open for writing");
  out.write(kCheckpointMagic, 8);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, tensor] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (int d : tensor.shape) put_u64(out, static_cast<std::uint64_t>(d));
    for (double v : tensor.values) put_f64(out, v);
  }
  out.flush();
  if (!out) throw DataError("checkpoint " + path + ": write failed");
}

NamedTensors load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint " + path + ": cannot open");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("checkpoint " + path + ": bad magic (not a checkpoint file)");
  std::uint32_t version = get_u32(in, path);
  if (version != kCheckpointVersion)
    throw DataError("checkpoint " + path + ": unsupported version " + std::to_string(version));
  std::uint32_t count = get_u32(in, path);
  NamedTensors entries;
  entries.reserve(count);
  for (std::uint32_t e = 0; e < count; ++e) {
    std::uint32_t name_len = get_u32(in, path);
    if (name_len > 4096) throw DataError("checkpoint " + path + ": implausible name length");
    std::string name(name_len, '\0');
    if (name_len > 0 && !in.read(name.data(), name_len))
      throw DataError("checkpoint " + path + ": truncated file");
    std::uint32_t ndim = get_u32(in, path);
    if (ndim > 8) throw DataError("checkpoint " + path + ": implausible rank");
    std::vector<int> shape(ndim);
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
      std::uint64_t d = get_u64(in, path);
      if (d > (1u << 24)) throw DataError("checkpoint " + path + ": implausible dimension");
      shape[i] = static_cast<int>(d);
      total *= d;
    }
    Tensor t = Tensor::zeros(shape);
    for (std::uint64_t i = 0; i < total; ++i) t.values[i] = get_f64(in, path);
    entries.emplace_back(std::move(name), std::move(t));
  }
  return entries;
}

void save_checkpoint(const std::string& path, const NetworkParams& params) {
  NamedTensors entries;
  auto tensors = params.tensors();
  for (int i = 0; i < 10; ++i) entries.emplace_back(kNetworkTensorNames[i], *tensors[i]);
  entries.emplace_back("sigma", Tensor::scalar(params.sigma));
  save_tensors(path, entries);
}

NetworkParams load_checkpoint(const std::string& path) {
  NamedTensors entries = load_tensors(path);
  if (entries.size() != 11)
    throw DataError("checkpoint " + path + ": expected 11 entries, found " +
                    std::to_string(entries.size()));
  for (int i = 0; i < 10; ++i)
    if (entries[static_cast<size_t>(i)].first != kNetworkTensorNames[i])
      throw DataError("checkpoint " + path + ": unexpected entry '" +
                      entries[static_cast<size_t>(i)].first + "' (expected '" +
                      kNetworkTensorNames[i] + "')");
  if (entries[10].first != "sigma" || entries[10].second.size() != 1)
    throw DataError("checkpoint " + path + ": missing sigma entry");

  const Tensor& w_ih1 = entries[0].second;
  if (w_ih1.rank() != 2 || w_ih1.dim(0) % 4 != 0)
    throw DataError("checkpoint " + path + ": malformed lstm1.w_ih shape");
  int hidden = w_ih1.dim(0) / 4;
  int input = w_ih1.dim(1);

  NetworkParams params = NetworkParams::zeros(input, hidden, entries[10].second[0]);
  auto tensors = params.tensors();
  for (int i = 0; i < 10; ++i) {
    if (!tensors[i]->same_shape(entries[static_cast<size_t>(i)].second))
      throw DataError("checkpoint " + path + ": shape mismatch for '" +
                      std::string(kNetworkTensorNames[i]) + "'");
    *tensors[i] = entries[static_cast<size_t>(i)].second;
  }
  if (!(params.sigma > 0.0)) throw DataError("checkpoint " + path + ": sigma must be > 0");
  return params;
}

}  // namespace bessrl
