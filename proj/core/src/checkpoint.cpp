#include <cstring>
#include <fstream>

#include "photosplat/common.hpp"
#include "photosplat/io.hpp"

namespace photosplat {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  require(in.gcount() == 8, "truncated checkpoint: ", path);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

}  // namespace

const std::vector<double>& Checkpoint::block(const std::string& name) const {
  for (const auto& [block_name, values] : blocks)
    if (block_name == name) return values;
  fail("checkpoint block not found: ", name);
}

double Checkpoint::scalar(const std::string& name) const {
  const auto& values = block(name);
  require(values.size() == 1, "checkpoint block '", name,
          "' is not a scalar");
  return values[0];
}

void Checkpoint::add(const std::string& name, std::vector<double> values) {
  blocks.emplace_back(name, std::move(values));
}

void Checkpoint::add_scalar(const std::string& name, double value) {
  blocks.emplace_back(name, std::vector<double>{value});
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [block_name, values] : blocks)
    if (block_name == name) return true;
  return false;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot write checkpoint: ", path);
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, ckpt.iteration);
  put_u64(out, ckpt.blocks.size());
  for (const auto& [name, values] : ckpt.blocks) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, values.size());
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(out, bits);
    }
  }
  require(out.good(), "short write on checkpoint: ", path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open checkpoint: ", path);
  char magic[8];
  in.read(magic, 8);
  require(in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0,
          "not a checkpoint file: ", path);
  Checkpoint ckpt;
  ckpt.iteration = get_u64(in, path);
  const std::uint64_t n_blocks = get_u64(in, path);
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    const std::uint64_t name_len = get_u64(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    require(in.gcount() == static_cast<std::streamsize>(name_len),
            "truncated checkpoint: ", path);
    const std::uint64_t count = get_u64(in, path);
    std::vector<double> values(count);
    for (auto& v : values) {
      const std::uint64_t bits = get_u64(in, path);
      std::memcpy(&v, &bits, 8);
    }
    ckpt.blocks.emplace_back(std::move(name), std::move(values));
  }
  return ckpt;
}

}  // namespace photosplat
