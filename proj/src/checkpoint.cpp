#include "dymacl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dymacl {

static_assert(std::endian::native == std::endian::little,
              "container i/o assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'Y', 'M', 'A', 'C', 'N', 'T', '\0'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  std::ifstream is;

  void read_bytes(void* dst, std::size_t n) {
    is.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
      throw CheckpointError("truncated container file");
  }
  std::uint32_t read_u32() {
    std::uint32_t v;
    read_bytes(&v, sizeof(v));
    return v;
  }
  std::uint64_t read_u64() {
    std::uint64_t v;
    read_bytes(&v, sizeof(v));
    return v;
  }
  std::string read_string(std::uint32_t max_len = 1u << 20) {
    std::uint32_t len = read_u32();
    if (len > max_len) throw CheckpointError("corrupt container: oversized string");
    std::string s(len, '\0');
    read_bytes(s.data(), len);
    return s;
  }
};

}  // namespace

void Container::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    write_string(os, k);
    write_string(os, v);
  }
  write_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_string(os, name);
    write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_u64(os, static_cast<std::uint64_t>(d));
    write_u64(os, static_cast<std::uint64_t>(t.values.size()));
    os.write(reinterpret_cast<const char*>(t.values.data()),
             static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed on " + path.string());
}

Container Container::load(const std::filesystem::path& path) {
  Reader r;
  r.is.open(path, std::ios::binary);
  if (!r.is) throw CheckpointError("cannot open " + path.string());

  char magic[8];
  r.read_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("bad magic in " + path.string());
  std::uint32_t version = r.read_u32();
  if (version != kVersion)
    throw CheckpointError("unsupported container version " + std::to_string(version));

  Container c;
  std::uint32_t meta_count = r.read_u32();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = r.read_string();
    c.metadata[k] = r.read_string();
  }
  std::uint32_t tensor_count = r.read_u32();
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    std::string name = r.read_string();
    std::uint32_t ndim = r.read_u32();
    if (ndim > 8) throw CheckpointError("corrupt container: rank too large");
    Tensor t;
    std::size_t expect = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.shape.push_back(static_cast<std::size_t>(r.read_u64()));
      expect *= t.shape.back();
    }
    std::uint64_t count = r.read_u64();
    if (ndim > 0 && count != expect)
      throw CheckpointError("corrupt container: shape/value count mismatch in " + name);
    if (count > (1ull << 32)) throw CheckpointError("corrupt container: tensor too large");
    t.values.resize(static_cast<std::size_t>(count));
    r.read_bytes(t.values.data(), static_cast<std::size_t>(count) * sizeof(double));
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  // The file must end exactly here.
  char extra;
  r.is.read(&extra, 1);
  if (r.is.gcount() != 0) throw CheckpointError("trailing bytes in " + path.string());
  return c;
}

const Tensor& Container::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw CheckpointError("container missing tensor: " + name);
}

std::string Container::meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw CheckpointError("container missing metadata key: " + key);
  return it->second;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace dymacl
