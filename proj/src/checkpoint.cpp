#include "dtg/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "dtg/error.hpp"

namespace dtg {

namespace {
constexpr char kMagic[4] = {'D', 'T', 'G', 'C'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail("corrupt-file", "truncated checkpoint");
  return v;
}

void write_str(std::ostream& os, const std::string& s) {
  write_pod(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
  uint32_t len = read_pod<uint32_t>(is);
  if (len > (1u << 20)) fail("corrupt-file", "implausible string length");
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) fail("corrupt-file", "truncated string");
  return s;
}
}  // namespace

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  for (auto& kv : meta)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  meta.push_back({key, value});
}

const std::string* Checkpoint::find_meta(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return &kv.second;
  return nullptr;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("io", "cannot open for write: " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);

  auto sorted = meta;
  std::sort(sorted.begin(), sorted.end());
  write_pod(os, static_cast<uint32_t>(sorted.size()));
  for (const auto& [k, v] : sorted) {
    write_str(os, k);
    write_str(os, v);
  }

  write_pod(os, static_cast<uint32_t>(params.items().size()));
  for (const auto& item : params.items()) {
    write_str(os, item.name);
    write_pod(os, static_cast<uint8_t>(0));  // dtype 0 = float64
    write_pod(os, static_cast<uint32_t>(item.value.shape.size()));
    for (std::size_t d : item.value.shape) write_pod(os, static_cast<uint64_t>(d));
    os.write(reinterpret_cast<const char*>(item.value.data.data()),
             static_cast<std::streamsize>(item.value.data.size() * sizeof(double)));
  }
  if (!os) fail("io", "write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    fail("bad-magic", "not a checkpoint file: " + path);
  uint32_t version = read_pod<uint32_t>(is);
  if (version != kVersion)
    fail("version-mismatch", "checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  uint32_t n_meta = read_pod<uint32_t>(is);
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_str(is);
    std::string v = read_str(is);
    ckpt.meta.push_back({std::move(k), std::move(v)});
  }

  uint32_t n_tensors = read_pod<uint32_t>(is);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = read_str(is);
    uint8_t dtype = read_pod<uint8_t>(is);
    if (dtype != 0) fail("corrupt-file", "unsupported dtype in " + name);
    uint32_t ndim = read_pod<uint32_t>(is);
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<std::size_t>(read_pod<uint64_t>(is));
      count *= shape[d];
    }
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) fail("corrupt-file", "truncated tensor data: " + name);
    ckpt.params.add(name, std::move(t));
  }
  return ckpt;
}

}  // namespace dtg
