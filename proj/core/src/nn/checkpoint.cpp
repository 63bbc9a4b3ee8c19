#include "uail/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "uail/common.hpp"

namespace uail::nn {

namespace {

constexpr char kMagic[5] = {'U', 'A', 'I', 'L', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void append_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint64_t read_u64(const std::string& s, std::size_t off) {
  std::uint64_t v;
  std::memcpy(&v, s.data() + off, 8);
  return v;
}

}  // namespace

void save_container(const std::filesystem::path& path, const TensorMap& tensors) {
  std::string manifest;
  std::string blob;
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    if (name.find(' ') != std::string::npos || name.find('\n') != std::string::npos)
      throw ArtifactError("tensor name contains whitespace: " + name);
    manifest += name;
    manifest += ' ';
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
      if (i) manifest += ',';
      manifest += std::to_string(t.shape[i]);
    }
    manifest += ' ';
    manifest += std::to_string(offset);
    manifest += '\n';
    const std::size_t bytes = t.data.size() * sizeof(double);
    blob.append(reinterpret_cast<const char*>(t.data.data()), bytes);
    offset += bytes;
  }
  std::string out;
  out.reserve(5 + 8 + manifest.size() + blob.size());
  out.append(kMagic, 5);
  append_u64(out, manifest.size());
  out += manifest;
  out += blob;
  atomic_write_file(path, out);
}

TensorMap load_container(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 13 || std::memcmp(raw.data(), kMagic, 5) != 0)
    throw ArtifactError("not a UAIL1 checkpoint: " + path.string());
  const std::uint64_t manifest_len = read_u64(raw, 5);
  if (13 + manifest_len > raw.size()) throw ArtifactError("truncated manifest: " + path.string());
  const std::string manifest = raw.substr(13, manifest_len);
  const std::size_t data_start = 13 + manifest_len;
  const std::size_t data_len = raw.size() - data_start;

  TensorMap result;
  std::istringstream lines(manifest);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, shape_str, offset_str;
    if (!(ls >> name >> shape_str >> offset_str)) throw ArtifactError("bad manifest line: " + line);
    std::vector<std::size_t> shape;
    std::istringstream ss(shape_str);
    std::string dim;
    while (std::getline(ss, dim, ',')) shape.push_back(static_cast<std::size_t>(std::stoull(dim)));
    const std::size_t n = shape_numel(shape);
    const std::size_t off = static_cast<std::size_t>(std::stoull(offset_str));
    if (off + n * sizeof(double) > data_len)
      throw ArtifactError("tensor '" + name + "' extends past end of file: " + path.string());
    std::vector<double> data(n);
    std::memcpy(data.data(), raw.data() + data_start + off, n * sizeof(double));
    result.emplace_back(name, Tensor(std::move(shape), std::move(data)));
  }
  return result;
}

bool container_has(const TensorMap& m, const std::string& name) {
  for (const auto& [k, _] : m)
    if (k == name) return true;
  return false;
}

const Tensor& container_get(const TensorMap& m, const std::string& name) {
  for (const auto& [k, v] : m)
    if (k == name) return v;
  throw ArtifactError("checkpoint is missing tensor '" + name + "'");
}

}  // namespace uail::nn
