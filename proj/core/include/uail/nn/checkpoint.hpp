#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "uail/nn/tensor.hpp"

namespace uail::nn {

/// Ordered name -> tensor pairs; order is preserved on disk so identical
/// contents produce identical bytes.
using TensorMap = std::vector<std::pair<std::string, Tensor>>;

// Container layout:
//   bytes 0..4   magic "UAIL1"
//   u64 LE       manifest byte length
//   manifest     one text line per tensor: "<name> <d0[,d1,...]> <byte offset>\n"
//                (offset is relative to the start of the data section)
//   data         flat little-endian IEEE-754 doubles, tensors back to back
//
// Round-trips are bit-exact.

void save_container(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap load_container(const std::filesystem::path& path);

bool container_has(const TensorMap& m, const std::string& name);
const Tensor& container_get(const TensorMap& m, const std::string& name);

}  // namespace uail::nn
