#include "vgpu/simt/memory.hpp"

#include <algorithm>

namespace vgpu::simt {

BufferId DeviceMemory::allocate_raw(ElementType type, std::uint32_t width, std::size_t n) {
  Storage s;
  s.info = BufferInfo{type, width, n, next_base_};
  s.data.assign(n * width, std::byte{0});
  const std::uint64_t span = std::max<std::uint64_t>(n * width, 1);
  next_base_ += (span + kBaseAlignment - 1) / kBaseAlignment * kBaseAlignment;
  buffers_.push_back(std::move(s));
  return BufferId{static_cast<std::uint32_t>(buffers_.size() - 1)};
}

const BufferInfo& DeviceMemory::info(BufferId id) const {
  if (!contains(id)) throw std::out_of_range("unknown buffer handle");
  return buffers_[id.value].info;
}

std::span<std::byte> DeviceMemory::bytes(BufferId id) {
  if (!contains(id)) throw std::out_of_range("unknown buffer handle");
  return buffers_[id.value].data;
}

std::span<const std::byte> DeviceMemory::bytes(BufferId id) const {
  if (!contains(id)) throw std::out_of_range("unknown buffer handle");
  return buffers_[id.value].data;
}

std::span<std::byte> DeviceMemory::checked_bytes(BufferId id, ElementType type) {
  if (info(id).type != type) throw std::invalid_argument("buffer element type mismatch");
  return buffers_[id.value].data;
}

std::span<const std::byte> DeviceMemory::checked_bytes(BufferId id, ElementType type) const {
  if (info(id).type != type) throw std::invalid_argument("buffer element type mismatch");
  return buffers_[id.value].data;
}

bool DeviceMemory::same_contents(const DeviceMemory& other) const {
  if (buffers_.size() != other.buffers_.size()) return false;
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    const auto& a = buffers_[i];
    const auto& b = other.buffers_[i];
    if (a.info.type != b.info.type || a.info.length != b.info.length || a.data != b.data) {
      return false;
    }
  }
  return true;
}

}  // namespace vgpu::simt
