#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace vgpu::simt {

enum class ElementType : std::uint8_t { I32, U32, I64, U64, F32, F64 };

template <class T>
constexpr ElementType element_type_of() {
  if constexpr (std::is_same_v<T, std::int32_t>) return ElementType::I32;
  else if constexpr (std::is_same_v<T, std::uint32_t>) return ElementType::U32;
  else if constexpr (std::is_same_v<T, std::int64_t>) return ElementType::I64;
  else if constexpr (std::is_same_v<T, std::uint64_t>) return ElementType::U64;
  else if constexpr (std::is_same_v<T, float>) return ElementType::F32;
  else if constexpr (std::is_same_v<T, double>) return ElementType::F64;
  else static_assert(sizeof(T) == 0, "unsupported device element type");
}

template <class T>
concept DeviceElement = requires { element_type_of<T>(); };

struct BufferId {
  std::uint32_t value = 0;
  auto operator<=>(const BufferId&) const = default;
};

/// Typed handle to a global buffer.
template <DeviceElement T>
struct Buffer {
  BufferId id;
  std::size_t size = 0;
};

/// Typed view into the block's shared-memory region.
template <DeviceElement T>
struct Shared {
  std::size_t offset_bytes = 0;
  std::size_t count = 0;
};

enum class Space : std::uint8_t { Global, Shared };

struct AccessRecord {
  std::uint64_t block_linear = 0;
  std::uint32_t warp_id = 0;
  std::uint64_t step = 0;  // warp instruction index within the warp
  std::uint32_t lane = 0;
  std::uint64_t global_linear_id = 0;
  Space space = Space::Global;
  std::uint32_t buffer = 0;  // meaningful for Space::Global
  std::uint64_t address = 0;
  std::uint32_t width = 0;
  bool is_write = false;
};

struct BufferInfo {
  ElementType type;
  std::uint32_t element_width;
  std::size_t length;
  std::uint64_t base_address;
};

class DeviceMemory {
 public:
  static constexpr std::uint64_t kBaseAlignment = 256;

  template <DeviceElement T>
  Buffer<T> allocate(std::size_t n) {
    const BufferId id = allocate_raw(element_type_of<T>(), sizeof(T), n);
    return Buffer<T>{id, n};
  }

  template <DeviceElement T>
  Buffer<T> upload(std::span<const T> host) {
    Buffer<T> b = allocate<T>(host.size());
    copy_in(b, host);
    return b;
  }

  template <DeviceElement T>
  Buffer<T> upload(const std::vector<T>& host) {
    return upload(std::span<const T>(host));
  }

  template <DeviceElement T>
  void copy_in(Buffer<T> b, std::span<const T> host) {
    auto dst = checked_bytes(b.id, element_type_of<T>());
    if (host.size_bytes() != dst.size()) {
      throw std::invalid_argument("copy_in: size mismatch");
    }
    if (!host.empty()) std::memcpy(dst.data(), host.data(), dst.size());
  }

  template <DeviceElement T>
  std::vector<T> download(Buffer<T> b) const {
    auto src = checked_bytes(b.id, element_type_of<T>());
    std::vector<T> out(src.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), src.data(), src.size());
    return out;
  }

  bool contains(BufferId id) const noexcept { return id.value < buffers_.size(); }
  std::size_t buffer_count() const noexcept { return buffers_.size(); }
  const BufferInfo& info(BufferId id) const;

  std::span<std::byte> bytes(BufferId id);
  std::span<const std::byte> bytes(BufferId id) const;

  const std::vector<AccessRecord>& access_log() const noexcept { return log_; }
  void clear_access_log() noexcept { log_.clear(); }
  void append_access(const AccessRecord& r) { log_.push_back(r); }

  // Compares buffer layout and contents; the access log is ignored.
  bool same_contents(const DeviceMemory& other) const;

 private:
  struct Storage {
    BufferInfo info;
    std::vector<std::byte> data;
  };

  BufferId allocate_raw(ElementType type, std::uint32_t width, std::size_t n);
  std::span<std::byte> checked_bytes(BufferId id, ElementType type);
  std::span<const std::byte> checked_bytes(BufferId id, ElementType type) const;

  std::vector<Storage> buffers_;
  std::uint64_t next_base_ = 0x1000;
  std::vector<AccessRecord> log_;
};

}  // namespace vgpu::simt
