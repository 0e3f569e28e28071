#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "nmpsim/errors.hpp"

namespace nmpsim {

inline constexpr std::uint64_t kBlockBytes = 64;

// Flat byte image of the pooled memory, addressed by pool-physical byte
// addresses. The rank interleave is a pure relabeling of 64-byte blocks,
// so functional semantics operate on this flat view.
class MemoryPoolImage {
public:
    explicit MemoryPoolImage(std::uint64_t capacity_bytes)
        : bytes_(capacity_bytes, 0) {}

    std::uint64_t capacity() const { return bytes_.size(); }

    const std::uint8_t* data() const { return bytes_.data(); }
    std::uint8_t* data() { return bytes_.data(); }

    void check_range(std::uint64_t addr, std::uint64_t len) const {
        if (len > bytes_.size() || addr > bytes_.size() - len) {
            throw AddressFaultError("pool access [" + std::to_string(addr) +
                                    ", +" + std::to_string(len) +
                                    ") exceeds capacity " +
                                    std::to_string(bytes_.size()));
        }
    }

    std::span<const std::uint8_t> view(std::uint64_t addr, std::uint64_t len) const {
        check_range(addr, len);
        return {bytes_.data() + addr, len};
    }

    std::span<std::uint8_t> view(std::uint64_t addr, std::uint64_t len) {
        check_range(addr, len);
        return {bytes_.data() + addr, len};
    }

    void write(std::uint64_t addr, std::span<const std::uint8_t> src) {
        check_range(addr, src.size());
        std::memcpy(bytes_.data() + addr, src.data(), src.size());
    }

    void read(std::uint64_t addr, std::span<std::uint8_t> dst) const {
        check_range(addr, dst.size());
        std::memcpy(dst.data(), bytes_.data() + addr, dst.size());
    }

    std::uint32_t read_u32(std::uint64_t addr) const {
        check_range(addr, 4);
        std::uint32_t v;
        std::memcpy(&v, bytes_.data() + addr, 4);
        return v;
    }

    void write_u32(std::uint64_t addr, std::uint32_t v) {
        check_range(addr, 4);
        std::memcpy(bytes_.data() + addr, &v, 4);
    }

    float read_f32(std::uint64_t addr) const {
        check_range(addr, 4);
        float v;
        std::memcpy(&v, bytes_.data() + addr, 4);
        return v;
    }

    void write_f32(std::uint64_t addr, float v) {
        check_range(addr, 4);
        std::memcpy(bytes_.data() + addr, &v, 4);
    }

private:
    std::vector<std::uint8_t> bytes_;
};

}  // namespace nmpsim
