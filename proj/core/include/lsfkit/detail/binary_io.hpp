#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lsfkit::detail {

// Little-endian append-only writer.
class ByteWriter {
public:
    void u8(uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
    void u16(uint16_t v) { put(v, 2); }
    void u32(uint32_t v) { put(v, 4); }
    void u64(uint64_t v) { put(v, 8); }
    void f64(double v);
    void raw(std::span<const std::byte> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
    void words(std::span<const uint64_t> ws) {
        for (uint64_t w : ws)
            u64(w);
    }
    void str(std::string_view s);

    [[nodiscard]] size_t size() const noexcept { return bytes_.size(); }
    [[nodiscard]] const std::vector<std::byte> &bytes() const & noexcept { return bytes_; }
    [[nodiscard]] std::vector<std::byte> take() && noexcept { return std::move(bytes_); }

private:
    void put(uint64_t v, int n) {
        for (int i = 0; i < n; ++i)
            bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
    std::vector<std::byte> bytes_;
};

// Bounds-checked reader; throws Error(TruncatedInput) on overrun.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

    uint8_t u8() { return static_cast<uint8_t>(get(1)); }
    uint16_t u16() { return static_cast<uint16_t>(get(2)); }
    uint32_t u32() { return static_cast<uint32_t>(get(4)); }
    uint64_t u64() { return get(8); }
    double f64();
    std::span<const std::byte> raw(size_t n);
    std::vector<uint64_t> words(size_t n);
    std::string str();

    [[nodiscard]] size_t position() const noexcept { return pos_; }
    [[nodiscard]] size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(size_t n) const;
    uint64_t get(int n);

    std::span<const std::byte> data_;
    size_t pos_ = 0;
};

uint32_t crc32(std::span<const std::byte> data) noexcept;

} // namespace lsfkit::detail
