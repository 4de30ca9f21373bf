// Copyright 2026 The Momir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

namespace momir::detail {

// Little-endian byte buffer writer/reader. File formats are pinned to LE
// regardless of host endianness.

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v & 0xff));
        buf_.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i)
            buf_.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
    }

    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }

    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return data_[need(1)]; }

    std::uint16_t u16() {
        std::size_t o = need(2);
        return static_cast<std::uint16_t>(data_[o] | (data_[o + 1] << 8));
    }

    std::uint32_t u32() {
        std::size_t o = need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[o + i]) << (8 * i);
        return v;
    }

    double f64() {
        std::size_t o = need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(data_[o + i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str(std::size_t n) {
        std::size_t o = need(n);
        return std::string(reinterpret_cast<const char*>(data_ + o), n);
    }

    std::size_t remaining() const { return size_ - pos_; }

private:
    std::size_t need(std::size_t n) {
        if (pos_ + n > size_) throw std::runtime_error("truncated input");
        std::size_t o = pos_;
        pos_ += n;
        return o;
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const void* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace momir::detail
