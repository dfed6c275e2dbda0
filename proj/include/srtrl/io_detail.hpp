#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include "srtrl/errors.hpp"
#include "srtrl/types.hpp"

namespace srtrl::detail {

inline void write_f64_le(std::ostream& os, const Vec& v) {
    std::array<char, 8> bytes{};
    for (Index i = 0; i < v.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffU);
        os.write(bytes.data(), 8);
    }
}

inline Vec read_f64_le(std::istream& is, Index count) {
    Vec v(count);
    std::array<unsigned char, 8> bytes{};
    for (Index i = 0; i < count; ++i) {
        if (!is.read(reinterpret_cast<char*>(bytes.data()), 8))
            throw ContractViolation("checkpoint: truncated parameter block");
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
        v[i] = std::bit_cast<double>(bits);
    }
    return v;
}

}  // namespace srtrl::detail
