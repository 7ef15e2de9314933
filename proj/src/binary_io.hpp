#pragma once

// Little-endian primitive encoding shared by the embedding and model files.

#include "difffake/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

namespace difffake::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    static_assert(sizeof(T) == sizeof(U));
    const U bits = std::bit_cast<U>(value);
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    }
    out.write(bytes, sizeof(U));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    static_assert(sizeof(T) == sizeof(U));
    unsigned char bytes[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(bytes[i]) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

inline void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* kind) {
    char got[4];
    if (!in.read(got, 4)) {
        throw FormatError(std::string("truncated ") + kind + " header");
    }
    if (std::memcmp(got, magic, 4) != 0) {
        throw FormatError(std::string("not a ") + kind + " file (magic mismatch)");
    }
}

inline void expect_eof(std::istream& in, const char* kind) {
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(std::string("trailing bytes after ") + kind + " payload");
    }
}

} // namespace difffake::detail
