#include "difffake/diffcomb.hpp"

#include "difffake/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace difffake {

namespace {

template <typename T>
std::vector<double> combine_impl(std::span<const T> a, std::span<const T> b, CombinationMode mode) {
    if (a.size() != b.size()) {
        throw DimensionError("cannot combine embeddings of length " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        switch (mode) {
        case CombinationMode::Abs:
            out[i] = std::abs(d);
            break;
        case CombinationMode::Sub:
            out[i] = d;
            break;
        case CombinationMode::Sub2:
            out[i] = d * d;
            break;
        case CombinationMode::Sub3:
            out[i] = d * d * d;
            break;
        }
    }
    return out;
}

} // namespace

CombinationMode parse_mode(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "abs") return CombinationMode::Abs;
    if (lower == "sub") return CombinationMode::Sub;
    if (lower == "sub2") return CombinationMode::Sub2;
    if (lower == "sub3") return CombinationMode::Sub3;
    throw std::invalid_argument("combination mode must be abs, sub, sub2 or sub3");
}

std::string_view to_string(CombinationMode mode) {
    switch (mode) {
    case CombinationMode::Abs:
        return "abs";
    case CombinationMode::Sub:
        return "sub";
    case CombinationMode::Sub2:
        return "sub2";
    case CombinationMode::Sub3:
        return "sub3";
    }
    return "sub2";
}

std::string_view display_name(CombinationMode mode) {
    switch (mode) {
    case CombinationMode::Abs:
        return "ABS";
    case CombinationMode::Sub:
        return "SUB";
    case CombinationMode::Sub2:
        return "SUB2";
    case CombinationMode::Sub3:
        return "SUB3";
    }
    return "SUB2";
}

std::vector<double> combine_values(std::span<const double> a, std::span<const double> b, CombinationMode mode) {
    return combine_impl(a, b, mode);
}

std::vector<double> combine_values(std::span<const float> a, std::span<const float> b, CombinationMode mode) {
    return combine_impl(a, b, mode);
}

CombinedFeature combine(std::span<const float> a, std::span<const float> b, CombinationMode mode,
                        PairProvenance provenance) {
    return {combine_impl(a, b, mode), mode, std::move(provenance)};
}

} // namespace difffake
