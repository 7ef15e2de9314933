#pragma once

#include "difffake/manifest_io.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace difffake {

/// Elementwise fusion of two embeddings A, B of the same subject:
/// ABS = |A - B|, SUB = A - B, SUB2 = (A - B)^2, SUB3 = (A - B)^3.
enum class CombinationMode { Abs, Sub, Sub2, Sub3 };

inline constexpr CombinationMode kAllModes[] = {CombinationMode::Abs, CombinationMode::Sub,
                                                CombinationMode::Sub2, CombinationMode::Sub3};

/// "abs", "sub", "sub2", "sub3" (case-insensitive).
CombinationMode parse_mode(std::string_view text);
/// Lower-case flag spelling.
std::string_view to_string(CombinationMode mode);
/// Table spelling: ABS, SUB, SUB2, SUB3.
std::string_view display_name(CombinationMode mode);

/// Where a combined feature came from. `source_label` lets training code
/// prove that only real pairs reach the anomaly model.
struct PairProvenance {
    std::string video_id;
    std::uint32_t frame_i = 0;
    std::uint32_t frame_j = 0;
    Label source_label = Label::Real;
};

struct CombinedFeature {
    std::vector<double> values;
    CombinationMode mode = CombinationMode::Sub2;
    PairProvenance provenance;
};

/// Throws DimensionError on length mismatch. Differences are taken in double
/// precision, so the symmetric and antisymmetric identities hold exactly.
std::vector<double> combine_values(std::span<const double> a, std::span<const double> b, CombinationMode mode);
std::vector<double> combine_values(std::span<const float> a, std::span<const float> b, CombinationMode mode);

CombinedFeature combine(std::span<const float> a, std::span<const float> b, CombinationMode mode,
                        PairProvenance provenance = {});

} // namespace difffake
