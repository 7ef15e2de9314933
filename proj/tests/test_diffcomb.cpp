#include "difffake/diffcomb.hpp"
#include "difffake/error.hpp"
#include "difffake/rng.hpp"

#include <doctest.h>

using namespace difffake;

namespace {

std::vector<float> random_vector(Rng& rng, std::size_t n) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(rng.normal() * 3.0);
    return v;
}

std::vector<double> negate(std::vector<double> v) {
    for (double& x : v) x = -x;
    return v;
}

} // namespace

TEST_SUITE("diffcomb") {

TEST_CASE("worked example") {
    const std::vector<double> a = {1, 2};
    const std::vector<double> b = {0, 4};
    CHECK(combine_values(a, b, CombinationMode::Abs) == std::vector<double>{1, 2});
    CHECK(combine_values(a, b, CombinationMode::Sub) == std::vector<double>{1, -2});
    CHECK(combine_values(a, b, CombinationMode::Sub2) == std::vector<double>{1, 4});
    CHECK(combine_values(a, b, CombinationMode::Sub3) == std::vector<double>{1, -8});
}

TEST_CASE("equal inputs give the zero vector") {
    Rng rng(1);
    const auto a = random_vector(rng, 64);
    for (CombinationMode m : kAllModes) {
        for (double v : combine_values(a, a, m)) CHECK(v == 0.0);
    }
}

TEST_CASE("symmetry, antisymmetry and compositional consistency") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_vector(rng, 33);
        const auto b = random_vector(rng, 33);
        const auto sub = combine_values(a, b, CombinationMode::Sub);
        const auto sub2 = combine_values(a, b, CombinationMode::Sub2);
        const auto sub3 = combine_values(a, b, CombinationMode::Sub3);
        const auto abs = combine_values(a, b, CombinationMode::Abs);
        CHECK(sub == negate(combine_values(b, a, CombinationMode::Sub)));
        CHECK(sub3 == negate(combine_values(b, a, CombinationMode::Sub3)));
        CHECK(sub2 == combine_values(b, a, CombinationMode::Sub2));
        CHECK(abs == combine_values(b, a, CombinationMode::Abs));
        for (std::size_t i = 0; i < sub.size(); ++i) {
            CHECK(abs[i] >= 0.0);
            CHECK(sub2[i] == sub[i] * sub[i]);
            CHECK(sub3[i] == sub2[i] * sub[i]);
        }
    }
}

TEST_CASE("length mismatch and provenance") {
    const std::vector<float> a(4, 1.0f);
    const std::vector<float> b(5, 1.0f);
    CHECK_THROWS_AS(combine_values(a, b, CombinationMode::Sub2), DimensionError);
    const auto f = combine(a, std::vector<float>{0, 0, 0, 2}, CombinationMode::Sub, {"v", 3, 9, Label::Real});
    CHECK(f.values.size() == 4);
    CHECK(f.values[3] == -1.0);
    CHECK(f.mode == CombinationMode::Sub);
    CHECK(f.provenance.video_id == "v");
    CHECK(f.provenance.frame_j == 9);
}

TEST_CASE("mode names") {
    for (CombinationMode m : kAllModes) {
        CHECK(parse_mode(to_string(m)) == m);
        CHECK(parse_mode(display_name(m)) == m);
    }
    CHECK(display_name(CombinationMode::Sub2) == "SUB2");
    CHECK(parse_mode("Sub3") == CombinationMode::Sub3);
    CHECK_THROWS_AS(parse_mode("mul"), std::invalid_argument);
}

}
