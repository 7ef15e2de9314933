#include "difffake/error.hpp"
#include "difffake/features.hpp"
#include "difffake/image_io.hpp"
#include "support/procedural_faces.hpp"

#include <doctest.h>

#include <cmath>

using namespace difffake;

namespace {

FaceImage noise_image(std::uint64_t seed) {
    Rng rng(seed);
    FaceImage img(kFaceSize, kFaceSize);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("normalization constants") {
    CHECK(normalize_channel(0) == -1.0);
    CHECK(normalize_channel(255) == 1.0);
    CHECK(normalize_channel(51, 0.0, 1.0) == doctest::Approx(0.2));
}

TEST_CASE("constant image has zero spread and zero edge energy") {
    const FaceImage img(kFaceSize, kFaceSize, 137);
    const Embedding e = toy_extract(img);
    REQUIRE(e.size() == kToyDim);
    for (int cell = 0; cell < 64; ++cell) {
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(e[(cell * 3 + ch) * 2 + 0] == doctest::Approx(normalize_channel(137)));
            CHECK(e[(cell * 3 + ch) * 2 + 1] == 0.0f);
        }
        CHECK(e[384 + cell] == 0.0f);
    }
}

TEST_CASE("one cell recomputed by hand") {
    const FaceImage img = noise_image(3);
    const Embedding e = toy_extract(img);
    CHECK(e == toy_extract(img));
    const int r = 5, c = 2, ch = 1;
    double sum = 0.0, sq = 0.0;
    for (int y = r * 28; y < r * 28 + 28; ++y) {
        for (int x = c * 28; x < c * 28 + 28; ++x) {
            const double v = (img.at(x, y, ch) / 255.0 - 0.5) / 0.5;
            sum += v;
            sq += v * v;
        }
    }
    const double mean = sum / 784.0;
    const double sd = std::sqrt(sq / 784.0 - mean * mean);
    const int cell = r * 8 + c;
    CHECK(e[(cell * 3 + ch) * 2] == doctest::Approx(mean).epsilon(1e-6));
    CHECK(e[(cell * 3 + ch) * 2 + 1] == doctest::Approx(sd).epsilon(1e-5));

    auto gray = [&](int x, int y) {
        x = std::clamp(x, 0, kFaceSize - 1);
        y = std::clamp(y, 0, kFaceSize - 1);
        return 0.299 * normalize_channel(img.at(x, y, 0)) + 0.587 * normalize_channel(img.at(x, y, 1)) +
               0.114 * normalize_channel(img.at(x, y, 2));
    };
    // Corner cell exercises the replicated border.
    double lap = 0.0;
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 28; ++x)
            lap += std::abs(gray(x - 1, y) + gray(x + 1, y) + gray(x, y - 1) + gray(x, y + 1) - 4 * gray(x, y));
    CHECK(e[384] == doctest::Approx(lap / 784.0).epsilon(1e-6));
}

TEST_CASE("extractor input validation") {
    CHECK_THROWS_AS(toy_extract(FaceImage(100, 224)), DimensionError);
    std::vector<double> normalized(12, 0.25);
    CHECK_THROWS_AS(face_from_channel_values(normalized, 2, 2), DataError);
    std::vector<double> negative(12, -1.0);
    CHECK_THROWS_AS(face_from_channel_values(negative, 2, 2), DataError);
    std::vector<double> ok = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 255};
    const auto img = face_from_channel_values(ok, 2, 2);
    CHECK(img.at(1, 1, 2) == 255);
    CHECK_THROWS_AS(face_from_channel_values(ok, 3, 2), DimensionError);

    ExtractorSpec toy;
    toy.dim = 100;
    CHECK_THROWS_AS(toy.validate(), std::invalid_argument);
    CHECK(parse_extractor_kind("external") == ExtractorKind::External);
    CHECK_THROWS_AS(parse_extractor_kind("resnet"), std::invalid_argument);
}

TEST_CASE("extract_all over procedural videos") {
    const auto dir = testing::scratch_dir("features_extract");
    std::vector<VideoRecord> records;
    records.push_back(testing::write_video(testing::make_face_video(2, 40), dir, "vid_b", "s2", Label::Real, Split::Train));
    records.push_back(testing::write_video(testing::make_face_video(1, 40), dir, "vid_a", "s1", Label::Real, Split::Train));

    const EmbeddingStore store = extract_all(records, ExtractorSpec{});
    CHECK(store.size() == 80);
    CHECK(store.dim() == 448);
    const EmbeddingStore again = extract_all(records, ExtractorSpec{});
    CHECK(store == again);

    // Function of pixels only: reordering records and renaming files change nothing.
    std::vector<VideoRecord> reversed(records.rbegin(), records.rend());
    CHECK(extract_all(reversed, ExtractorSpec{}) == store);
    const auto frame0 = read_image(records[1].frame_paths[0]);
    CHECK(store.at("vid_a", 0) == toy_extract(frame0));

    SUBCASE("missing frame file") {
        auto broken = records;
        broken[0].frame_paths[3] = dir / "nope.png";
        CHECK_THROWS_AS(extract_all(broken, ExtractorSpec{}), Error);
    }

    SUBCASE("raw frames with face boxes are preprocessed") {
        VideoRecord rec = records[1];
        rec.boxes.assign(rec.frame_paths.size(), BoundingBox{0, 0, 224, 224});
        const auto face = load_face_frame(rec, 0, load_landmarks(rec.landmark_path, rec.frame_paths.size()));
        CHECK(face.image.width() == 224);
        VideoRecord wrong = records[1];
        const FaceImage small(100, 80, 5);
        write_image(small, dir / "small.png");
        wrong.frame_paths[0] = dir / "small.png";
        CHECK_THROWS_AS(load_face_frame(wrong, 0, load_landmarks(wrong.landmark_path, wrong.frame_paths.size())),
                        DimensionError);
    }

    SUBCASE("external embedding file") {
        EmbeddingStore ext(kBackboneDim);
        Rng rng(8);
        for (const auto& r : records) {
            for (std::uint32_t f = 0; f < r.frame_paths.size(); ++f) {
                std::vector<float> v(kBackboneDim);
                for (float& x : v) x = static_cast<float>(rng.normal());
                ext.insert(r.video_id, f, std::move(v));
            }
        }
        write_embeddings(ext, dir / "ext.dfem");
        ExtractorSpec spec;
        spec.kind = ExtractorKind::External;
        spec.dim = kBackboneDim;
        spec.external_file = dir / "ext.dfem";
        const auto loaded = extract_all(records, spec);
        CHECK(loaded.dim() == 1792);
        CHECK(loaded == ext);

        spec.dim = 448;
        CHECK_THROWS_AS(extract_all(records, spec), DimensionError);

        EmbeddingStore partial(kBackboneDim);
        partial.insert("vid_a", 0, std::vector<float>(kBackboneDim, 0.0f));
        write_embeddings(partial, dir / "partial.dfem");
        spec.dim = kBackboneDim;
        spec.external_file = dir / "partial.dfem";
        CHECK_THROWS_AS(extract_all(records, spec), DataError);
    }
}

}
