#include "difffake/manifest_io.hpp"
#include "difffake/pipeline.hpp"
#include "support/procedural_faces.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

using namespace difffake;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "cli.log";
    const std::string cmd = std::string(DIFFFAKE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::string out{std::istreambuf_iterator<char>(in), {}};
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, extract, fit-adm, score and eval chain") {
    const fs::path dir = testing::scratch_dir("cli");
    std::vector<VideoRecord> recs;
    for (int i = 0; i < 4; ++i) {
        recs.push_back(testing::write_video(testing::make_face_video(200 + i, 12), dir, "train" + std::to_string(i),
                                            "s" + std::to_string(i), Label::Real, Split::Train));
    }
    recs.push_back(testing::write_video(testing::make_face_video(300, 12), dir, "real_test", "t0", Label::Real, Split::Test));
    recs.push_back(testing::write_video(testing::make_fake_video(301, 5, 12), dir, "fake_test", "t1", Label::Fake, Split::Test));
    const fs::path manifest = dir / "manifest.jsonl";
    write_manifest(recs, manifest);
    const std::string m = " --manifest " + manifest.string();

    SUBCASE("synth writes images, sidecars and masks") {
        const auto r = run("synth" + m + " --out " + (dir / "synth").string() + " --seed 3 --count 2 --scheme eye --dump-masks", dir);
        REQUIRE(r.code == 0);
        std::size_t png = 0, json = 0, mask = 0;
        for (const auto& e : fs::directory_iterator(dir / "synth")) {
            const auto name = e.path().filename().string();
            if (name.ends_with("_mask.png")) ++mask;
            else if (name.ends_with(".png")) ++png;
            else if (name.ends_with(".json")) ++json;
            if (name.ends_with(".json")) CHECK(slurp(e.path()).find("\"label\": 1") != std::string::npos);
        }
        // Real records only: four training videos and one real test video.
        CHECK(png == 10);
        CHECK(json == 10);
        CHECK(mask == 10);

        const auto again = run("synth" + m + " --out " + (dir / "synth2").string() + " --seed 3 --count 2 --scheme eye --dump-masks", dir);
        REQUIRE(again.code == 0);
        for (const auto& e : fs::directory_iterator(dir / "synth")) {
            CHECK(slurp(e.path()) == slurp(dir / "synth2" / e.path().filename()));
        }
    }

    SUBCASE("full scoring chain") {
        const auto emb = (dir / "emb.dfem").string();
        auto r = run("extract" + m + " --out " + emb, dir);
        REQUIRE(r.code == 0);
        CHECK(read_embeddings(emb).size() == 72);

        const auto model = (dir / "model.dfgm").string();
        r = run("--seed 9 fit-adm" + m + " --embeddings " + emb + " --out " + model + " --components 2 --combine sub2 --report " +
                    (dir / "report.json").string(), dir);
        REQUIRE(r.code == 0);
        CHECK(load_model(model).n_components() == 2);
        CHECK(fs::exists(dir / "report.json"));

        const auto table = (dir / "scores.tsv").string();
        r = run("score --seed 9" + m + " --embeddings " + emb + " --model " + model + " --out " + table, dir);
        REQUIRE(r.code == 0);
        CHECK(read_score_table(table).size() == 2);

        r = run("eval --oracle-check --config SUB2 --components 2 demo=" + table, dir);
        CHECK(r.code == 0);
        CHECK(r.output.find("demo") != std::string::npos);
        CHECK(r.output.find("[ok]") != std::string::npos);
        CHECK(r.output.find("SUB2 (k=2") != std::string::npos);

        r = run("eval " + table + " --out " + (dir / "report.txt").string(), dir);
        CHECK(r.code == 0);
        CHECK(slurp(dir / "report.txt").find("Avg.") != std::string::npos);
    }

    SUBCASE("errors exit non-zero with a message") {
        auto r = run("fit-adm --manifest " + (dir / "missing.jsonl").string() + " --out " + (dir / "x.dfgm").string(), dir);
        CHECK(r.code == 1);
        CHECK(r.output.find("error:") != std::string::npos);
        r = run("score" + m + " --out " + (dir / "s.tsv").string(), dir);
        CHECK(r.code != 0);
        r = run("", dir);
        CHECK(r.code != 0);
        r = run("fit-adm" + m + " --out " + (dir / "y.dfgm").string() + " --combine mul", dir);
        CHECK(r.code != 0);
    }
}

}
