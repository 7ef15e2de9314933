#include "difffake/manifest_io.hpp"

#include "binary_io.hpp"
#include "difffake/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace difffake {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kEmbeddingMagic[5] = "DFEM";
constexpr std::uint32_t kEmbeddingVersion = 1;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

const json& require(const json& object, const char* key, std::size_t line) {
    auto it = object.find(key);
    if (it == object.end()) {
        throw ParseError(std::string("missing field '") + key + "'", line);
    }
    return *it;
}

std::string require_string(const json& object, const char* key, std::size_t line) {
    const json& value = require(object, key, line);
    if (!value.is_string()) {
        throw ParseError(std::string("field '") + key + "' must be a string", line);
    }
    return value.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& text) {
    fs::path p(text);
    return p.is_relative() ? base / p : p;
}

VideoRecord parse_record(const json& object, const fs::path& base, std::size_t line) {
    if (!object.is_object()) {
        throw ParseError("manifest record must be a JSON object", line);
    }
    VideoRecord record;
    record.video_id = require_string(object, "video_id", line);
    record.subject_id = require_string(object, "subject_id", line);
    if (record.video_id.empty()) {
        throw ParseError("empty video_id", line);
    }
    try {
        record.label = parse_label(require_string(object, "label", line));
        record.split = parse_split(require_string(object, "split", line));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line);
    }
    record.landmark_path = resolve(base, require_string(object, "landmarks", line));

    const json& frames = require(object, "frames", line);
    if (!frames.is_array() || frames.empty()) {
        throw ParseError("field 'frames' must be a non-empty array", line);
    }
    std::set<fs::path> seen;
    for (const json& frame : frames) {
        if (!frame.is_string()) {
            throw ParseError("frame paths must be strings", line);
        }
        fs::path p = resolve(base, frame.get<std::string>());
        if (!seen.insert(p).second) {
            throw ParseError("duplicate frame path " + p.string(), line);
        }
        record.frame_paths.push_back(std::move(p));
    }

    if (auto it = object.find("boxes"); it != object.end()) {
        if (!it->is_array() || it->size() != record.frame_paths.size()) {
            throw ParseError("field 'boxes' must hold one [x, y, w, h] per frame", line);
        }
        for (const json& box : *it) {
            if (!box.is_array() || box.size() != 4 || !std::all_of(box.begin(), box.end(),
                                                                   [](const json& v) { return v.is_number(); })) {
                throw ParseError("each box must be [x, y, w, h]", line);
            }
            record.boxes.push_back({box[0].get<double>(), box[1].get<double>(),
                                    box[2].get<double>(), box[3].get<double>()});
        }
    }
    return record;
}

} // namespace

std::string_view to_string(Label label) { return label == Label::Real ? "real" : "fake"; }

std::string_view to_string(Split split) {
    switch (split) {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "train";
}

Label parse_label(std::string_view text) {
    if (text == "real") return Label::Real;
    if (text == "fake") return Label::Fake;
    throw std::invalid_argument("label must be 'real' or 'fake', got '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "val") return Split::Val;
    if (text == "test") return Split::Test;
    throw std::invalid_argument("split must be train, val or test, got '" + std::string(text) + "'");
}

std::vector<VideoRecord> load_manifest(const fs::path& path, bool check_landmarks) {
    const std::string text = read_text(path);
    const fs::path base = path.parent_path();
    std::vector<VideoRecord> records;
    std::set<std::string> ids;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        json object;
        try {
            object = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        VideoRecord record = parse_record(object, base, line_no);
        if (!ids.insert(record.video_id).second) {
            throw ParseError("duplicate video_id '" + record.video_id + "'", line_no);
        }
        if (check_landmarks) {
            try {
                load_landmarks(record.landmark_path, record.frame_paths.size());
            } catch (const Error& e) {
                throw ParseError("record '" + record.video_id + "': " + e.what(), line_no);
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_manifest(std::span<const VideoRecord> records, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const VideoRecord& r : records) {
        json object;
        object["video_id"] = r.video_id;
        object["subject_id"] = r.subject_id;
        object["label"] = to_string(r.label);
        object["split"] = to_string(r.split);
        json frames = json::array();
        for (const auto& p : r.frame_paths) {
            frames.push_back(p.generic_string());
        }
        object["frames"] = std::move(frames);
        object["landmarks"] = r.landmark_path.generic_string();
        if (!r.boxes.empty()) {
            json boxes = json::array();
            for (const auto& b : r.boxes) {
                boxes.push_back({b.x, b.y, b.width, b.height});
            }
            object["boxes"] = std::move(boxes);
        }
        out << object.dump() << '\n';
    }
}

std::vector<LandmarkSet> parse_landmarks(std::string_view text, std::size_t n_frames) {
    std::vector<LandmarkSet> sets;
    LandmarkSet current;
    std::size_t rows = 0;
    std::size_t line_no = 0;

    auto close_block = [&](std::size_t at_line) {
        if (rows == 0) {
            return;
        }
        if (rows != kNumLandmarks) {
            throw ParseError("frame " + std::to_string(sets.size()) + " has " + std::to_string(rows) +
                                 " landmark points, expected 68",
                             at_line);
        }
        sets.push_back(current);
        rows = 0;
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (blank(line)) {
            close_block(line_no);
            if (end == text.size()) break;
            continue;
        }
        if (rows == kNumLandmarks) {
            throw ParseError("frame " + std::to_string(sets.size()) +
                                 " has more than 68 landmark points",
                             line_no);
        }
        double xy[2];
        const char* p = line.data();
        const char* stop = line.data() + line.size();
        for (double& v : xy) {
            while (p < stop && (*p == ' ' || *p == '\t')) ++p;
            auto [next, ec] = std::from_chars(p, stop, v);
            if (ec != std::errc()) {
                throw ParseError("expected two numbers per landmark row", line_no);
            }
            p = next;
        }
        while (p < stop && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p != stop) {
            throw ParseError("trailing characters in landmark row", line_no);
        }
        if (!std::isfinite(xy[0]) || !std::isfinite(xy[1])) {
            throw ParseError("non-finite landmark coordinate in frame " + std::to_string(sets.size()),
                             line_no);
        }
        current.points[rows++] = {xy[0], xy[1]};
        if (end == text.size()) break;
    }
    close_block(line_no);

    if (sets.size() != n_frames) {
        throw ParseError("landmark file holds " + std::to_string(sets.size()) + " frames, expected " +
                         std::to_string(n_frames));
    }
    return sets;
}

std::vector<LandmarkSet> load_landmarks(const fs::path& path, std::size_t n_frames) {
    try {
        return parse_landmarks(read_text(path), n_frames);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_landmarks(std::span<const LandmarkSet> sets, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    char buffer[64];
    for (std::size_t f = 0; f < sets.size(); ++f) {
        if (f > 0) {
            out << '\n';
        }
        for (const Point& pt : sets[f].points) {
            // Shortest representation that round-trips exactly.
            auto r1 = std::to_chars(buffer, buffer + sizeof buffer, pt.x);
            *r1.ptr++ = ' ';
            auto r2 = std::to_chars(r1.ptr, buffer + sizeof buffer, pt.y);
            *r2.ptr++ = '\n';
            out.write(buffer, r2.ptr - buffer);
        }
    }
}

EmbeddingStore::EmbeddingStore(std::uint32_t dim) : dim_(dim) {
    if (dim == 0) {
        throw std::invalid_argument("embedding dim must be positive");
    }
}

void EmbeddingStore::insert(std::string video_id, std::uint32_t frame_index, std::vector<float> values) {
    if (values.size() != dim_) {
        throw DimensionError("embedding for '" + video_id + "' frame " + std::to_string(frame_index) +
                             " has length " + std::to_string(values.size()) + ", store dim is " +
                             std::to_string(dim_));
    }
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw DataError("non-finite embedding component for '" + video_id + "' frame " +
                            std::to_string(frame_index));
        }
    }
    entries_[EmbeddingKey{std::move(video_id), frame_index}] = std::move(values);
}

const std::vector<float>* EmbeddingStore::find(std::string_view video_id, std::uint32_t frame_index) const {
    auto it = entries_.find(EmbeddingKey{std::string(video_id), frame_index});
    return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<float>& EmbeddingStore::at(std::string_view video_id, std::uint32_t frame_index) const {
    if (const auto* v = find(video_id, frame_index)) {
        return *v;
    }
    throw DataError("missing embedding for video '" + std::string(video_id) + "' frame " +
                    std::to_string(frame_index));
}

void write_embeddings(const EmbeddingStore& store, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    detail::put_magic(out, kEmbeddingMagic);
    detail::put_le<std::uint32_t>(out, kEmbeddingVersion);
    detail::put_le<std::uint32_t>(out, store.dim());
    detail::put_le<std::uint64_t>(out, store.size());
    for (const auto& [key, values] : store.entries()) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(key.video_id.size()));
        out.write(key.video_id.data(), static_cast<std::streamsize>(key.video_id.size()));
        detail::put_le<std::uint32_t>(out, key.frame_index);
        for (float v : values) {
            detail::put_le<float>(out, v);
        }
    }
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

EmbeddingStore read_embeddings(const fs::path& path, std::optional<std::uint32_t> expected_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    detail::expect_magic(in, kEmbeddingMagic, "embedding");
    const auto version = detail::get_le<std::uint32_t>(in, "version");
    if (version != kEmbeddingVersion) {
        throw FormatError("unsupported embedding file version " + std::to_string(version));
    }
    const auto dim = detail::get_le<std::uint32_t>(in, "dim");
    if (dim == 0) {
        throw FormatError("embedding file declares dim 0");
    }
    if (expected_dim && *expected_dim != dim) {
        throw DimensionError("embedding file dim " + std::to_string(dim) + " does not match expected " +
                             std::to_string(*expected_dim));
    }
    const auto count = detail::get_le<std::uint64_t>(in, "count");
    EmbeddingStore store(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto id_len = detail::get_le<std::uint32_t>(in, "video id length");
        std::string id(id_len, '\0');
        if (!in.read(id.data(), id_len)) {
            throw FormatError("truncated file while reading video id");
        }
        const auto frame = detail::get_le<std::uint32_t>(in, "frame index");
        std::vector<float> values(dim);
        for (float& v : values) {
            v = detail::get_le<float>(in, "embedding values");
        }
        if (store.find(id, frame)) {
            throw FormatError("duplicate entry for '" + id + "' frame " + std::to_string(frame));
        }
        store.insert(std::move(id), frame, std::move(values));
    }
    detail::expect_eof(in, "embedding");
    return store;
}

} // namespace difffake
