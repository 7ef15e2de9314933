#include "procedural_faces.hpp"

#include "difffake/image_io.hpp"
#include "difffake/rng.hpp"
#include "difffake/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <unistd.h>

namespace difffake::testing {

namespace {

struct Identity {
    double skin[3];
    double lip[3];
    double background[3];
    double cx, cy, rx, ry;
    double eye_dx, eye_y, eye_w, eye_h;
    double brow_gap;
    double nose_len;
    double mouth_y, mouth_w;
    double phase[6];
    std::vector<double> texture;  // 224 x 224, moves with the face
};

struct Pose {
    double tx, ty, angle;
    double mouth_open, brow_raise, light;
};

Identity draw_identity(std::uint64_t seed) {
    Rng rng(seed);
    Identity id{};
    id.skin[0] = rng.uniform(170, 230);
    id.skin[1] = rng.uniform(120, 175);
    id.skin[2] = rng.uniform(90, 145);
    id.lip[0] = rng.uniform(150, 200);
    id.lip[1] = rng.uniform(50, 90);
    id.lip[2] = rng.uniform(60, 100);
    for (double& c : id.background) c = rng.uniform(40, 200);
    id.cx = 112 + rng.uniform(-4, 4);
    id.cy = 116 + rng.uniform(-4, 4);
    id.rx = rng.uniform(60, 70);
    id.ry = rng.uniform(76, 86);
    id.eye_dx = rng.uniform(23, 29);
    id.eye_y = rng.uniform(-20, -13);
    id.eye_w = rng.uniform(10, 13);
    id.eye_h = rng.uniform(4, 6);
    id.brow_gap = rng.uniform(9, 13);
    id.nose_len = rng.uniform(22, 28);
    id.mouth_y = rng.uniform(36, 42);
    id.mouth_w = rng.uniform(17, 23);
    for (double& p : id.phase) p = rng.uniform(0, 2 * std::numbers::pi);
    id.texture.resize(static_cast<std::size_t>(kFaceSize) * kFaceSize);
    for (double& t : id.texture) t = rng.normal() * 4.0;
    return id;
}

Pose pose_at(const Identity& id, std::size_t frame, std::size_t n_frames) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(frame) / static_cast<double>(std::max<std::size_t>(n_frames, 1));
    Pose p{};
    p.tx = 6.0 * std::sin(t + id.phase[0]);
    p.ty = 4.0 * std::sin(1.7 * t + id.phase[1]);
    p.angle = 0.08 * std::sin(1.3 * t + id.phase[2]);
    p.mouth_open = 1.0 + 5.0 * (0.5 + 0.5 * std::sin(2.3 * t + id.phase[3]));
    p.brow_raise = 2.5 * (0.5 + 0.5 * std::sin(1.1 * t + id.phase[4]));
    p.light = 1.0 + 0.06 * std::sin(0.9 * t + id.phase[5]);
    return p;
}

std::array<Point, kNumLandmarks> local_landmarks(const Identity& id, const Pose& pose) {
    std::array<Point, kNumLandmarks> l{};
    const double pi = std::numbers::pi;
    for (int i = 0; i <= 16; ++i) {
        const double t = pi - i * pi / 16.0;
        l[i] = {id.rx * std::cos(t), id.ry * std::sin(t)};
    }
    const double brow_y = id.eye_y - id.brow_gap - pose.brow_raise;
    for (int i = 0; i < 5; ++i) {
        const double u = i / 4.0;
        const double arch = 3.0 * std::sin(pi * u);
        l[17 + i] = {-id.eye_dx - 12.0 + 22.0 * u, brow_y - arch};
        l[22 + i] = {id.eye_dx - 10.0 + 22.0 * u, brow_y - arch};
    }
    for (int i = 0; i < 4; ++i) {
        l[27 + i] = {0.0, id.eye_y + id.nose_len * i / 3.0};
    }
    const double nose_base = id.eye_y + id.nose_len + 4.0;
    for (int i = 0; i < 5; ++i) {
        l[31 + i] = {-8.0 + 4.0 * i, nose_base + (i == 2 ? 2.0 : 0.0)};
    }
    auto eye = [&](int first, double cx) {
        const double w = id.eye_w, h = id.eye_h, y = id.eye_y;
        l[first + 0] = {cx - w, y};
        l[first + 1] = {cx - w / 2, y - h};
        l[first + 2] = {cx + w / 2, y - h};
        l[first + 3] = {cx + w, y};
        l[first + 4] = {cx + w / 2, y + h};
        l[first + 5] = {cx - w / 2, y + h};
    };
    eye(36, -id.eye_dx);
    eye(42, id.eye_dx);
    const double outer_b = 4.0 + pose.mouth_open / 2.0;
    for (int i = 0; i < 12; ++i) {
        const double t = pi + i * 2.0 * pi / 12.0;
        l[48 + i] = {id.mouth_w * std::cos(t), id.mouth_y + outer_b * std::sin(t)};
    }
    for (int i = 0; i < 8; ++i) {
        const double t = pi + i * 2.0 * pi / 8.0;
        l[60 + i] = {0.7 * id.mouth_w * std::cos(t), id.mouth_y + 0.5 * pose.mouth_open * std::sin(t)};
    }
    return l;
}

double segment_distance(double px, double py, const Point& a, const Point& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

} // namespace

FaceVideo make_face_video(std::uint64_t subject_seed, std::size_t n_frames) {
    const Identity id = draw_identity(subject_seed);
    Rng noise(mix_seed(subject_seed, 99));
    FaceVideo video;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const Pose pose = pose_at(id, f, n_frames);
        const auto local = local_landmarks(id, pose);
        const double ca = std::cos(pose.angle), sa = std::sin(pose.angle);
        const double ox = id.cx + pose.tx, oy = id.cy + pose.ty;

        LandmarkSet lms;
        for (std::size_t i = 0; i < kNumLandmarks; ++i) {
            const Point& p = local[i];
            lms.points[i] = {ox + ca * p.x - sa * p.y, oy + sa * p.x + ca * p.y};
        }

        FaceImage img(kFaceSize, kFaceSize);
        const double outer_b = 4.0 + pose.mouth_open / 2.0;
        for (int y = 0; y < kFaceSize; ++y) {
            for (int x = 0; x < kFaceSize; ++x) {
                // Pixel center in face-local coordinates.
                const double gx = x + 0.5 - ox, gy = y + 0.5 - oy;
                const double lx = ca * gx + sa * gy;
                const double ly = -sa * gx + ca * gy;
                double rgb[3];
                const double grad = 0.85 + 0.3 * y / kFaceSize;
                for (int c = 0; c < 3; ++c) rgb[c] = id.background[c] * grad;

                const double fx = lx / id.rx, fy = (ly + 10.0) / (id.ry + 10.0);
                const double r2 = fx * fx + fy * fy;
                if (r2 <= 1.0) {
                    const int tx = std::clamp(static_cast<int>(lx + 112), 0, kFaceSize - 1);
                    const int ty = std::clamp(static_cast<int>(ly + 112), 0, kFaceSize - 1);
                    const double tex = id.texture[static_cast<std::size_t>(ty) * kFaceSize + tx];
                    const double shade = 1.0 - 0.22 * r2;
                    for (int c = 0; c < 3; ++c) rgb[c] = id.skin[c] * shade + tex;

                    bool brow = false;
                    for (int i = 17; i < 26 && !brow; ++i) {
                        if (i == 21) continue;
                        brow = segment_distance(lx, ly, local[i], local[i + 1]) < 2.2;
                    }
                    if (brow) {
                        rgb[0] = 70, rgb[1] = 45, rgb[2] = 30;
                    }
                    if (segment_distance(lx, ly, local[27], local[30]) < 1.5) {
                        for (double& c : rgb) c *= 0.85;
                    }
                    for (double nx : {-5.0, 5.0}) {
                        if (std::hypot(lx - nx, ly - (local[33].y - 1.0)) < 2.0) {
                            rgb[0] = 90, rgb[1] = 50, rgb[2] = 45;
                        }
                    }
                    for (double ex : {-id.eye_dx, id.eye_dx}) {
                        const double u = (lx - ex) / id.eye_w, v = (ly - id.eye_y) / id.eye_h;
                        if (u * u + v * v <= 1.0) {
                            rgb[0] = 235, rgb[1] = 235, rgb[2] = 230;
                            if (std::hypot(lx - ex, ly - id.eye_y) < 0.9 * id.eye_h) {
                                rgb[0] = 60, rgb[1] = 40, rgb[2] = 25;
                            }
                        }
                    }
                    const double mu = lx / id.mouth_w, mv = (ly - id.mouth_y) / outer_b;
                    if (mu * mu + mv * mv <= 1.0) {
                        for (int c = 0; c < 3; ++c) rgb[c] = id.lip[c];
                        const double iu = lx / (0.7 * id.mouth_w), iv = (ly - id.mouth_y) / (0.5 * pose.mouth_open);
                        if (iu * iu + iv * iv <= 1.0) {
                            rgb[0] = 50, rgb[1] = 20, rgb[2] = 25;
                        }
                    }
                }
                for (int c = 0; c < 3; ++c) {
                    img.at(x, y, c) = to_pixel(rgb[c] * pose.light + noise.normal() * 2.0);
                }
            }
        }
        video.frames.push_back(std::move(img));
        video.landmarks.push_back(lms);
    }
    return video;
}

LandmarkSet random_face_landmarks(std::uint64_t seed) {
    const Identity id = draw_identity(seed);
    Rng rng(mix_seed(seed, 5));
    const Pose pose = pose_at(id, static_cast<std::size_t>(rng.below(40)), 40);
    const auto local = local_landmarks(id, pose);
    const double ca = std::cos(pose.angle), sa = std::sin(pose.angle);
    LandmarkSet out;
    for (std::size_t i = 0; i < kNumLandmarks; ++i) {
        const Point& p = local[i];
        out.points[i] = {id.cx + pose.tx + ca * p.x - sa * p.y, id.cy + pose.ty + sa * p.x + ca * p.y};
    }
    return out;
}

FaceVideo make_fake_video(std::uint64_t subject_seed, std::uint64_t manipulation_seed, std::size_t n_frames) {
    FaceVideo video = make_face_video(subject_seed, n_frames);
    const SynthConfig cfg;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::uint64_t seed = mix_seed(manipulation_seed, f);
        const MaskScheme scheme = kAllSchemes[seed % 4];
        video.frames[f] = make_pseudo_deepfake(video.frames[f], video.landmarks[f], scheme, cfg, seed).image;
    }
    return video;
}

VideoRecord write_video(const FaceVideo& video, const std::filesystem::path& dir, const std::string& video_id,
                        const std::string& subject_id, Label label, Split split) {
    const auto vdir = std::filesystem::absolute(dir / video_id);
    std::filesystem::create_directories(vdir);
    VideoRecord r;
    r.video_id = video_id;
    r.subject_id = subject_id;
    r.label = label;
    r.split = split;
    for (std::size_t f = 0; f < video.frames.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "f%03zu.png", f);
        write_image(video.frames[f], vdir / name);
        r.frame_paths.push_back(vdir / name);
    }
    r.landmark_path = vdir / "landmarks.txt";
    write_landmarks(video.landmarks, r.landmark_path);
    return r;
}

std::filesystem::path scratch_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("difffake_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace difffake::testing
