#include "difffake/synth.hpp"

#include "difffake/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace difffake {

namespace {

struct Hsv {
    double h, s, v;
};

Hsv rgb_to_hsv(double r, double g, double b) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
    if (delta > 0.0) {
        double h;
        if (mx == r) {
            h = (g - b) / delta;
        } else if (mx == g) {
            h = 2.0 + (b - r) / delta;
        } else {
            h = 4.0 + (r - g) / delta;
        }
        h /= 6.0;
        out.h = h < 0.0 ? h + 1.0 : h;
    }
    return out;
}

void hsv_to_rgb(const Hsv& in, double& r, double& g, double& b) {
    const double h6 = in.h * 6.0;
    const double sector = std::floor(h6);
    const double f = h6 - sector;
    const double p = in.v * (1.0 - in.s);
    const double q = in.v * (1.0 - in.s * f);
    const double t = in.v * (1.0 - in.s * (1.0 - f));
    switch (static_cast<int>(sector) % 6) {
    case 0:
        r = in.v, g = t, b = p;
        break;
    case 1:
        r = q, g = in.v, b = p;
        break;
    case 2:
        r = p, g = in.v, b = t;
        break;
    case 3:
        r = p, g = q, b = in.v;
        break;
    case 4:
        r = t, g = p, b = in.v;
        break;
    default:
        r = in.v, g = p, b = q;
        break;
    }
}

template <typename F>
FaceImage map_pixels(const FaceImage& image, F&& f) {
    FaceImage out(image.width(), image.height());
    const auto& in = image.data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < in.size(); i += 3) {
        double rgb[3] = {static_cast<double>(in[i]), static_cast<double>(in[i + 1]),
                         static_cast<double>(in[i + 2])};
        f(rgb);
        dst[i] = to_pixel(rgb[0]);
        dst[i + 1] = to_pixel(rgb[1]);
        dst[i + 2] = to_pixel(rgb[2]);
    }
    return out;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

} // namespace

CropRegion enlarged_crop(const BoundingBox& box, double factor, int frame_width, int frame_height) {
    if (!(box.width > 0.0 && box.height > 0.0) || !std::isfinite(box.x) || !std::isfinite(box.y) ||
        !std::isfinite(box.width) || !std::isfinite(box.height)) {
        throw GeometryError("degenerate face box (zero area)");
    }
    if (!(factor > 0.0)) {
        throw std::invalid_argument("crop enlargement factor must be positive");
    }
    const double cx = box.x + box.width / 2.0;
    const double cy = box.y + box.height / 2.0;
    double side = factor * std::max(box.width, box.height);
    side = std::min({side, static_cast<double>(frame_width), static_cast<double>(frame_height)});
    CropRegion crop{cx - side / 2.0, cy - side / 2.0, side};
    crop.x = std::clamp(crop.x, 0.0, frame_width - side);
    crop.y = std::clamp(crop.y, 0.0, frame_height - side);
    return crop;
}

PreprocessedFace preprocess(const FaceImage& raw, const BoundingBox& box, const LandmarkSet& landmarks,
                            double factor, int out_size) {
    const CropRegion crop = enlarged_crop(box, factor, raw.width(), raw.height());
    const double scale = crop.side / out_size;
    PreprocessedFace out{FaceImage(out_size, out_size), {}};
    for (int y = 0; y < out_size; ++y) {
        const double sy = crop.y + (y + 0.5) * scale - 0.5;
        for (int x = 0; x < out_size; ++x) {
            const double sx = crop.x + (x + 0.5) * scale - 0.5;
            for (int c = 0; c < 3; ++c) {
                out.image.at(x, y, c) = to_pixel(raw.sample(sx, sy, c));
            }
        }
    }
    const double upper = std::nextafter(static_cast<double>(out_size), 0.0);
    for (std::size_t i = 0; i < kNumLandmarks; ++i) {
        const Point& p = landmarks.points[i];
        out.landmarks.points[i] = {std::clamp((p.x - crop.x) / scale, 0.0, upper),
                                   std::clamp((p.y - crop.y) / scale, 0.0, upper)};
    }
    return out;
}

std::string_view to_string(TransformKind kind) {
    switch (kind) {
    case TransformKind::RgbShift:
        return "rgb_shift";
    case TransformKind::HsvShift:
        return "hsv_shift";
    case TransformKind::BrightnessContrast:
        return "brightness_contrast";
    case TransformKind::Sharpen:
        return "sharpen";
    case TransformKind::Downscale:
        return "downscale";
    }
    return "rgb_shift";
}

void TransformConfig::validate() const {
    for (double p : probability) {
        check_probability(p, "transform probability");
    }
    if (!(affine_translate_frac >= 0.0 && affine_translate_frac <= 0.03)) {
        throw std::invalid_argument("affine translation fraction must lie in [0, 0.03]");
    }
    if (!(affine_resize_frac >= 0.0 && affine_resize_frac <= 0.05)) {
        throw std::invalid_argument("affine resize fraction must lie in [0, 0.05]");
    }
}

TransformConfig TransformConfig::identity() {
    TransformConfig cfg;
    cfg.probability.fill(0.0);
    cfg.affine_translate_frac = 0.0;
    cfg.affine_resize_frac = 0.0;
    return cfg;
}

std::vector<TransformDraw> draw_transforms(const TransformConfig& cfg, Rng& rng, bool force_one) {
    cfg.validate();
    std::array<TransformDraw, 5> candidates;
    std::vector<TransformDraw> fired;
    for (std::size_t k = 0; k < kAllTransforms.size(); ++k) {
        TransformDraw& d = candidates[k];
        d.kind = kAllTransforms[k];
        const bool fires = rng.bernoulli(cfg.probability[k]);
        switch (d.kind) {
        case TransformKind::RgbShift:
            for (double& p : d.params) p = rng.uniform(-TransformConfig::kRgbShiftLimit, TransformConfig::kRgbShiftLimit);
            break;
        case TransformKind::HsvShift:
            for (double& p : d.params) p = rng.uniform(-TransformConfig::kHsvShiftLimit, TransformConfig::kHsvShiftLimit);
            break;
        case TransformKind::BrightnessContrast:
            d.params[0] = rng.uniform(-TransformConfig::kBrightnessContrastLimit, TransformConfig::kBrightnessContrastLimit);
            d.params[1] = rng.uniform(-TransformConfig::kBrightnessContrastLimit, TransformConfig::kBrightnessContrastLimit);
            break;
        case TransformKind::Sharpen:
            d.params[0] = rng.uniform(TransformConfig::kSharpenMin, TransformConfig::kSharpenMax);
            break;
        case TransformKind::Downscale:
            d.params[0] = TransformConfig::kDownscaleFactors[rng.below(TransformConfig::kDownscaleFactors.size())];
            break;
        }
        if (fires) {
            fired.push_back(d);
        }
    }
    if (fired.empty() && force_one) {
        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k < kAllTransforms.size(); ++k) {
            if (cfg.probability[k] > 0.0) eligible.push_back(k);
        }
        if (!eligible.empty()) {
            fired.push_back(candidates[eligible[rng.below(eligible.size())]]);
        }
    }
    return fired;
}

FaceImage rgb_shift(const FaceImage& image, double red, double green, double blue) {
    return map_pixels(image, [&](double* rgb) {
        rgb[0] += red;
        rgb[1] += green;
        rgb[2] += blue;
    });
}

FaceImage hsv_shift(const FaceImage& image, double hue, double saturation, double value) {
    return map_pixels(image, [&](double* rgb) {
        Hsv hsv = rgb_to_hsv(rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0);
        hsv.h = hsv.h + hue;
        hsv.h -= std::floor(hsv.h);
        hsv.s = std::clamp(hsv.s + saturation, 0.0, 1.0);
        hsv.v = std::clamp(hsv.v + value, 0.0, 1.0);
        double r, g, b;
        hsv_to_rgb(hsv, r, g, b);
        rgb[0] = r * 255.0;
        rgb[1] = g * 255.0;
        rgb[2] = b * 255.0;
    });
}

FaceImage brightness_contrast(const FaceImage& image, double brightness, double contrast) {
    return map_pixels(image, [&](double* rgb) {
        for (int c = 0; c < 3; ++c) {
            rgb[c] = (1.0 + contrast) * rgb[c] + brightness * 255.0;
        }
    });
}

FaceImage sharpen(const FaceImage& image, double intensity) {
    const int w = image.width();
    const int h = image.height();
    FaceImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double neighbours = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        neighbours += image.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1), c);
                    }
                }
                const double center = image.at(x, y, c);
                const double sharpened = 9.0 * center - neighbours;
                out.at(x, y, c) = to_pixel((1.0 - intensity) * center + intensity * sharpened);
            }
        }
    }
    return out;
}

FaceImage downscale(const FaceImage& image, int factor) {
    if (factor < 1) {
        throw std::invalid_argument("downscale factor must be >= 1");
    }
    const int w = image.width();
    const int h = image.height();
    const int sw = std::max(1, w / factor);
    const int sh = std::max(1, h / factor);
    FaceImage small;
    if (sw * factor == w && sh * factor == h) {
        small = FaceImage(sw, sh);
        const double area = static_cast<double>(factor) * factor;
        for (int y = 0; y < sh; ++y) {
            for (int x = 0; x < sw; ++x) {
                for (int c = 0; c < 3; ++c) {
                    double acc = 0.0;
                    for (int dy = 0; dy < factor; ++dy) {
                        for (int dx = 0; dx < factor; ++dx) {
                            acc += image.at(x * factor + dx, y * factor + dy, c);
                        }
                    }
                    small.at(x, y, c) = to_pixel(acc / area);
                }
            }
        }
    } else {
        small = resize_bilinear(image, sw, sh);
    }
    return resize_bilinear(small, w, h);
}

FaceImage apply_transform(const FaceImage& image, const TransformDraw& draw) {
    switch (draw.kind) {
    case TransformKind::RgbShift:
        return rgb_shift(image, draw.params[0], draw.params[1], draw.params[2]);
    case TransformKind::HsvShift:
        return hsv_shift(image, draw.params[0], draw.params[1], draw.params[2]);
    case TransformKind::BrightnessContrast:
        return brightness_contrast(image, draw.params[0], draw.params[1]);
    case TransformKind::Sharpen:
        return sharpen(image, draw.params[0]);
    case TransformKind::Downscale:
        return downscale(image, static_cast<int>(draw.params[0]));
    }
    return image;
}

FaceImage apply_st_transforms(const FaceImage& image, const TransformConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    FaceImage out = image;
    for (const TransformDraw& d : draw_transforms(cfg, rng, false)) {
        out = apply_transform(out, d);
    }
    return out;
}

FaceImage affine_warp(const FaceImage& image, double tx, double ty, double scale) {
    if (!(scale > 0.0)) {
        throw std::invalid_argument("affine scale must be positive");
    }
    const int w = image.width();
    const int h = image.height();
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    FaceImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const double sy = cy + (y - cy) / scale - ty;
        for (int x = 0; x < w; ++x) {
            const double sx = cx + (x - cx) / scale - tx;
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = to_pixel(image.sample(sx, sy, c));
            }
        }
    }
    return out;
}

AffineDraw draw_affine(const TransformConfig& cfg, int width, int height, Rng& rng) {
    AffineDraw d;
    d.tx = rng.uniform(-cfg.affine_translate_frac, cfg.affine_translate_frac) * width;
    d.ty = rng.uniform(-cfg.affine_translate_frac, cfg.affine_translate_frac) * height;
    d.scale = 1.0 + rng.uniform(-cfg.affine_resize_frac, cfg.affine_resize_frac);
    return d;
}

FaceImage affine_source(const FaceImage& image, const TransformConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const AffineDraw d = draw_affine(cfg, image.width(), image.height(), rng);
    return affine_warp(image, d.tx, d.ty, d.scale);
}

FaceImage affine_source(const FaceImage& image, std::uint64_t seed) {
    return affine_source(image, TransformConfig{}, seed);
}

FaceImage blend(const FaceImage& source, const FaceImage& target, const BlendMask& mask) {
    if (source.width() != target.width() || source.height() != target.height() ||
        mask.width() != source.width() || mask.height() != source.height()) {
        throw DimensionError("blend inputs must share dimensions");
    }
    FaceImage out(source.width(), source.height());
    for (int y = 0; y < source.height(); ++y) {
        for (int x = 0; x < source.width(); ++x) {
            const double m = mask.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double s = source.at(x, y, c);
                const double t = target.at(x, y, c);
                out.at(x, y, c) = to_pixel(t + m * (s - t));
            }
        }
    }
    return out;
}

void SynthConfig::validate() const {
    transforms.validate();
    if (blend_ratios.empty()) {
        throw std::invalid_argument("at least one blend ratio is required");
    }
    for (double r : blend_ratios) {
        if (!(r > 0.0 && r <= 1.0)) {
            throw std::invalid_argument("blend ratios must lie in (0, 1]");
        }
    }
}

PseudoDeepfake make_pseudo_deepfake(const FaceImage& real, const LandmarkSet& landmarks, MaskScheme scheme,
                                    const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    PseudoDeepfake out;
    out.scheme = scheme;
    out.provenance.seed = seed;
    out.provenance.scheme = scheme;

    Rng transform_rng(mix_seed(seed, 1));
    FaceImage source = real;
    FaceImage target = real;
    for (const TransformDraw& d : draw_transforms(cfg.transforms, transform_rng, cfg.force_one_transform)) {
        Recipient to = Recipient::Source;
        if (cfg.recipients == RecipientPolicy::RandomPerTransform && transform_rng.bernoulli(0.5)) {
            to = Recipient::Target;
        }
        FaceImage& img = to == Recipient::Source ? source : target;
        img = apply_transform(img, d);
        out.provenance.transforms.push_back({d, to});
    }

    Rng affine_rng(mix_seed(seed, 2));
    out.provenance.affine = draw_affine(cfg.transforms, real.width(), real.height(), affine_rng);
    const AffineDraw& a = out.provenance.affine;
    source = affine_warp(source, a.tx, a.ty, a.scale);

    Rng ratio_rng(mix_seed(seed, 4));
    out.provenance.blend_ratio = cfg.blend_ratios[ratio_rng.below(cfg.blend_ratios.size())];
    out.mask = make_blend_mask(scheme, landmarks, real.width(), real.height(), cfg.mask,
                               out.provenance.blend_ratio, mix_seed(seed, 3));
    out.image = blend(source, target, out.mask);
    out.target = std::move(target);
    return out;
}

std::string provenance_json(const Provenance& p) {
    nlohmann::json j;
    j["video_id"] = p.video_id;
    j["frame_index"] = p.frame_index;
    j["seed"] = p.seed;
    j["scheme"] = to_string(p.scheme);
    j["blend_ratio"] = p.blend_ratio;
    j["label"] = 1;
    j["affine"] = {{"tx", p.affine.tx}, {"ty", p.affine.ty}, {"scale", p.affine.scale}};
    nlohmann::json transforms = nlohmann::json::array();
    for (const auto& t : p.transforms) {
        transforms.push_back({{"kind", to_string(t.draw.kind)},
                              {"params", t.draw.params},
                              {"recipient", t.recipient == Recipient::Source ? "source" : "target"}});
    }
    j["transforms"] = std::move(transforms);
    return j.dump(2);
}

} // namespace difffake
