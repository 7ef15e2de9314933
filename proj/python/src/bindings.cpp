#include "difffake/diffcomb.hpp"
#include "difffake/error.hpp"
#include "difffake/eval.hpp"
#include "difffake/features.hpp"
#include "difffake/gmm.hpp"
#include "difffake/manifest_io.hpp"
#include "difffake/mask_gen.hpp"
#include "difffake/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace difffake;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FaceImage to_image(const ImageArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) {
        throw DimensionError("expected an H x W x 3 uint8 array");
    }
    FaceImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.data().data(), a.data(), img.data().size());
    return img;
}

ImageArray from_image(const FaceImage& img) {
    ImageArray out({img.height(), img.width(), 3});
    std::memcpy(out.mutable_data(), img.data().data(), img.data().size());
    return out;
}

BlendMask to_mask(const DoubleArray& a) {
    if (a.ndim() != 2) {
        throw DimensionError("expected an H x W mask");
    }
    BlendMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(m.values().data(), a.data(), m.values().size() * sizeof(double));
    return m;
}

DoubleArray from_mask(const BlendMask& m) {
    DoubleArray out({m.height(), m.width()});
    std::memcpy(out.mutable_data(), m.values().data(), m.values().size() * sizeof(double));
    return out;
}

LandmarkSet to_landmarks(const DoubleArray& a) {
    if (a.ndim() != 2 || a.shape(0) != static_cast<py::ssize_t>(kNumLandmarks) || a.shape(1) != 2) {
        throw DimensionError("expected a 68 x 2 landmark array");
    }
    LandmarkSet l;
    for (std::size_t i = 0; i < kNumLandmarks; ++i) l.points[i] = {a.at(i, 0), a.at(i, 1)};
    return l;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "DiffFake core: blending, masks, toy features, pair combination, GMM scoring, AUC";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def("blend", [](const ImageArray& s, const ImageArray& t, const DoubleArray& mask) {
        return from_image(blend(to_image(s), to_image(t), to_mask(mask)));
    }, py::arg("source"), py::arg("target"), py::arg("mask"));

    m.def("make_blend_mask",
          [](const std::string& scheme, const DoubleArray& landmarks, int width, int height, double ratio,
             std::uint64_t seed) {
              return from_mask(make_blend_mask(parse_scheme(scheme), to_landmarks(landmarks), width, height,
                                               MaskParams{}, ratio, seed));
          },
          py::arg("scheme"), py::arg("landmarks"), py::arg("width") = kFaceSize, py::arg("height") = kFaceSize,
          py::arg("blend_ratio") = 1.0, py::arg("seed") = 0);

    m.def("toy_extract", [](const ImageArray& image) {
        const Embedding e = toy_extract(to_image(image));
        FloatArray out(static_cast<py::ssize_t>(e.size()));
        std::memcpy(out.mutable_data(), e.data(), e.size() * sizeof(float));
        return out;
    }, py::arg("image"));

    m.def("combine", [](const DoubleArray& a, const DoubleArray& b, const std::string& mode) {
        const auto v = combine_values(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                                      std::span<const double>(b.data(), static_cast<std::size_t>(b.size())),
                                      parse_mode(mode));
        DoubleArray out(static_cast<py::ssize_t>(v.size()));
        std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
        return out;
    }, py::arg("a"), py::arg("b"), py::arg("mode") = "sub2");

    m.def("auc", [](const DoubleArray& scores, const py::array_t<int, py::array::forcecast>& labels) {
        if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
        std::vector<ScoredSample> s(static_cast<std::size_t>(scores.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i].score = scores.data()[i];
            s[i].label = labels.data()[i];
        }
        return auc(s);
    }, py::arg("scores"), py::arg("labels"));

    m.def("write_embeddings",
          [](const std::filesystem::path& path, const std::vector<std::string>& ids,
             const std::vector<std::uint32_t>& frames, const FloatArray& values) {
              if (values.ndim() != 2 || static_cast<std::size_t>(values.shape(0)) != ids.size() ||
                  ids.size() != frames.size()) {
                  throw DimensionError("expected ids, frames and an N x dim array of matching length");
              }
              const auto dim = static_cast<std::uint32_t>(values.shape(1));
              EmbeddingStore store(dim);
              for (std::size_t i = 0; i < ids.size(); ++i) {
                  const float* row = values.data() + i * dim;
                  store.insert(ids[i], frames[i], std::vector<float>(row, row + dim));
              }
              write_embeddings(store, path);
          },
          py::arg("path"), py::arg("video_ids"), py::arg("frames"), py::arg("values"),
          "Writes an embedding file readable by the extract/fit-adm/score commands.");

    m.def("read_embeddings", [](const std::filesystem::path& path) {
        const EmbeddingStore store = read_embeddings(path);
        std::vector<std::string> ids;
        std::vector<std::uint32_t> frames;
        FloatArray values({static_cast<py::ssize_t>(store.size()), static_cast<py::ssize_t>(store.dim())});
        float* dst = values.mutable_data();
        for (const auto& [key, v] : store.entries()) {
            ids.push_back(key.video_id);
            frames.push_back(key.frame_index);
            std::memcpy(dst, v.data(), v.size() * sizeof(float));
            dst += v.size();
        }
        return py::make_tuple(ids, frames, values);
    }, py::arg("path"), "Returns (video_ids, frames, N x dim float32 array) in key order.");

    py::class_<GmmModel>(m, "GmmModel")
        .def_property_readonly("dim", &GmmModel::dim)
        .def_property_readonly("n_components", &GmmModel::n_components)
        .def_property_readonly("weights", &GmmModel::weights)
        .def_property_readonly("means", &GmmModel::means)
        .def_property_readonly("variances", &GmmModel::variances)
        .def_property_readonly("log_likelihood_history",
                               [](const GmmModel& g) { return g.fit_info().log_likelihood_history; })
        .def("log_density", [](const GmmModel& g, const DoubleArray& x) {
            return g.log_density(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        })
        .def("score", [](const GmmModel& g, const DoubleArray& x) {
            return g.score(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        })
        .def("save", [](const GmmModel& g, const std::filesystem::path& p) { save_model(g, p); });

    m.def("fit_gmm",
          [](const RowMatrix& data, std::uint32_t n_components, std::uint64_t seed, double tol,
             std::uint32_t max_iter) {
              FitOptions opt;
              opt.n_components = n_components;
              opt.seed = seed;
              opt.tol = tol;
              opt.max_iter = max_iter;
              return fit_gmm(data, opt);
          },
          py::arg("data"), py::arg("n_components") = 3, py::arg("seed") = 0, py::arg("tol") = 1e-6,
          py::arg("max_iter") = 200);

    m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
}
