#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>

#include "lightwaves/distrib.hpp"
#include "lightwaves/error.hpp"
#include "lightwaves/inference.hpp"
#include "lightwaves/io.hpp"
#include "lightwaves/kernels.hpp"
#include "lightwaves/macs.hpp"
#include "lightwaves/parallel.hpp"
#include "lightwaves/scattering.hpp"
#include "lightwaves/synthetic.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace lightwaves;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Variant variant_arg(const std::string& s) {
  auto v = parse_variant(s);
  if (!v) throw UsageError("unknown variant '" + s + "'");
  return *v;
}

std::span<const double> as_span(const Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

TimeSeriesDataset make_dataset(const Array& values, std::optional<std::vector<std::uint32_t>> labels,
                               std::vector<std::string> class_names, std::string name) {
  if (values.ndim() != 3) throw DataError("values must have shape (n, channels, length)");
  TimeSeriesDataset d;
  d.name = std::move(name);
  d.n = static_cast<std::size_t>(values.shape(0));
  d.channels = static_cast<std::size_t>(values.shape(1));
  d.length = static_cast<std::size_t>(values.shape(2));
  d.values.assign(values.data(), values.data() + values.size());
  if (labels) d.labels = std::move(*labels);
  d.class_names = std::move(class_names);
  d.validate();
  return d;
}

Array dataset_values(const TimeSeriesDataset& d) {
  Array out({d.n, d.channels, d.length});
  std::memcpy(out.mutable_data(), d.values.data(), d.values.size() * sizeof(double));
  return out;
}

py::dict path_dict(const PathFeatures& p) {
  return py::dict("max1"_a = p.max1, "min1"_a = p.min1, "ppv1"_a = p.ppv1, "ls1"_a = p.ls1, "max2"_a = p.max2,
                  "min2"_a = p.min2, "ppv2"_a = p.ppv2, "ls2"_a = p.ls2);
}

std::vector<std::string> descriptor_names(const std::vector<FeatureDescriptor>& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(to_string(d));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scattering-path features, mRMR selection and ridge classification for multivariate series";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  py::class_<TimeSeriesDataset>(m, "Dataset")
      .def(py::init(&make_dataset), "values"_a, "labels"_a = py::none(),
           "class_names"_a = std::vector<std::string>{}, "name"_a = "")
      .def_readonly("name", &TimeSeriesDataset::name)
      .def_readonly("n", &TimeSeriesDataset::n)
      .def_readonly("channels", &TimeSeriesDataset::channels)
      .def_readonly("length", &TimeSeriesDataset::length)
      .def_readonly("labels", &TimeSeriesDataset::labels)
      .def_readonly("class_names", &TimeSeriesDataset::class_names)
      .def_property_readonly("labeled", &TimeSeriesDataset::labeled)
      .def_property_readonly("values", &dataset_values)
      .def("__repr__", [](const TimeSeriesDataset& d) {
        return "<Dataset " + d.name + " n=" + std::to_string(d.n) + " C=" + std::to_string(d.channels) +
               " L=" + std::to_string(d.length) + ">";
      });

  m.def("load_dataset", &load_dataset, "path"_a, "Read a .ts or LWDS file.");
  m.def("save_dataset", &write_binary_dataset_file, "dataset"_a, "path"_a, "Write an LWDS file.");
  m.def(
      "make_sinusoid_dataset",
      [](std::size_t n, std::size_t channels, std::size_t length, std::size_t informative, std::size_t classes,
         double noise, std::uint64_t seed) {
        return make_sinusoid_dataset({n, channels, length, informative, classes, noise, seed});
      },
      "n"_a = 200, "channels"_a = 20, "length"_a = 200, "informative"_a = 3, "classes"_a = 2, "noise"_a = 0.5,
      "seed"_a = 1);

  m.def("kernel_bank", [] {
    const auto& bank = default_kernel_bank();
    Array out({kKernelCount, kKernelLength});
    for (std::size_t k = 0; k < kKernelCount; ++k)
      std::memcpy(out.mutable_data(k, 0), bank.kernel(k).data(), kKernelLength * sizeof(double));
    return out;
  });
  m.def("dilations", [] {
    const auto& d = default_kernel_bank().dilations;
    return std::vector<std::size_t>(d.begin(), d.end());
  });
  m.def(
      "dilated_xcorr",
      [](const Array& x, const Array& w, std::size_t d) {
        Array out(x.size());
        dilated_xcorr(as_span(x), as_span(w), d, {out.mutable_data(), static_cast<std::size_t>(x.size())});
        return out;
      },
      "x"_a, "w"_a, "dilation"_a);
  m.def(
      "scatter_path",
      [](const Array& x, std::size_t kernel, std::size_t dilation_exp) {
        const auto& bank = default_kernel_bank();
        if (kernel >= kKernelCount || dilation_exp >= kDilationCount) throw DataError("kernel or dilation out of range");
        return path_dict(scatter_path(as_span(x), bank.kernel(kernel), bank.dilation(dilation_exp)));
      },
      "x"_a, "kernel"_a, "dilation_exp"_a);
  m.def(
      "transform_full",
      [](const TimeSeriesDataset& d, const std::string& variant, std::size_t threads) {
        FullTransform t;
        {
          py::gil_scoped_release release;
          t = transform_full(d, default_kernel_bank(), variant_arg(variant), resolve_threads(threads));
        }
        Array out({t.features.rows(), t.features.cols()});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t j = 0; j < t.features.cols(); ++j)
          for (std::size_t i = 0; i < t.features.rows(); ++i) view(i, j) = t.features(i, j);
        return py::make_tuple(out, descriptor_names(t.descriptors));
      },
      "dataset"_a, "variant"_a = "L1L2", "threads"_a = 0,
      "Every path feature for every sample: (n x F array, descriptor names).");

  py::class_<Predictor>(m, "Model")
      .def_static("load", [](const std::filesystem::path& p) { return Predictor(load_model(p)); }, "path"_a)
      .def_static("from_json", [](const std::string& s) { return Predictor(model_from_json(s)); }, "text"_a)
      .def("save", [](const Predictor& p, const std::filesystem::path& path) { save_model(p.model(), path); },
           "path"_a)
      .def("to_json", [](const Predictor& p) { return model_to_json(p.model()); })
      .def_property_readonly("descriptors", [](const Predictor& p) { return descriptor_names(p.model().descriptors); })
      .def_property_readonly("channels_used", [](const Predictor& p) { return p.model().channels_used; })
      .def_property_readonly("class_names", [](const Predictor& p) { return p.model().class_names; })
      .def_property_readonly("alpha", [](const Predictor& p) { return p.model().alpha; })
      .def_property_readonly("variant", [](const Predictor& p) { return std::string(to_string(p.model().variant)); })
      .def_property_readonly("input_channels", [](const Predictor& p) { return p.model().input_channels; })
      .def_property_readonly("metadata", [](const Predictor& p) { return p.model().metadata; })
      .def(
          "features",
          [](const Predictor& p, const Array& sample) {
            const auto f = p.features(as_span(sample));
            return Array(static_cast<py::ssize_t>(f.size()), f.data());
          },
          "sample"_a, "Raw selected features of one (channels, length) sample.")
      .def(
          "predict",
          [](const Predictor& p, const TimeSeriesDataset& d, std::size_t threads) {
            p.check_compatible(d);
            py::gil_scoped_release release;
            return p.predict(d, resolve_threads(threads));
          },
          "dataset"_a, "threads"_a = 0)
      .def(
          "score",
          [](const Predictor& p, const TimeSeriesDataset& d, std::size_t threads) {
            p.check_compatible(d);
            py::gil_scoped_release release;
            const auto pred = p.predict(d, resolve_threads(threads));
            return accuracy(pred, d);
          },
          "dataset"_a, "threads"_a = 0);

  m.def(
      "train",
      [](const std::string& data, const std::string& variant, std::size_t features, std::size_t pool,
         std::size_t max_samples, std::uint64_t seed, std::uint32_t workers, bool normalize, std::size_t threads) {
        TrainConfig c;
        c.dataset_path = data;
        c.variant = variant_arg(variant);
        c.final_features = features;
        c.pool_size = pool;
        c.max_train_samples = max_samples;
        c.seed = seed;
        c.worker_count = workers;
        c.normalize = normalize;
        c.validate();
        py::gil_scoped_release release;
        return Predictor(train_in_process(c, resolve_threads(threads)));
      },
      "data"_a, "variant"_a = "L1L2", "features"_a = 500, "pool"_a = 2500, "max_samples"_a = 2048, "seed"_a = 0,
      "workers"_a = 1, "normalize"_a = false, "threads"_a = 0,
      "Train on a dataset file with in-process workers and return the model.");

  m.def(
      "estimate_macs",
      [](const Predictor& p, std::size_t length, double baseline_channels, std::uint64_t baseline_kernels,
         double baseline_kernel_length) {
        const auto r = estimate_macs(p.model().descriptors, length,
                                     {baseline_kernels, baseline_kernel_length, baseline_channels});
        return py::dict("lightwaves_macs"_a = r.lightwaves_macs, "baseline_macs"_a = r.baseline_macs,
                        "ratio"_a = r.ratio, "assumptions"_a = r.assumptions);
      },
      "model"_a, "length"_a, "baseline_channels"_a, "baseline_kernels"_a = 10000, "baseline_kernel_length"_a = 9.0);
}
