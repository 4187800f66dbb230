#include "hrvband/error.hpp"
#include "hrvband/pipeline.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace hrvband;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a) {
    if (a.ndim() != 1) throw ConfigError("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<bool> to_bool_array(const std::vector<bool>& v) {
    py::array_t<bool> out(static_cast<py::ssize_t>(v.size()));
    auto m = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<py::ssize_t>(i)) = v[i];
    return out;
}

template <class F>
py::array_t<cplx> apply(const DoubleArray& x, F&& f) {
    py::array_t<cplx> out(x.request().shape);
    const double* in = x.data();
    cplx* o = out.mutable_data();
    for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = f(in[i]);
    return out;
}

UniformSeries make_series(const DoubleArray& values, double step, double start_time) {
    UniformSeries s;
    s.start_time = start_time;
    s.step = step;
    s.values = to_vector(values);
    s.validate();
    return s;
}

py::dict series_dict(const UniformSeries& s) {
    py::dict d;
    d["start_time"] = s.start_time;
    d["step"] = s.step;
    d["values"] = to_array(s.values);
    return d;
}

}  // namespace

PYBIND11_MODULE(_hrvband, m) {
    m.doc() = "Band-limited wavelet analysis and change-point segmentation of heart-rate series";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    py::class_<BandSpec>(m, "Band")
        .def(py::init([](double lo, double hi, std::string name) {
                 BandSpec b{lo, hi, std::move(name)};
                 b.validate();
                 return b;
             }),
             py::arg("lo"), py::arg("hi"), py::arg("name") = "")
        .def_readonly("lo", &BandSpec::lo)
        .def_readonly("hi", &BandSpec::hi)
        .def_readonly("name", &BandSpec::name)
        .def_property_readonly("center", &BandSpec::center)
        .def("__repr__", [](const BandSpec& b) {
            std::ostringstream ss;
            ss << "Band(" << b.lo << ", " << b.hi << ", '" << b.name << "')";
            return ss.str();
        });
    m.def("orthosympathetic_band", &orthosympathetic_band);
    m.def("parasympathetic_band", &parasympathetic_band);

    py::class_<FittedWavelet>(m, "Wavelet")
        .def_property_readonly("family", [](const FittedWavelet& w) { return to_string(w.family()); })
        .def_property_readonly("band", &FittedWavelet::band)
        .def_property_readonly("amplitude", &FittedWavelet::amplitude)
        .def_property_readonly("rate", &FittedWavelet::rate)
        .def_property_readonly("modulation_hz", &FittedWavelet::modulation_hz)
        .def_property_readonly("rho", &FittedWavelet::rho)
        .def_property_readonly("window", [](const FittedWavelet& w) { return py::make_tuple(w.window().lo, w.window().hi); })
        .def_property_readonly("freq_support_hz",
                               [](const FittedWavelet& w) { return py::make_tuple(w.freq_support_hz().lo, w.freq_support_hz().hi); })
        .def("evaluate", [](const FittedWavelet& w, const DoubleArray& t) { return apply(t, [&](double x) { return w.evaluate(x); }); },
             py::arg("t"))
        .def("spectrum", [](const FittedWavelet& w, const DoubleArray& f) { return apply(f, [&](double x) { return w.spectrum(x); }); },
             py::arg("f_hz"))
        .def("band_energy_fraction", &sampled_band_energy_fraction, py::arg("band"), py::arg("dt"))
        .def("l2_norm", &l2_norm, py::arg("dt"));

    m.def(
        "fit_wavelet",
        [](const BandSpec& band, const std::string& family, double half_width, int vanishing_moments) {
            return fit_band(parse_wavelet_family(family), band, half_width, vanishing_moments);
        },
        py::arg("band"), py::arg("family") = "gabor", py::arg("half_width") = 3.5, py::arg("vanishing_moments") = 6);

    py::class_<CoefficientSeries>(m, "Coefficients")
        .def_readonly("band", &CoefficientSeries::band)
        .def_readonly("start_time", &CoefficientSeries::start_time)
        .def_readonly("b_step", &CoefficientSeries::b_step)
        .def_readonly("first_index", &CoefficientSeries::first_index)
        .def_property_readonly("positions", [](const CoefficientSeries& c) { return to_array(c.positions); })
        .def_property_readonly("coeffs", [](const CoefficientSeries& c) { return to_array(c.coeffs); })
        .def_property_readonly("modulus", [](const CoefficientSeries& c) { return to_array(c.modulus); })
        .def_property_readonly("edge_mask", [](const CoefficientSeries& c) { return to_bool_array(c.edge_mask); })
        .def("__len__", &CoefficientSeries::size);

    m.def(
        "transform",
        [](const DoubleArray& values, double step, const FittedWavelet& wavelet, double start_time, double b_step,
           bool include_edges, int threads) {
            TransformOptions opt;
            opt.b_step = b_step;
            opt.include_edges = include_edges;
            opt.threads = threads;
            const auto signal = make_series(values, step, start_time);
            py::gil_scoped_release release;
            return wavelet_coefficients(signal, wavelet, opt);
        },
        py::arg("values"), py::arg("step"), py::arg("wavelet"), py::arg("start_time") = 0.0, py::arg("b_step") = 1.0,
        py::arg("include_edges") = false, py::arg("threads") = 0);

    py::class_<SegmentStats>(m, "Segment")
        .def_readonly("begin", &SegmentStats::begin)
        .def_readonly("end", &SegmentStats::end)
        .def_readonly("mean", &SegmentStats::mean)
        .def_readonly("variance", &SegmentStats::variance);

    py::class_<Segmentation>(m, "Segmentation")
        .def_readonly("n", &Segmentation::n)
        .def_readonly("change_points", &Segmentation::change_points)
        .def_readonly("segments", &Segmentation::segments)
        .def_readonly("contrast", &Segmentation::contrast);

    py::class_<PenaltyPathEntry>(m, "PenaltyPathEntry")
        .def_readonly("segmentation", &PenaltyPathEntry::segmentation)
        .def_readonly("hull_vertex", &PenaltyPathEntry::hull_vertex)
        .def_readonly("beta_lo", &PenaltyPathEntry::beta_lo)
        .def_readonly("beta_hi", &PenaltyPathEntry::beta_hi)
        .def_property_readonly("segments", &PenaltyPathEntry::segments)
        .def_property_readonly("contrast", &PenaltyPathEntry::contrast);

    py::class_<PenaltyPath>(m, "PenaltyPath")
        .def_readonly("entries", &PenaltyPath::entries)
        .def("select", &select_segmentation, py::arg("stability_fraction") = kDefaultStabilityFraction);

    m.def(
        "segment",
        [](const DoubleArray& series, std::size_t segments, std::size_t min_segment_length) {
            const auto v = to_vector(series);
            SegmentationOptions opt;
            opt.min_segment_length = min_segment_length;
            py::gil_scoped_release release;
            return optimal_partition(v, segments, opt);
        },
        py::arg("series"), py::arg("segments"), py::arg("min_segment_length") = 1);

    m.def(
        "penalty_path",
        [](const DoubleArray& series, std::size_t k_max, std::size_t min_segment_length) {
            const auto v = to_vector(series);
            SegmentationOptions opt;
            opt.min_segment_length = min_segment_length;
            py::gil_scoped_release release;
            return penalty_path(v, k_max, opt);
        },
        py::arg("series"), py::arg("k_max") = 20, py::arg("min_segment_length") = 1);

    m.def(
        "index_to_clock",
        [](std::size_t index, double b_step, const std::string& start) {
            return format_clock(index_to_clock(index, b_step, parse_clock(start)));
        },
        py::arg("index"), py::arg("b_step"), py::arg("recording_start"));

    m.def(
        "load_rr",
        [](const std::string& path, const std::string& format, const std::string& artifact_policy, double step) {
            const auto rr = clean_artifacts(load_rr(path, parse_rr_format(format)), parse_artifact_policy(artifact_policy));
            return series_dict(resample(rr, step));
        },
        py::arg("path"), py::arg("format") = "peak-times", py::arg("artifact_policy") = "linear", py::arg("step") = 0.25,
        "Loads an RR file, repairs artifacts and resamples it on a uniform grid.");

    m.def(
        "synthesize",
        [](const std::string& spec_text, std::uint64_t seed) {
            std::istringstream in(spec_text);
            const auto spec = parse_piecewise_spec(in);
            auto d = series_dict(generate(spec, seed));
            d["truth"] = planted_truth(spec, 1.0);
            return d;
        },
        py::arg("spec"), py::arg("seed") = 1, "Draws a piecewise-stationary signal from a spec given as text.");

    m.def("default_config", [] { return config_to_json(RunConfig{}); });

    m.def(
        "analyze",
        [](const std::string& config_json, std::optional<DoubleArray> values, double step, double start_time) {
            const RunConfig config = config_from_json(config_json);
            config.validate();
            UniformSeries signal = values ? make_series(*values, step, start_time) : load_signal(config);
            py::gil_scoped_release release;
            return analyze_signal(signal, config);
        },
        py::arg("config") = "{}", py::arg("values") = py::none(), py::arg("step") = 0.25, py::arg("start_time") = 0.0,
        "Runs every band of a configuration (JSON text) on `values`, or on the configured input file.");

    m.def(
        "run_analyze",
        [](const std::string& config_json) {
            const RunConfig config = config_from_json(config_json);
            py::gil_scoped_release release;
            run_analyze(config);
        },
        py::arg("config"), "Full analyze run writing all outputs into the configured output_dir.");

    py::class_<BandResult>(m, "BandResult")
        .def_readonly("wavelet", &BandResult::wavelet)
        .def_readonly("coefficients", &BandResult::coefficients)
        .def_property_readonly("segmented", [](const BandResult& r) { return to_array(r.segmented); })
        .def_readonly("path", &BandResult::path)
        .def_readonly("selected", &BandResult::selected)
        .def_property_readonly("change_points", [](const BandResult& r) {
            std::vector<std::size_t> idx;
            for (auto c : r.selected.change_points) idx.push_back(r.coefficients.first_index + c);
            return idx;
        });

    py::class_<AnalysisResult>(m, "AnalysisResult")
        .def_property_readonly("signal", [](const AnalysisResult& r) { return series_dict(r.signal); })
        .def_readonly("bands", &AnalysisResult::bands);

    m.def("selftest", [] {
        py::list out;
        for (const auto& line : run_selftest()) out.append(py::make_tuple(line.name, line.passed, line.detail));
        return out;
    });
}
