#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "shapesense/cli.hpp"
#include "shapesense/dataset.hpp"
#include "shapesense/errors.hpp"
#include "shapesense/eval.hpp"
#include "shapesense/kinematics.hpp"
#include "shapesense/nn/model_io.hpp"
#include "shapesense/nn/train.hpp"
#include "shapesense/sensor.hpp"

namespace py = pybind11;
using namespace shapesense;

namespace {

std::vector<std::vector<int>> frame_rows(const SensorFrame& f) {
    std::vector<std::vector<int>> rows(kGridSize, std::vector<int>(kGridSize));
    for (int i = 0; i < kGridSize; ++i)
        for (int j = 0; j < kGridSize; ++j) rows[i][j] = f.at(i, j);
    return rows;
}

py::dict history_dict(const nn::TrainHistory& h) {
    py::dict d;
    d["train_mse"] = h.train_mse;
    d["val_mse"] = h.val_mse;
    d["optimizer_steps"] = h.optimizer_steps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Continuum-robot shape sensing from a simulated 4x4 e-textile sensor";

    py::register_exception<NotConstantCurvature>(m, "NotConstantCurvature", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<MissingSplit>(m, "MissingSplit", PyExc_RuntimeError);
    py::register_exception<MissingNormalization>(m, "MissingNormalization", PyExc_RuntimeError);
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);

    m.attr("DEFAULT_LENGTH") = kDefaultLength;
    m.def("max_curvature", &max_curvature, py::arg("length") = kDefaultLength);
    m.def("wrap_angle", &wrap_angle);

    // kinematics
    py::class_<CurvatureState>(m, "CurvatureState")
        .def(py::init(&CurvatureState::make), py::arg("kappa"), py::arg("phi"),
             py::arg("length") = kDefaultLength)
        .def_readonly("kappa", &CurvatureState::kappa)
        .def_readonly("phi", &CurvatureState::phi)
        .def_readonly("length", &CurvatureState::length)
        .def("__repr__", [](const CurvatureState& s) {
            std::ostringstream o;
            o << "CurvatureState(kappa=" << s.kappa << ", phi=" << s.phi << ", length=" << s.length << ")";
            return o.str();
        });
    py::class_<TipPose>(m, "TipPose")
        .def_readonly("position", &TipPose::position)
        .def_readonly("orientation", &TipPose::orientation);
    m.def("tip_pose", &tip_pose, py::arg("state"));
    m.def("curvature_from_orientation", &curvature_from_orientation, py::arg("orientation"),
          py::arg("length") = kDefaultLength);

    // sensor
    py::class_<SensorModelConfig>(m, "SensorModelConfig")
        .def(py::init<>())
        .def_readwrite("r0", &SensorModelConfig::r0)
        .def_readwrite("alpha", &SensorModelConfig::alpha)
        .def_readwrite("p_scale", &SensorModelConfig::p_scale)
        .def_readwrite("sat_pressure", &SensorModelConfig::sat_pressure)
        .def_readwrite("noise_sigma", &SensorModelConfig::noise_sigma)
        .def_readwrite("vref", &SensorModelConfig::vref)
        .def_readwrite("seed", &SensorModelConfig::seed);
    m.def("pressure_field", &pressure_field, py::arg("state"), py::arg("config") = SensorModelConfig{});
    m.def("resistance", &resistance, py::arg("pressure"), py::arg("config") = SensorModelConfig{});
    m.def("bridge_and_adc", [](double r, const SensorModelConfig& c) { return bridge_and_adc(r, c); },
          py::arg("resistance"), py::arg("config") = SensorModelConfig{}, "Noise-free bridge and ADC");
    m.def("frame_from_state",
          [](const CurvatureState& s, const SensorModelConfig& c) { return frame_rows(frame_from_state(s, c)); },
          py::arg("state"), py::arg("config") = SensorModelConfig{});

    // dataset
    py::class_<NormStats>(m, "NormStats")
        .def_readonly("mu", &NormStats::mu)
        .def_readonly("sigma", &NormStats::sigma)
        .def("to_json", &norm_stats_to_json)
        .def_static("from_json", [](const std::string& s) { return norm_stats_from_json(s); });
    py::class_<SplitIndices>(m, "SplitIndices")
        .def_readonly("train", &SplitIndices::train)
        .def_readonly("val", &SplitIndices::val)
        .def_readonly("test", &SplitIndices::test);
    py::class_<Dataset>(m, "Dataset")
        .def("__len__", &Dataset::size)
        .def_readonly("split", &Dataset::split)
        .def_readwrite("norm", &Dataset::norm)
        .def_readonly("length", &Dataset::length)
        .def("kappa_max", &Dataset::kappa_max)
        .def("frames", [](const Dataset& d) {
            std::vector<std::vector<std::vector<int>>> out;
            for (const auto& s : d.samples) out.push_back(frame_rows(s.frame));
            return out;
        })
        .def("labels", [](const Dataset& d) {
            std::vector<CurvatureState> out;
            for (const auto& s : d.samples) out.push_back(s.label);
            return out;
        })
        .def("to_csv", [](const Dataset& d) {
            std::ostringstream o;
            write_dataset_csv(o, d.samples);
            return o.str();
        })
        .def_static("from_csv", [](const std::string& text, double length) {
            std::istringstream in(text);
            Dataset d;
            d.length = length;
            d.samples = read_dataset_csv(in, true, length).samples;
            return d;
        }, py::arg("text"), py::arg("length") = kDefaultLength);
    m.def("generate", &generate, py::arg("n_kappa") = 35, py::arg("n_phi") = 38,
          py::arg("config") = SensorModelConfig{}, py::arg("length") = kDefaultLength);
    m.def("split", &split, py::arg("dataset"), py::arg("seed"));
    m.def("fit_normalization", py::overload_cast<const Dataset&>(&fit_normalization));
    m.def("apply_normalization", [](const std::vector<int>& counts, const NormStats& norm) {
        if (counts.size() != kChannels) throw ShapeMismatch("expected 16 counts");
        SensorFrame f;
        std::copy(counts.begin(), counts.end(), f.counts.begin());
        return apply_normalization(f, norm);
    }, py::arg("counts"), py::arg("norm"));
    m.def("encode_target", &encode_target);
    m.def("decode_target", [](const TargetVector& t, double length) {
        const auto d = decode_target(t, length);
        return py::make_tuple(d.kappa, d.phi, d.degenerate_angle);
    }, py::arg("t"), py::arg("length") = kDefaultLength);
    m.def("parse_frame_line", [](const std::string& line) {
        const auto s = parse_frame_line(line);
        return py::make_tuple(std::vector<int>(s.frame.counts.begin(), s.frame.counts.end()), s.label);
    });
    m.def("format_frame_line", [](const std::string& line) { return format_frame_line(parse_frame_line(line)); },
          "Canonical text of a frame line");

    // nn
    py::class_<nn::ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &nn::ModelSpec::name)
        .def("describe", &nn::ModelSpec::describe)
        .def("output_dim", &nn::ModelSpec::output_dim)
        .def("to_json", [](const nn::ModelSpec& s) { return nn::spec_to_json(s); });
    m.def("arch", &eval::arch_by_name, py::arg("name"), "Architecture by name: ref, m1..m5");
    m.def("param_count", py::overload_cast<const nn::ModelSpec&>(&nn::param_count));
    m.def("param_count_audit", &eval::param_count_audit);

    py::class_<nn::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("lr", &nn::TrainConfig::lr)
        .def_readwrite("batch_size", &nn::TrainConfig::batch_size)
        .def_readwrite("epochs", &nn::TrainConfig::epochs)
        .def_readwrite("beta1", &nn::TrainConfig::beta1)
        .def_readwrite("beta2", &nn::TrainConfig::beta2)
        .def_readwrite("eps_adam", &nn::TrainConfig::eps_adam)
        .def_readwrite("seed", &nn::TrainConfig::seed)
        .def_readwrite("shuffle", &nn::TrainConfig::shuffle)
        .def_property("schedule", [](const nn::TrainConfig& c) { return std::string(nn::to_string(c.schedule)); },
                      [](nn::TrainConfig& c, const std::string& s) { c.schedule = nn::schedule_from_string(s); })
        .def_readwrite("final_lr_fraction", &nn::TrainConfig::final_lr_fraction)
        .def("lr_at", &nn::TrainConfig::lr_at);

    py::class_<nn::Model>(m, "Model")
        .def_readonly("spec", &nn::Model::spec)
        .def_readonly("norm", &nn::Model::norm)
        .def("param_count", &nn::Model::param_count)
        .def("forward", &nn::forward, py::arg("image"))
        .def("to_json", [](const nn::Model& mdl) { return nn::model_to_json(mdl); })
        .def_static("from_json", [](const std::string& s) { return nn::model_from_json(s); });

    m.def("train", [](const nn::ModelSpec& spec, const Dataset& ds, const nn::TrainConfig& cfg) {
        nn::TrainResult r;
        {
            py::gil_scoped_release release;
            r = nn::train(spec, ds, cfg);
        }
        return py::make_tuple(std::move(r.model), history_dict(r.history));
    }, py::arg("spec"), py::arg("dataset"), py::arg("config") = nn::TrainConfig{});

    // eval
    py::class_<eval::EvalReport>(m, "EvalReport")
        .def_readonly("mse", &eval::EvalReport::mse)
        .def_readonly("rmse_kappa", &eval::EvalReport::rmse_kappa)
        .def_readonly("rmse_phi", &eval::EvalReport::rmse_phi)
        .def_readonly("rmse_kappa_identifiable", &eval::EvalReport::rmse_kappa_identifiable)
        .def_readonly("rmse_phi_identifiable", &eval::EvalReport::rmse_phi_identifiable)
        .def_readonly("n_identifiable", &eval::EvalReport::n_identifiable)
        .def("__len__", [](const eval::EvalReport& r) { return r.rows.size(); })
        .def("to_csv", [](const eval::EvalReport& r) {
            std::ostringstream o;
            eval::write_eval_csv(o, r);
            return o.str();
        });
    m.def("evaluate", [](const nn::Model& mdl, const Dataset& ds, const std::string& which) {
        return eval::evaluate(mdl, ds, eval::split_from_string(which));
    }, py::arg("model"), py::arg("dataset"), py::arg("split") = "test");

    m.def("kfold_partition", &eval::kfold_partition, py::arg("n"), py::arg("k") = 5, py::arg("seed") = 0);
    m.def("kfold", [](const nn::ModelSpec& spec, const Dataset& ds, int k, int epochs, const nn::TrainConfig& cfg,
                      std::uint64_t seed) {
        std::vector<eval::FoldResult> folds;
        {
            py::gil_scoped_release release;
            folds = eval::kfold(spec, ds, {k, epochs, seed, 1}, cfg);
        }
        std::vector<double> mse;
        for (const auto& f : folds) mse.push_back(f.mse);
        return mse;
    }, py::arg("spec"), py::arg("dataset"), py::arg("k") = 5, py::arg("epochs") = 100,
       py::arg("config") = nn::TrainConfig{}, py::arg("seed") = 0);
    m.def("crossval_study", [](const Dataset& ds, int k, int epochs, const nn::TrainConfig& cfg, std::uint64_t seed,
                               unsigned threads) {
        eval::CvReport report;
        {
            py::gil_scoped_release release;
            report = eval::crossval_study(eval::arch_registry(), ds, {k, epochs, seed, threads}, cfg);
        }
        std::ostringstream o;
        eval::write_cv_csv(o, report);
        return o.str();
    }, py::arg("dataset"), py::arg("k") = 5, py::arg("epochs") = 100, py::arg("config") = nn::TrainConfig{},
       py::arg("seed") = 0, py::arg("threads") = 1, "Runs the five-architecture study; returns the CvReport CSV");

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "shapesense");
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr)");
}
