#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "srtrl/engines.hpp"
#include "srtrl/errors.hpp"
#include "srtrl/harness.hpp"
#include "srtrl/metrics.hpp"
#include "srtrl/rnn.hpp"
#include "srtrl/selection.hpp"
#include "srtrl/tasks.hpp"
#include "srtrl/tensor_core.hpp"

namespace py = pybind11;
using namespace srtrl;
using nlohmann::json;

namespace {

// Python objects cross the boundary as JSON text; configs are small.
json to_json(const py::object& obj) {
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return json::parse(text);
}

py::object from_json(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict gradient_dict(const ParamGradient& g) {
    py::dict d;
    d["recurrent"] = g.recurrent;
    d["w_out"] = g.w_out;
    d["b_out"] = g.b_out;
    d["flat"] = g.flat();
    return d;
}

py::dict task_dict(const StreamTask& task) {
    const Index T = task.length();
    RowMat inputs(T, task.input_dim);
    RowMat targets = RowMat::Constant(T, task.output_dim, kNaN);
    std::vector<int> classes(static_cast<std::size_t>(T));
    std::vector<bool> active(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
        const auto& s = task.steps[static_cast<std::size_t>(t)];
        inputs.row(t) = s.x.transpose();
        if (s.target.size() == task.output_dim) targets.row(t) = s.target.transpose();
        classes[static_cast<std::size_t>(t)] = s.target_class;
        active[static_cast<std::size_t>(t)] = s.loss_active;
    }
    py::dict d;
    d["name"] = task.name;
    d["inputs"] = inputs;
    d["targets"] = targets;
    d["target_class"] = classes;
    d["loss_active"] = active;
    d["shift_points"] = task.shift_points;
    d["loss"] = task.loss == LossKind::mse ? "mse" : "cross_entropy";
    d["metadata"] = from_json(task.metadata);
    return d;
}

py::dict report_row_dict(const ReportRow& r) {
    py::dict d;
    d["task"] = r.task;
    d["engine"] = r.engine;
    d["k"] = r.k;
    d["seeds"] = r.seeds;
    d["diverged"] = r.diverged;
    d["mse_mean"] = r.mse_mean;
    d["mse_sd"] = r.mse_sd;
    d["recovery_mean"] = r.recovery_mean;
    d["recovery_sd"] = r.recovery_sd;
    d["bci_mean"] = r.bci_mean;
    d["bci_sd"] = r.bci_sd;
    d["acc_mean"] = r.acc_mean;
    d["acc_sd"] = r.acc_sd;
    d["seed_ids"] = r.seed_ids;
    d["per_seed_mse"] = r.per_seed_mse;
    d["per_seed_recovery"] = r.per_seed_recovery;
    return d;
}

class PyEngine {
public:
    PyEngine(const std::string& variant, Index n, Index m, Index k, const std::string& strategy, double lambda,
             Index window, std::uint64_t seed)
        : engine_(make_spec(variant, k, strategy, lambda, window), n, m, make_rng(seed, RngStream::mask),
                  make_rng(seed, RngStream::uoro)) {}

    void observe(const RnnParams& p, const Vec& h_prev, const Vec& x, const Vec& h, Step t) {
        engine_.observe(p, h_prev, x, h, t);
    }
    py::dict gradient(const RnnParams& p, const Vec& dl_dy, const Vec& h) const {
        return gradient_dict(engine_.gradient(p, dl_dy, h));
    }
    std::optional<RowMat> sensitivity() const {
        if (const auto* s = engine_.sensitivity()) return *s;
        return std::nullopt;
    }
    std::string label() const { return engine_.spec().label(); }
    void reset() { engine_.reset(); }

private:
    static EngineSpec make_spec(const std::string& variant, Index k, const std::string& strategy, double lambda,
                                Index window) {
        EngineSpec s;
        s.kind = parse_engine_kind(variant);
        s.k = k;
        s.strategy = parse_strategy(strategy);
        s.lambda = variant == "traces-decay" && lambda == 0.0 ? 0.9 : lambda;
        s.window = window;
        return s;
    }
    RnnGradientEngine engine_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Online recurrent learning: RTRL, sparse RTRL, traces, UORO and truncated BPTT";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IngestionError>(m, "IngestionError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<UndefinedGapError>(m, "UndefinedGapError", PyExc_ValueError);

    py::class_<RnnParams>(m, "RnnParams")
        .def_static(
            "init", [](Index n, Index mm, Index o, std::uint64_t seed) {
                Rng rng = make_rng(seed, RngStream::init);
                return RnnParams::init(n, mm, o, rng);
            },
            py::arg("n"), py::arg("m"), py::arg("o"), py::arg("seed") = 42)
        .def_static("zeros", &RnnParams::zeros, py::arg("n"), py::arg("m"), py::arg("o"))
        .def_readwrite("w_hh", &RnnParams::w_hh)
        .def_readwrite("w_ih", &RnnParams::w_ih)
        .def_readwrite("b_h", &RnnParams::b_h)
        .def_readwrite("w_out", &RnnParams::w_out)
        .def_readwrite("b_out", &RnnParams::b_out)
        .def_property_readonly("n", &RnnParams::n)
        .def_property_readonly("m", &RnnParams::m)
        .def_property_readonly("o", &RnnParams::o)
        .def("flat", &RnnParams::flat)
        .def("set_flat", &RnnParams::set_flat)
        .def("forward", [](const RnnParams& p, const Vec& h_prev, const Vec& x) {
            const auto f = rnn_forward(p, h_prev, x);
            return py::make_tuple(f.h, f.y);
        });

    py::class_<ImmediateDerivs>(m, "ImmediateDerivs")
        .def_readonly("d", &ImmediateDerivs::d)
        .def_readonly("h_prev", &ImmediateDerivs::h_prev)
        .def_readonly("x", &ImmediateDerivs::x)
        .def("expand_b", &ImmediateDerivs::expand_b);
    m.def("immediate_derivs", &immediate_derivs, py::arg("h"), py::arg("h_prev"), py::arg("x"));

    py::class_<PropagationMask>(m, "PropagationMask")
        .def(py::init<Index, std::vector<std::vector<Index>>>(), py::arg("n"), py::arg("support"))
        .def_static("all_ones", &PropagationMask::all_ones)
        .def_static("all_zeros", &PropagationMask::all_zeros)
        .def_property_readonly("n", &PropagationMask::n)
        .def_property_readonly("k", &PropagationMask::k)
        .def("matrix", &PropagationMask::matrix)
        .def("rows", &PropagationMask::rows);
    m.def(
        "select_mask",
        [](const std::string& strategy, Index k, const Mat& w_hh, std::uint64_t seed) {
            MaskSelector sel(parse_strategy(strategy), k, w_hh.rows(), make_rng(seed, RngStream::mask));
            const Vec ones = Vec::Ones(w_hh.rows());
            sel.update(0, w_hh, &ones);
            return sel.mask();
        },
        py::arg("strategy"), py::arg("k"), py::arg("w_hh"), py::arg("seed") = 42,
        "Mask chosen by a selection strategy (dynamic uses unit row norms).");

    py::class_<JacobianState>(m, "JacobianState")
        .def(py::init<Index, Index>(), py::arg("n"), py::arg("m"))
        .def_property_readonly("n", &JacobianState::n)
        .def_property_readonly("m", &JacobianState::m)
        .def_property(
            "data", [](const JacobianState& j) { return RowMat(j.data()); },
            [](JacobianState& j, const RowMat& v) {
                if (v.rows() != j.data().rows() || v.cols() != j.data().cols())
                    throw ContractViolation("JacobianState.data: shape mismatch");
                j.data() = v;
            })
        .def_property_readonly("whh", [](const JacobianState& j) { return RowMat(j.whh()); })
        .def_property_readonly("wih", [](const JacobianState& j) { return RowMat(j.wih()); })
        .def_property_readonly("bh", [](const JacobianState& j) { return RowMat(j.bh()); });

    m.def("masked_contract", [](const Mat& w, const PropagationMask& mask, const RowMat& j) {
        return masked_contract(w, mask, j);
    });
    m.def(
        "rtrl_step",
        [](const JacobianState& prev, const Mat& w_hh, const PropagationMask& mask, const ImmediateDerivs& b) {
            return rtrl_step(prev, w_hh, mask, b);
        },
        py::arg("prev"), py::arg("w_hh"), py::arg("mask"), py::arg("b"));
    m.def("traces_step", &traces_step, py::arg("prev"), py::arg("b"), py::arg("lam"));
    m.def(
        "write_jacobian",
        [](const JacobianState& j, Step step) {
            std::ostringstream os;
            write_jacobian_snapshot(os, j, step);
            return py::bytes(os.str());
        },
        py::arg("jacobian"), py::arg("step") = 0, "JAC1 bytes");
    m.def(
        "read_jacobian",
        [](const py::bytes& data) {
            std::istringstream is{static_cast<std::string>(data)};
            Step step = 0;
            auto j = read_jacobian_snapshot(is, &step);
            return py::make_tuple(j, step);
        },
        py::arg("data"));

    py::class_<PyEngine>(m, "Engine")
        .def(py::init<const std::string&, Index, Index, Index, const std::string&, double, Index, std::uint64_t>(),
             py::arg("variant"), py::arg("n"), py::arg("m"), py::arg("k") = 0, py::arg("strategy") = "ring",
             py::arg("lam") = 0.0, py::arg("window") = 1, py::arg("seed") = 42)
        .def("observe", &PyEngine::observe, py::arg("params"), py::arg("h_prev"), py::arg("x"), py::arg("h"),
             py::arg("t"))
        .def("gradient", &PyEngine::gradient, py::arg("params"), py::arg("dl_dy"), py::arg("h"))
        .def("sensitivity", &PyEngine::sensitivity)
        .def("reset", &PyEngine::reset)
        .def_property_readonly("label", &PyEngine::label);

    m.def("gap_recovery", &gap_recovery, py::arg("mse_0"), py::arg("mse_k"), py::arg("mse_n"));
    m.def("bci_recovery", &bci_recovery, py::arg("mse_frozen_b"), py::arg("mse_method_b"), py::arg("mse_frozen_a"));
    m.def("vector_cosine", [](const Vec& a, const Vec& b) { return vector_cosine(a, b).cosine; });
    m.def("spectral_analysis", [](const RowMat& block) {
        const auto s = spectral_analysis(block);
        py::dict d;
        d["singular_values"] = s.singular_values;
        d["r95"] = s.r95;
        d["cond"] = s.cond;
        d["ill_conditioned"] = s.ill_conditioned;
        return d;
    });
    m.def("seed_dispersion", [](const std::vector<double>& v) {
        const auto d = seed_dispersion(v);
        py::dict out;
        out["mean"] = d.mean;
        out["sd"] = d.sd;
        out["cv"] = d.cv;
        return out;
    });

    m.def(
        "make_task", [](const py::object& spec, std::uint64_t seed) {
            const auto cfg = parse_config(json{{"task", to_json(spec)}, {"engines", json::array({{{"variant", "traces"}}})}});
            return task_dict(make_task(cfg.task, seed));
        },
        py::arg("spec"), py::arg("seed") = 42, "Materialise a task stream from a task spec dict.");
    m.def(
        "validate_config", [](const py::object& cfg) { return from_json(parse_config(to_json(cfg)).to_json()); },
        py::arg("config"), "Validate a config dict and return it with defaults filled in.");
    m.def(
        "run_experiment",
        [](const py::object& config, std::optional<std::filesystem::path> output_dir, std::optional<unsigned> jobs,
           bool write_outputs) {
            auto cfg = parse_config(to_json(config));
            if (output_dir) cfg.output_dir = *output_dir;
            std::vector<RunRecord> records;
            {
                py::gil_scoped_release release;
                records = run_experiment(cfg, RunOptions{jobs, write_outputs});
            }
            py::list out;
            for (const auto& r : records) out.append(from_json(summary_json(r, cfg.diagnostics.window)));
            return out;
        },
        py::arg("config"), py::arg("output_dir") = py::none(), py::arg("jobs") = py::none(),
        py::arg("write_outputs") = true, "Run every (engine, seed) cell; returns the run summaries.");
    m.def(
        "build_report",
        [](const std::filesystem::path& dir, bool write) {
            const auto rows = build_report(dir);
            if (write) write_report(dir, rows);
            py::list out;
            for (const auto& r : rows) out.append(report_row_dict(r));
            return out;
        },
        py::arg("directory"), py::arg("write") = true);
    m.def("format_report", [](const std::filesystem::path& dir) { return format_report(build_report(dir)); });
}
