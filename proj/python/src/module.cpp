#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rugtrace/app.hpp"
#include "rugtrace/cli.hpp"
#include "rugtrace/errors.hpp"
#include "rugtrace/keccak.hpp"

namespace py = pybind11;
using namespace rugtrace;

namespace {

/// One token analysed against a fixture bundle; trace and summary are built
/// on first use.
class Investigation {
public:
    Investigation(const std::string& fixtures, const std::string& token, const std::string& overrides) {
        py::gil_scoped_release unlocked;
        app::apply_overrides(config_, exporting::Json::parse(overrides.empty() ? "{}" : overrides));
        app::SourceSpec spec;
        spec.fixtures = fixtures;
        token_ = Address::parse(token);
        session_ = app::Session::open(spec, token_);
        analysis_ = app::analyze(*session_, token_, config_);
    }

    std::string timeline() const { return app::timeline_document(analysis_); }
    std::string verdict() const { return app::verdict_document(analysis_); }
    std::string attribution() const { return app::attribution_document(analysis_); }

    std::string trace() {
        traced();
        return app::trace_document(*graph_, *summary_);
    }

    std::string report(const std::string& format) {
        traced();
        py::gil_scoped_release unlocked;
        return app::report_document(*session_, analysis_, *graph_, *summary_, config_, format);
    }

    std::vector<std::string> victims() const {
        std::vector<std::string> out;
        for (const auto& v : analysis_.victims.victims) out.push_back(v.hex());
        return out;
    }

private:
    void traced() {
        if (graph_) return;
        py::gil_scoped_release unlocked;
        graph_ = app::trace(*session_, analysis_, config_);
        summary_ = app::summarize(*session_, analysis_, *graph_, config_);
    }

    pipeline::Config config_;
    Address token_;
    std::unique_ptr<app::Session> session_;
    pipeline::Analysis analysis_;
    std::optional<trace::TraceGraph> graph_;
    std::optional<trace::LaunderingSummary> summary_;
};

Amount to_amount(const py::int_& v) { return Amount(py::str(v).cast<std::string>()); }
py::int_ to_int(const Amount& a) { return py::int_(py::reinterpret_steal<py::object>(PyLong_FromString(to_decimal(a).c_str(), nullptr, 10))); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = RUGTRACE_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<LoadError>(m, "LoadError", base);
    py::register_exception<IntegrityError>(m, "IntegrityError", base);
    py::register_exception<MalformedEventError>(m, "MalformedEventError", base);
    py::register_exception<TransportError>(m, "TransportError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<NotFoundError>(m, "NotFoundError", base);

    py::class_<Investigation>(m, "Investigation")
        .def(py::init<const std::string&, const std::string&, const std::string&>(), py::arg("fixtures"),
             py::arg("token"), py::arg("overrides") = "{}")
        .def("timeline", &Investigation::timeline)
        .def("verdict", &Investigation::verdict)
        .def("attribution", &Investigation::attribution)
        .def("trace", &Investigation::trace)
        .def("report", &Investigation::report, py::arg("format") = "json")
        .def("victims", &Investigation::victims);

    m.def("keccak256", [](py::bytes data) {
        const std::string s = data;
        return keccak256(std::string_view(s)).hex();
    });

    m.def(
        "profit_bounds",
        [](const py::int_& revenue, const py::int_& spend, const py::int_& delta_liquidity) {
            const auto p = frauddetect::profit_bounds(to_amount(revenue), to_amount(spend), to_amount(delta_liquidity));
            return py::make_tuple(to_int(p.p_min), to_int(p.p_max));
        },
        py::arg("revenue"), py::arg("spend"), py::arg("delta_liquidity"));

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release unlocked;
            code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    });
}
