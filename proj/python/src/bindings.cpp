#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "divprune/errors.hpp"
#include "divprune/selection.hpp"
#include "divprune/version.hpp"

namespace py = pybind11;
using namespace divprune;

namespace {

using C64 = py::array_t<double, py::array::c_style>;

/// Row-major f64 input is used in place; anything else gets one converting copy.
C64 as_c64(const py::array& array) {
    if (array.ndim() != 2) throw Error(ErrorKind::DimensionError, "expected a 2-D array, got " + std::to_string(array.ndim()) + "-D");
    const char kind = array.dtype().kind();
    if (kind != 'f' || (array.itemsize() != 4 && array.itemsize() != 8)) {
        throw py::type_error("expected a float32 or float64 array, got dtype " + py::str(array.dtype()).cast<std::string>());
    }
    if (C64::check_(array)) return py::reinterpret_borrow<C64>(array);
    return C64::ensure(array);
}

/// Integers (Python or NumPy) are token counts, floats are fractions.
Budget to_budget(const py::handle& keep) {
    if (py::isinstance<py::bool_>(keep)) throw py::type_error("keep must be an int or a float, not bool");
    if (!PyFloat_Check(keep.ptr()) && PyIndex_Check(keep.ptr())) {
        const auto count = py::int_(py::reinterpret_borrow<py::object>(keep)).cast<long long>();
        if (count <= 0) throw Error(ErrorKind::InvalidBudget, "keep count must be positive, got " + std::to_string(count));
        return Budget::count(static_cast<std::size_t>(count));
    }
    if (PyFloat_Check(keep.ptr())) return Budget::fraction(keep.cast<double>());
    throw py::type_error("keep must be an int or a float");
}

py::tuple run(const py::array& array, const py::object& keep, const std::string& metric,
              const std::string& strategy, std::optional<std::uint64_t> seed, const std::string& zero_policy,
              bool insertion_order) {
    const C64 data = as_c64(array);
    PruneConfig cfg;
    cfg.metric = parse_metric(metric);
    cfg.strategy = parse_strategy(strategy);
    cfg.zero_policy = parse_zero_policy(zero_policy);
    cfg.seed = seed.value_or(0);
    cfg.budget = to_budget(keep);
    const EmbeddingView view{static_cast<std::size_t>(data.shape(0)), static_cast<std::size_t>(data.shape(1)),
                             std::span<const double>(data.data(), static_cast<std::size_t>(data.size()))};

    SelectionResult result;
    {
        py::gil_scoped_release release;
        result = select_tokens(view, cfg);
    }
    const auto indices = insertion_order ? result.selected : result.sorted_indices();
    py::array_t<std::int64_t> idx(static_cast<py::ssize_t>(indices.size()));
    auto out = idx.mutable_unchecked<1>();
    for (std::size_t i = 0; i < indices.size(); ++i) out(static_cast<py::ssize_t>(i)) = static_cast<std::int64_t>(indices[i]);
    py::array_t<double> trace(static_cast<py::ssize_t>(result.trace.size()), result.trace.data());
    return py::make_tuple(idx, result.objective, trace);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Diversity-based visual token pruning on in-memory arrays";
    m.attr("__version__") = std::string(kVersion);

    py::exception<Error>(m, "DivPruneError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const py::object type = py::module_::import("divprune._core").attr("DivPruneError");
            py::object exc = type(std::string(e.what()));
            exc.attr("kind") = std::string(e.name());
            exc.attr("detail") = e.message();
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    m.def(
        "prune",
        [](const py::array& array, const py::object& keep, const std::string& metric,
           const std::string& strategy, std::optional<std::uint64_t> seed, const std::string& zero_policy) {
            return run(array, keep, metric, strategy, seed, zero_policy, false);
        },
        py::arg("array"), py::arg("keep") = kDefaultKeepFraction, py::arg("metric") = "cosine",
        py::arg("strategy") = "greedy", py::arg("seed") = py::none(), py::arg("zero_policy") = "error",
        R"(Select tokens to keep.

keep is a fraction in (0, 1] when a float, a token count when an int.
Returns (indices ascending, objective, trace).)");

    m.def(
        "greedy_select",
        [](const py::array& array, const py::object& keep, const std::string& metric,
           const std::string& zero_policy) {
            return run(array, keep, metric, "greedy", std::nullopt, zero_policy, true);
        },
        py::arg("array"), py::arg("keep") = kDefaultKeepFraction, py::arg("metric") = "cosine",
        py::arg("zero_policy") = "error",
        "Greedy max-min selection. Returns (indices in insertion order, objective, trace).");
}
