#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "otfs_scma/detect.hpp"
#include "otfs_scma/oracle.hpp"
#include "otfs_scma/sim.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace otfs;

namespace {

using GridArray = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DelayDopplerGrid to_grid(const GridArray& a) {
    const GridSpec spec{static_cast<int>(a.rows()), static_cast<int>(a.cols())};
    return DelayDopplerGrid(spec, std::vector<cplx>(a.data(), a.data() + a.size()));
}

GridArray from_grid(const DelayDopplerGrid& g) {
    GridArray a(g.spec().N, g.spec().M);
    std::copy(g.cells().begin(), g.cells().end(), a.data());
    return a;
}

py::dict record_to_dict(const BerRecord& r) {
    py::dict d;
    d["snr_db"] = r.snr_db;
    d["frames"] = r.frames_run;
    d["bit_errors"] = r.bit_errors;
    d["total_bits"] = r.total_bits;
    d["ber"] = r.ber;
    d["per_user_ber"] = r.per_user_ber;
    d["mean_iters"] = r.mean_mpa_iterations;
    return d;
}

SimConfig config_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(ValidationError::Kind::InvalidConfig, e.what());
    }
    return config_from_json(doc).config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OTFS-SCMA link-level simulator";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ComplexityError>(m, "ComplexityError", base.ptr());

    m.def("isfft", [](const GridArray& x) { return from_grid(isfft(to_grid(x))); }, "x"_a,
          "Delay-Doppler (N x M) to time-frequency.");
    m.def("sfft", [](const GridArray& X) { return from_grid(sfft(to_grid(X))); }, "X"_a,
          "Time-frequency (N x M) to delay-Doppler.");

    m.def(
        "coefficient_matrix",
        [](int P, int N, int M, std::uint64_t seed, bool fractional, int neighbor_span) {
            const GridSpec spec{N, M};
            Rng rng = derive_stream(seed, 0, 0);
            const auto ch = sample_channel(P, spec, {fractional, neighbor_span}, rng);
            py::list paths;
            for (const auto& p : ch.paths) {
                paths.append(py::dict("gain"_a = p.gain, "delay_tap"_a = p.delay_tap, "doppler_tap"_a = p.doppler_tap,
                                      "doppler_frac"_a = p.doppler_frac));
            }
            return py::make_tuple(CMatrix(build_coefficient_matrix(ch, spec).entries), paths);
        },
        "P"_a, "N"_a, "M"_a, "seed"_a = 1, "fractional"_a = false, "neighbor_span"_a = 2,
        "Samples a channel and returns (dense MN x MN matrix, list of paths).");

    m.def("lmmse_detect", py::overload_cast<const CMatrix&, const CVector&, double>(&lmmse_detect), "H"_a, "y"_a,
          "N0"_a);

    m.def(
        "codebook_summary",
        [](const std::string& path) {
            const auto set = path.empty() ? default_codebooks() : load_codebooks(path);
            return py::dict("J"_a = set.users(), "K"_a = set.resources(), "A"_a = set.alphabet_size(),
                            "dv"_a = set.dv(), "df"_a = set.df(), "regular"_a = set.regular(),
                            "overloading"_a = set.overloading());
        },
        "path"_a = "", "Summary of a codebook file, or of the built-in set when path is empty.");

    m.def(
        "factor_matrix",
        [](bool extended) {
            const auto F = extended ? extended_factor_matrix() : reference_factor_matrix();
            std::vector<std::vector<int>> rows(static_cast<std::size_t>(F.resources()));
            for (int k = 0; k < F.resources(); ++k) {
                for (int j = 0; j < F.users(); ++j) rows[static_cast<std::size_t>(k)].push_back(F(k, j));
            }
            return rows;
        },
        "extended"_a = false);

    m.def(
        "run_ber",
        [](const std::string& config_json) {
            const SimConfig cfg = config_from_string(config_json);
            std::vector<BerRecord> records;
            {
                py::gil_scoped_release release;
                records = run_ber(cfg);
            }
            py::list out;
            for (const auto& r : records) out.append(record_to_dict(r));
            return out;
        },
        "config_json"_a, "Runs a Monte Carlo BER sweep described by a JSON config string.");

    m.def(
        "run_csv",
        [](const std::string& config_json) {
            const SimConfig cfg = config_from_string(config_json);
            py::gil_scoped_release release;
            return csv_string(run_ber(cfg));
        },
        "config_json"_a);

    m.def("noise_from_snr", py::overload_cast<double, double, double>(&noise_from_snr), "snr_db"_a,
          "symbol_energy"_a, "bits_per_symbol"_a);
    m.def("parse_snr_range", &parse_snr_range, "spec"_a);
}
