#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "partfn/cluster.hpp"
#include "partfn/correlations.hpp"
#include "partfn/extrapolation.hpp"
#include "partfn/hamiltonian.hpp"
#include "partfn/moments.hpp"
#include "partfn/oracle.hpp"
#include "partfn/series.hpp"
#include "partfn/xxz.hpp"

namespace py = pybind11;
using namespace partfn;

PYBIND11_MODULE(_partfn, m) {
    m.doc() = "Certified Taylor estimates of quantum partition functions";
    m.attr("__version__") = "0.1.0";
    m.attr("UNREACHABLE") = kUnreachable;

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<CapError>(m, "CapError", PyExc_RuntimeError);
    py::register_exception<NoCertificateError>(m, "NoCertificateError", PyExc_RuntimeError);

    py::class_<PowerSeries>(m, "PowerSeries")
        .def(py::init<std::vector<Complex>, std::string>(), py::arg("coeffs"),
             py::arg("var") = "beta")
        .def_readwrite("coeffs", &PowerSeries::coeffs)
        .def_readwrite("var", &PowerSeries::var)
        .def_property_readonly("order", &PowerSeries::order)
        .def("__call__", [](const PowerSeries& s, Complex x) { return series_eval(s, x); })
        .def("__len__", [](const PowerSeries& s) { return s.coeffs.size(); });

    py::class_<Site>(m, "Site")
        .def(py::init([](int index, std::optional<std::vector<int>> coords) {
                 return Site{index, std::move(coords)};
             }),
             py::arg("index"), py::arg("coords") = py::none())
        .def_readwrite("index", &Site::index)
        .def_readwrite("coords", &Site::coords);

    py::class_<LocalTerm>(m, "LocalTerm")
        .def(py::init([](std::vector<int> support, Matrix matrix) {
                 return LocalTerm{std::move(support), std::move(matrix)};
             }),
             py::arg("support"), py::arg("matrix"))
        .def_readwrite("support", &LocalTerm::support)
        .def_readwrite("matrix", &LocalTerm::matrix);

    py::class_<GeometryParams>(m, "GeometryParams")
        .def_readonly("kappa", &GeometryParams::kappa)
        .def_readonly("R", &GeometryParams::R)
        .def_readonly("g", &GeometryParams::g)
        .def_readonly("h", &GeometryParams::h)
        .def_readonly("m", &GeometryParams::m);

    py::class_<LocalHamiltonian>(m, "LocalHamiltonian")
        .def(py::init<int, int, std::vector<Site>, std::vector<LocalTerm>>(), py::arg("n"),
             py::arg("d"), py::arg("sites"), py::arg("terms"))
        .def_property_readonly("n", &LocalHamiltonian::n)
        .def_property_readonly("d", &LocalHamiltonian::d)
        .def_property_readonly("sites", &LocalHamiltonian::sites)
        .def_property_readonly("terms", &LocalHamiltonian::terms)
        .def("has_coords", &LocalHamiltonian::has_coords)
        .def("is_real", &LocalHamiltonian::is_real)
        .def("serialize", &LocalHamiltonian::serialize)
        .def_static("parse", &LocalHamiltonian::parse, py::arg("text"))
        .def_static("parse_file", &LocalHamiltonian::parse_file, py::arg("path"));

    m.def("geometry_params", &geometry_params, py::arg("H"));
    m.def("restricted", &restricted, py::arg("H"), py::arg("region"), py::arg("reindex") = true);
    m.def("random_instance", &random_instance, py::arg("kind"), py::arg("n"), py::arg("lo"),
          py::arg("hi"), py::arg("seed"));
    m.def("connection_distance", &connection_distance, py::arg("H"), py::arg("A"), py::arg("B"));
    m.def("pauli_string_matrix", &pauli_string_matrix, py::arg("s"));
    m.def("embed_operator", &embed_operator, py::arg("op"), py::arg("support"), py::arg("target"),
          py::arg("d"));
    m.def("dense_hamiltonian", &dense_hamiltonian, py::arg("H"), py::arg("dim_cap") = 1 << 14);
    m.def("spectral_norm", &spectral_norm, py::arg("M"));
    m.def("instance_hash", &instance_hash, py::arg("H"));

    py::class_<MomentOptions>(m, "MomentOptions")
        .def(py::init<>())
        .def_readwrite("k_max", &MomentOptions::k_max)
        .def_readwrite("matrix_cap", &MomentOptions::matrix_cap)
        .def_readwrite("region_budget", &MomentOptions::region_budget)
        .def_readwrite("enum_budget", &MomentOptions::enum_budget)
        .def_readwrite("threads", &MomentOptions::threads);

    m.def("resolve_threads", &resolve_threads, py::arg("requested"));
    m.def("trace_moment", &trace_moment, py::arg("H"), py::arg("k"),
          py::arg("opts") = MomentOptions{});
    m.def("z_series", &z_series, py::arg("H"), py::arg("K"), py::arg("opts") = MomentOptions{});
    m.def("weighted_trace_moment", &weighted_trace_moment, py::arg("H"), py::arg("k"),
          py::arg("obs"), py::arg("opts") = MomentOptions{});

    py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
        .def_readonly("energies", &SpectralDecomposition::energies)
        .def_readonly("n", &SpectralDecomposition::n)
        .def_readonly("d", &SpectralDecomposition::d)
        .def_property_readonly("dim", &SpectralDecomposition::dim)
        .def("has_basis", &SpectralDecomposition::has_basis)
        .def("real_basis", &SpectralDecomposition::real_basis);

    m.def("spectrum", &spectrum, py::arg("H"), py::arg("keep_basis") = true,
          py::arg("dim_cap") = 4096);
    m.def("partition_function", &partition_function, py::arg("S"), py::arg("beta"));
    m.def("log_abs_partition", &log_abs_partition, py::arg("S"), py::arg("beta"));
    m.def("log_partition_real", &log_partition_real, py::arg("S"), py::arg("beta"));
    m.def("free_energy", &free_energy, py::arg("S"), py::arg("beta"));
    m.def("gibbs_expectation", &gibbs_expectation, py::arg("S"), py::arg("beta"), py::arg("obs"));
    m.def("gibbs_covariance", &gibbs_covariance, py::arg("S"), py::arg("beta"), py::arg("O1"),
          py::arg("O2"));

    py::class_<FisherZero>(m, "FisherZero")
        .def_readonly("location", &FisherZero::location)
        .def_readonly("residual", &FisherZero::residual)
        .def_readonly("multiplicity_hint", &FisherZero::multiplicity_hint);

    m.def(
        "fisher_zero_scan",
        [](const SpectralDecomposition& S, double re_lo, double re_hi, double im_lo, double im_hi,
           int grid_re, int grid_im, double tol, bool return_grid) -> py::object {
            if (!return_grid) {
                auto zeros =
                    fisher_zero_scan(S, re_lo, re_hi, im_lo, im_hi, grid_re, grid_im, tol);
                return py::cast(zeros);
            }
            std::vector<std::array<double, 3>> grid;
            auto zeros =
                fisher_zero_scan(S, re_lo, re_hi, im_lo, im_hi, grid_re, grid_im, tol, &grid);
            return py::make_tuple(zeros, grid);
        },
        py::arg("S"), py::arg("re_lo"), py::arg("re_hi"), py::arg("im_lo"), py::arg("im_hi"),
        py::arg("grid_re"), py::arg("grid_im"), py::arg("tol") = 1e-10,
        py::arg("return_grid") = false);

    m.def("beta0", &beta0, py::arg("gp"));
    m.def("expansion_radius", &expansion_radius, py::arg("gp"));
    m.def("log_abs_z_bound", &log_abs_z_bound, py::arg("gp"), py::arg("abs_beta"), py::arg("n"),
          py::arg("d"));

    py::class_<ConnectedSet>(m, "ConnectedSet")
        .def_readonly("members", &ConnectedSet::members)
        .def_readonly("root", &ConnectedSet::root)
        .def_property_readonly("size", &ConnectedSet::size)
        .def("support", &ConnectedSet::support);

    m.def("enumerate_connected_sets", &enumerate_connected_sets, py::arg("H"), py::arg("x0"),
          py::arg("max_size"), py::arg("budget") = std::size_t(1'000'000));

    py::class_<ClusterWeight>(m, "ClusterWeight")
        .def_readonly("value", &ClusterWeight::value)
        .def_readonly("tail_bound", &ClusterWeight::tail_bound)
        .def_readonly("p_max", &ClusterWeight::p_max);

    m.def("cluster_weight", &cluster_weight, py::arg("H"), py::arg("cluster"), py::arg("beta"),
          py::arg("p_max"), py::arg("opts") = MomentOptions{});

    py::class_<ExpansionReport>(m, "ExpansionReport")
        .def_readonly("beta0", &ExpansionReport::beta0)
        .def_readonly("radius", &ExpansionReport::radius)
        .def_readonly("z_full", &ExpansionReport::z_full)
        .def_readonly("z_reduced", &ExpansionReport::z_reduced)
        .def_readonly("reconstruction", &ExpansionReport::reconstruction)
        .def_readonly("counts", &ExpansionReport::counts)
        .def_readonly("residual", &ExpansionReport::residual)
        .def_readonly("tail", &ExpansionReport::tail);

    m.def("expansion_residual", &expansion_residual, py::arg("H"), py::arg("x0"), py::arg("beta"),
          py::arg("max_size"), py::arg("p_max"), py::arg("opts") = MomentOptions{});

    py::class_<RatioCheck>(m, "RatioCheck")
        .def_readonly("site", &RatioCheck::site)
        .def_readonly("log_ratio_abs", &RatioCheck::log_ratio_abs)
        .def_readonly("bound", &RatioCheck::bound)
        .def_readonly("ok", &RatioCheck::ok);

    py::class_<RatioReport>(m, "RatioReport")
        .def_readonly("beta0", &RatioReport::beta0)
        .def_readonly("within_domain", &RatioReport::within_domain)
        .def_readonly("all_ok", &RatioReport::all_ok)
        .def_readonly("checks", &RatioReport::checks);

    m.def("ratio_bound_check", &ratio_bound_check, py::arg("H"), py::arg("beta"));

    py::enum_<BoundKind>(m, "BoundKind")
        .value("bounded", BoundKind::bounded)
        .value("polynomial", BoundKind::polynomial);

    m.def("truncation_bound", &truncation_bound, py::arg("kind"), py::arg("size"), py::arg("b"),
          py::arg("K"));
    m.def("choose_K", &choose_K, py::arg("M"), py::arg("b"), py::arg("eps"),
          py::arg("k_cap") = 512);

    py::class_<ZeroFreeDisk>(m, "ZeroFreeDisk")
        .def(py::init([](double b, double M) { return ZeroFreeDisk{b, M}; }), py::arg("b"),
             py::arg("M"))
        .def_readwrite("b", &ZeroFreeDisk::b)
        .def_readwrite("M", &ZeroFreeDisk::M);

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("beta", &Estimate::beta)
        .def_readonly("K", &Estimate::K)
        .def_readonly("certified_error", &Estimate::certified_error)
        .def_readonly("b", &Estimate::b)
        .def_readonly("M", &Estimate::M)
        .def_readonly("series", &Estimate::series);

    m.def("estimate_log_partition", &estimate_log_partition, py::arg("H"), py::arg("beta"),
          py::arg("eps"), py::arg("disk") = py::none(), py::arg("opts") = MomentOptions{});

    py::class_<RegionSpec> region(m, "RegionSpec");
    py::enum_<RegionSpec::Kind>(region, "Kind")
        .value("disk", RegionSpec::Kind::disk)
        .value("rect", RegionSpec::Kind::rect);
    region
        .def(py::init([](RegionSpec::Kind kind, double beta, double delta, double radius) {
                 return RegionSpec{kind, beta, delta, radius};
             }),
             py::arg("kind"), py::arg("beta"), py::arg("delta") = 0.0, py::arg("radius") = 0.0)
        .def_readwrite("kind", &RegionSpec::kind)
        .def_readwrite("beta", &RegionSpec::beta)
        .def_readwrite("delta", &RegionSpec::delta)
        .def_readwrite("radius", &RegionSpec::radius);

    py::class_<PolyMap>(m, "PolyMap")
        .def_readonly("coeffs", &PolyMap::coeffs)
        .def_readonly("target_beta", &PolyMap::target_beta)
        .def_readonly("max_distance", &PolyMap::max_distance)
        .def_readonly("verified", &PolyMap::verified)
        .def_readonly("samples", &PolyMap::samples);

    m.def("map_disk_to_region", &map_disk_to_region, py::arg("region"),
          py::arg("degree_budget") = 4000);

    py::class_<CovarianceSeries>(m, "CovarianceSeries")
        .def_readonly("series", &CovarianceSeries::series)
        .def_readonly("L_predicted", &CovarianceSeries::L_predicted)
        .def_readonly("vanishing_order", &CovarianceSeries::vanishing_order);

    m.def("covariance_series", &covariance_series, py::arg("H"), py::arg("O1"), py::arg("O2"),
          py::arg("K"), py::arg("opts") = MomentOptions{});
    m.def("vanishing_order", &vanishing_order, py::arg("s"), py::arg("tol") = 1e-10);

    py::class_<DecayProfile>(m, "DecayProfile")
        .def_readonly("distances", &DecayProfile::distances)
        .def_readonly("covariances", &DecayProfile::covariances)
        .def_readonly("fitted", &DecayProfile::fitted)
        .def_readonly("xi", &DecayProfile::xi)
        .def_readonly("c", &DecayProfile::c)
        .def_readonly("r_squared", &DecayProfile::r_squared);

    m.def("decay_profile", &decay_profile, py::arg("H"), py::arg("beta"), py::arg("anchor"),
          py::arg("probes"));

    py::class_<XXZEdge>(m, "XXZEdge")
        .def(py::init([](int u, int v, double j, double jzz) {
                 return XXZEdge{u, v, j, jzz};
             }),
             py::arg("u"), py::arg("v"), py::arg("j"), py::arg("jzz"))
        .def_readwrite("u", &XXZEdge::u)
        .def_readwrite("v", &XXZEdge::v)
        .def_readwrite("j", &XXZEdge::j)
        .def_readwrite("jzz", &XXZEdge::jzz);

    py::class_<XXZInstance>(m, "XXZInstance")
        .def(py::init([](int n, std::vector<XXZEdge> edges) {
                 return XXZInstance{n, std::move(edges)};
             }),
             py::arg("n"), py::arg("edges"))
        .def_readwrite("n", &XXZInstance::n)
        .def_readwrite("edges", &XXZInstance::edges)
        .def("serialize", &XXZInstance::serialize)
        .def_static("parse", &XXZInstance::parse, py::arg("text"))
        .def_static("parse_file", &XXZInstance::parse_file, py::arg("path"));

    m.def("xxz_instance_hash", &xxz_instance_hash, py::arg("inst"));
    m.def("ferro_threshold", &ferro_threshold, py::arg("jxx"), py::arg("jyy"), py::arg("jxy"),
          py::arg("jyx"));

    py::class_<FerroCheck>(m, "FerroCheck")
        .def_readonly("ferromagnetic", &FerroCheck::ferromagnetic)
        .def_readonly("margins", &FerroCheck::margins);

    m.def("check_ferromagnetic", &check_ferromagnetic, py::arg("inst"));
    m.def("sector_block", &sector_block, py::arg("inst"), py::arg("k"),
          py::arg("dim_cap") = long(1) << 14);

    py::class_<SectorPolynomial>(m, "SectorPolynomial")
        .def_readonly("q", &SectorPolynomial::q)
        .def_readonly("beta", &SectorPolynomial::beta)
        .def_readonly("n", &SectorPolynomial::n)
        .def_readonly("computed_up_to", &SectorPolynomial::computed_up_to);

    m.def("sector_coefficients", &sector_coefficients, py::arg("inst"), py::arg("beta"),
          py::arg("k_max") = py::none(), py::arg("dim_cap") = long(1) << 14);
    m.def("xxz_log_partition", &xxz_log_partition, py::arg("poly"), py::arg("mu"));

    py::class_<LeeYangRoots>(m, "LeeYangRoots")
        .def_readonly("roots", &LeeYangRoots::roots)
        .def_readonly("max_deviation", &LeeYangRoots::max_deviation);

    m.def("lee_yang_roots", &lee_yang_roots, py::arg("poly"));
    m.def("xxz_estimate", &xxz_estimate, py::arg("poly"), py::arg("z"), py::arg("eps"));
    m.def("xxz_estimate_at_K", &xxz_estimate_at_K, py::arg("poly"), py::arg("z"), py::arg("K"));
    m.def("to_local_hamiltonian", &to_local_hamiltonian, py::arg("inst"), py::arg("mu"));
    m.def("random_ferromagnetic_xxz", &random_ferromagnetic_xxz, py::arg("n"), py::arg("seed"));
}
