// Python bindings for the SQG toolkit: fields, spectral operators, the
// Galerkin integrators, rate functional, quasi-potential and the Monte-Carlo
// layer.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqg/io.hpp"
#include "sqg/montecarlo.hpp"
#include "sqg/quasipotential.hpp"
#include "sqg/rate.hpp"

namespace py = pybind11;
using namespace sqg;

namespace {

py::array_t<std::complex<double>> field_coeffs(const SpectralField& f) {
    py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(f.mode_count()));
    auto r = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < f.mode_count(); ++i) r(static_cast<py::ssize_t>(i)) = f.coeffs()[i];
    return out;
}

py::array_t<int> field_modes(const SpectralField& f) {
    py::array_t<int> out({static_cast<py::ssize_t>(f.mode_count()), static_cast<py::ssize_t>(2)});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < f.mode_count(); ++i) {
        ModeIndex k = f.table().mode(i);
        r(static_cast<py::ssize_t>(i), 0) = k.k1;
        r(static_cast<py::ssize_t>(i), 1) = k.k2;
    }
    return out;
}

SpectralField field_from_coeffs(int kmax, py::array_t<std::complex<double>> coeffs) {
    auto r = coeffs.unchecked<1>();
    std::vector<cplx> c(static_cast<std::size_t>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i) c[static_cast<std::size_t>(i)] = r(i);
    return SpectralField(kmax, std::move(c));
}

}  // namespace

PYBIND11_MODULE(_sqg, m) {
    m.doc() = "Pseudo-spectral simulation and verification toolkit for the stochastic "
              "surface quasi-geostrophic equation on the 2-torus";

    py::register_exception<IntegrationError>(m, "IntegrationError");

    py::class_<ModeIndex>(m, "ModeIndex")
        .def(py::init<int, int>(), py::arg("k1"), py::arg("k2"))
        .def_readwrite("k1", &ModeIndex::k1)
        .def_readwrite("k2", &ModeIndex::k2)
        .def("__repr__", [](const ModeIndex& k) {
            return "ModeIndex(" + std::to_string(k.k1) + ", " + std::to_string(k.k2) + ")";
        });

    py::enum_<Trig>(m, "Trig").value("SIN", Trig::Sin).value("COS", Trig::Cos);

    py::class_<SpectralField>(m, "SpectralField")
        .def(py::init<int>(), py::arg("kmax"))
        .def_static("from_coeffs", &field_from_coeffs, py::arg("kmax"), py::arg("coeffs"))
        .def_property_readonly("kmax", &SpectralField::kmax)
        .def_property_readonly("mode_count", &SpectralField::mode_count)
        .def("coeffs", &field_coeffs)
        .def("modes", &field_modes)
        .def("coeff", &SpectralField::coeff, py::arg("k"))
        .def("set_coeff", &SpectralField::set_coeff, py::arg("k"), py::arg("value"))
        .def("real_coeff",
             [](const SpectralField& f, ModeIndex k, Trig t) {
                 int i = f.table().index_of(in_half_lattice(k) ? k : conj_mode(k));
                 if (i < 0) throw std::out_of_range("mode outside kmax");
                 return f.real_coeff(static_cast<std::size_t>(i), t);
             },
             py::arg("k"), py::arg("trig"))
        .def("set_real_coeff",
             [](SpectralField& f, ModeIndex k, Trig t, double x) {
                 int i = f.table().index_of(in_half_lattice(k) ? k : conj_mode(k));
                 if (i < 0) throw std::out_of_range("mode outside kmax");
                 f.set_real_coeff(static_cast<std::size_t>(i), t, x);
             },
             py::arg("k"), py::arg("trig"), py::arg("value"))
        .def("is_zero", &SpectralField::is_zero)
        .def("l2_norm", [](const SpectralField& f) { return l2_norm(f); })
        .def("sobolev_norm", [](const SpectralField& f, double s) { return sobolev_norm(f, s); },
             py::arg("s"))
        .def("synthesize", [](const SpectralField& f, std::size_t n) {
            auto grid = synthesize(f, n);
            py::array_t<double> out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(n)});
            auto r = out.mutable_unchecked<2>();
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    r(static_cast<py::ssize_t>(a), static_cast<py::ssize_t>(b)) = grid[a * n + b];
            return out;
        }, py::arg("n"))
        .def("__add__", [](const SpectralField& a, const SpectralField& b) { return a + b; })
        .def("__sub__", [](const SpectralField& a, const SpectralField& b) { return a - b; })
        .def("__rmul__", [](const SpectralField& a, double c) { return c * a; });

    m.def("resample", &resample, py::arg("field"), py::arg("kmax"));
    m.def("l2_inner", &l2_inner, py::arg("f"), py::arg("g"));
    m.def("weighted_inner", &weighted_inner, py::arg("f"), py::arg("g"), py::arg("weight"));
    m.def("apply_lambda", &apply_lambda, py::arg("field"), py::arg("r"));
    m.def("partial_derivative", &partial_derivative, py::arg("field"), py::arg("axis"));
    m.def("riesz", &riesz, py::arg("field"), py::arg("axis"));
    m.def("riesz_velocity", [](const SpectralField& f) {
        VelocityField u = riesz_velocity(f);
        return py::make_tuple(u.u1, u.u2);
    }, py::arg("theta"));
    m.def("advection", &advection, py::arg("theta"), py::arg("grid_factor") = 2);
    m.def("sobolev_norm", &sobolev_norm, py::arg("field"), py::arg("s"));
    m.def("exact_product", &exact_product, py::arg("a"), py::arg("b"));
    m.def("commutator", &commutator, py::arg("phi"), py::arg("g"));
    m.def("lp_block", [](const SpectralField& f, int j) { return lp_block(f, j); }, py::arg("field"), py::arg("j"));
    m.def("lp_low", [](const SpectralField& f, int j) { return lp_low(f, j); }, py::arg("field"), py::arg("j"));
    m.def("lp_high", [](const SpectralField& f, int j) { return lp_high(f, j); }, py::arg("field"), py::arg("j"));
    m.def("nonlinear_pairing_direct", &nonlinear_pairing_direct, py::arg("theta"), py::arg("phi"));
    m.def("nonlinear_pairing_commutator",
          [](const SpectralField& th, const SpectralField& phi, int j) {
              return nonlinear_pairing_commutator(th, phi, j);
          },
          py::arg("theta"), py::arg("phi"), py::arg("j"));
    m.def("dyadic_range", [](int kmax) { return LpProfile::dyadic_range(kmax); }, py::arg("kmax"));
    m.def("galerkin_project", &galerkin_project, py::arg("field"), py::arg("m"));
    m.def("b_coefficient", &b_coefficient, py::arg("k"), py::arg("l"), py::arg("n"));

    py::class_<SqgParams>(m, "SqgParams")
        .def(py::init<>())
        .def_readwrite("alpha", &SqgParams::alpha)
        .def_readwrite("beta", &SqgParams::beta)
        .def_readwrite("epsilon", &SqgParams::epsilon)
        .def_readwrite("delta", &SqgParams::delta)
        .def_readwrite("s_reg", &SqgParams::s_reg)
        .def_readwrite("m", &SqgParams::m)
        .def_readwrite("T", &SqgParams::T)
        .def_readwrite("dt", &SqgParams::dt)
        .def_readwrite("seed", &SqgParams::seed)
        .def_readwrite("blowup_factor", &SqgParams::blowup_factor)
        .def_readwrite("grid_factor", &SqgParams::grid_factor)
        .def("validate", &SqgParams::validate)
        .def("steps", &SqgParams::steps);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def_readonly("m", &NoiseSpec::m)
        .def_readonly("lam", &NoiseSpec::lambda)
        .def_readonly("beta_multiplier", &NoiseSpec::beta_multiplier);
    m.def("noise_spec", &noise_spec, py::arg("params"));
    m.def("hs_norm_sq", py::overload_cast<const SqgParams&>(&hs_norm_sq), py::arg("params"));
    m.def("hs_norm_sq_at",
          py::overload_cast<double, double, double, int>(&hs_norm_sq), py::arg("alpha"),
          py::arg("delta"), py::arg("s_reg"), py::arg("cutoff"));

    py::class_<ScalingReport>(m, "ScalingReport")
        .def_readonly("diagnostic", &ScalingReport::diagnostic)
        .def_readonly("threshold", &ScalingReport::threshold)
        .def_readonly("ok", &ScalingReport::ok);
    m.def("scaling_ok", &scaling_ok, py::arg("params"), py::arg("threshold") = 1.0);

    py::enum_<DriftMode>(m, "DriftMode")
        .value("SPECTRAL", DriftMode::Spectral)
        .value("TENSOR", DriftMode::Tensor)
        .value("OFF", DriftMode::Off);
    py::enum_<DriftMutation>(m, "DriftMutation")
        .value("NONE", DriftMutation::None)
        .value("FLIP_SIGN", DriftMutation::FlipSign)
        .value("FLIP_LOW_SHELL", DriftMutation::FlipLowShell);

    py::class_<SimOptions>(m, "SimOptions")
        .def(py::init<>())
        .def_readwrite("drift", &SimOptions::drift)
        .def_readwrite("mutation", &SimOptions::mutation)
        .def_readwrite("record_noise", &SimOptions::record_noise)
        .def_readwrite("stream", &SimOptions::stream);

    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init<>())
        .def_readwrite("params", &Trajectory::params)
        .def_readwrite("times", &Trajectory::times)
        .def_readwrite("states", &Trajectory::states)
        .def("__len__", &Trajectory::size);

    py::class_<ControlPath>(m, "ControlPath")
        .def(py::init<>())
        .def_readwrite("times", &ControlPath::times)
        .def_readwrite("values", &ControlPath::values)
        .def("__len__", &ControlPath::size);

    m.def("solve_skeleton",
          [](const SpectralField& th0, const SqgParams& p, const ControlPath* g,
             const SimOptions& o) { return solve_skeleton(th0, g, p, o); },
          py::arg("theta0"), py::arg("params"), py::arg("control") = nullptr,
          py::arg("options") = SimOptions{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<SdeRun>(m, "SdeRun")
        .def_readonly("trajectory", &SdeRun::trajectory)
        .def_readonly("noise_increments", &SdeRun::noise_increments);
    m.def("simulate_sde",
          [](const SpectralField& th0, const SqgParams& p, const ControlPath* g,
             const SimOptions& o) { return simulate_sde(th0, p, g, o); },
          py::arg("theta0"), py::arg("params"), py::arg("control") = nullptr,
          py::arg("options") = SimOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("sample_gaussian_initial", &sample_gaussian_initial, py::arg("params"),
          py::arg("stream") = 0);
    m.def("energy_identity_residual", &energy_identity_residual, py::arg("trajectory"),
          py::arg("noise_increments"));

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("i0", &RateReport::i0)
        .def_readonly("i_dyna", &RateReport::i_dyna)
        .def_readonly("total", &RateReport::total)
        .def_readonly("recovered_control", &RateReport::recovered_control)
        .def_readonly("per_step_residual_norm", &RateReport::per_step_residual_norm);
    m.def("recover_control", &recover_control, py::arg("trajectory"));
    m.def("rate", &rate, py::arg("trajectory"));
    m.def("variational_functional",
          py::overload_cast<const Trajectory&, const ControlPath&>(&variational_functional),
          py::arg("trajectory"), py::arg("phi"));
    m.def("time_reverse", &time_reverse, py::arg("trajectory"));
    m.def("reversed_control", &reversed_control, py::arg("trajectory"), py::arg("control"));

    py::enum_<EnergyMode>(m, "EnergyMode")
        .value("KINETIC", EnergyMode::Kinetic)
        .value("GENERALIZED", EnergyMode::Generalized);
    m.def("energy_residual", &energy_residual, py::arg("trajectory"), py::arg("control"),
          py::arg("mode"));

    py::class_<RelaxationResult>(m, "RelaxationResult")
        .def_readonly("path", &RelaxationResult::path)
        .def_readonly("t_star", &RelaxationResult::t_star)
        .def_readonly("tail", &RelaxationResult::tail);
    m.def("relax",
          [](const SpectralField& phi, const SqgParams& p, double tol, const SimOptions& o) {
              return relax(phi, p, tol, o);
          },
          py::arg("phi"), py::arg("params"), py::arg("tol_rel"), py::arg("options") = SimOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("s_cost", &s_cost, py::arg("reversed_path"));
    py::class_<SCostSplit>(m, "SCostSplit")
        .def_readonly("forward_residual_half_sq", &SCostSplit::forward_residual_half_sq)
        .def_readonly("boundary", &SCostSplit::boundary);
    m.def("s_cost_split", &s_cost_split, py::arg("reversed_path"));
    py::class_<QuasiPotentialReport>(m, "QuasiPotentialReport")
        .def_readonly("u_estimate", &QuasiPotentialReport::u_estimate)
        .def_readonly("phi_norm_sq", &QuasiPotentialReport::phi_norm_sq)
        .def_readonly("tail", &QuasiPotentialReport::tail)
        .def_readonly("t_star", &QuasiPotentialReport::t_star)
        .def_readonly("rel_gap", &QuasiPotentialReport::rel_gap);
    m.def("quasi_potential",
          [](const SpectralField& phi, const SqgParams& p, double tol, const SimOptions& o) {
              return quasi_potential(phi, p, tol, o);
          },
          py::arg("phi"), py::arg("params"), py::arg("tol_rel"), py::arg("options") = SimOptions{},
          py::call_guard<py::gil_scoped_release>());

    py::enum_<Observable>(m, "Observable")
        .value("ONE", Observable::One)
        .value("SUP_NORM", Observable::SupNorm)
        .value("TERMINAL_NORM", Observable::TerminalNorm)
        .value("TIME_INTEGRATED_HIGH_NORM", Observable::TimeIntegratedHighNorm)
        .value("TERMINAL_MODE", Observable::TerminalMode);
    py::enum_<InitialLaw>(m, "InitialLaw")
        .value("GAUSSIAN", InitialLaw::Gaussian)
        .value("FIXED", InitialLaw::Fixed)
        .value("ZERO", InitialLaw::Zero);

    py::class_<EnsembleConfig>(m, "EnsembleConfig")
        .def(py::init<>())
        .def_readwrite("n_traj", &EnsembleConfig::n_traj)
        .def_readwrite("params", &EnsembleConfig::params)
        .def_readwrite("functional", &EnsembleConfig::functional)
        .def_readwrite("threshold", &EnsembleConfig::threshold)
        .def_readwrite("drift", &EnsembleConfig::drift)
        .def_readwrite("mutation", &EnsembleConfig::mutation)
        .def_readwrite("initial", &EnsembleConfig::initial)
        .def_readwrite("initial_field", &EnsembleConfig::initial_field)
        .def_readwrite("obs_mode", &EnsembleConfig::obs_mode)
        .def_readwrite("obs_trig", &EnsembleConfig::obs_trig)
        .def_readwrite("n_threads", &EnsembleConfig::n_threads);

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("mean", &McEstimate::mean)
        .def_readonly("se", &McEstimate::se)
        .def_readonly("p_hat", &McEstimate::p_hat)
        .def_readonly("wilson_lo", &McEstimate::wilson_lo)
        .def_readonly("wilson_hi", &McEstimate::wilson_hi)
        .def_readonly("eps_log_p", &McEstimate::eps_log_p)
        .def_readonly("hits", &McEstimate::hits)
        .def_readonly("zero_hits", &McEstimate::zero_hits);
    m.def("mc_estimate", &mc_estimate, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<ModeMomentRow>(m, "ModeMomentRow")
        .def_readonly("k", &ModeMomentRow::k)
        .def_readonly("trig", &ModeMomentRow::trig)
        .def_readonly("mean_sq", &ModeMomentRow::mean_sq)
        .def_readonly("se", &ModeMomentRow::se)
        .def_readonly("target", &ModeMomentRow::target)
        .def_readonly("z", &ModeMomentRow::z)
        .def_readonly("ess", &ModeMomentRow::ess);
    py::class_<InvariantMeasureReport>(m, "InvariantMeasureReport")
        .def_readonly("rows", &InvariantMeasureReport::rows)
        .def_readonly("passed", &InvariantMeasureReport::pass)
        .def_readonly("t_total", &InvariantMeasureReport::t_total)
        .def_readonly("burn_in", &InvariantMeasureReport::burn_in);
    m.def("invariant_measure_test",
          [](const SqgParams& p, double t_total, const SimOptions& o, double burn, int batches,
             double z) { return invariant_measure_test(p, t_total, o, burn, batches, z); },
          py::arg("params"), py::arg("t_total"), py::arg("options") = SimOptions{},
          py::arg("burn_in_frac") = 0.2, py::arg("n_batches") = 64, py::arg("z_limit") = 3.0,
          py::call_guard<py::gil_scoped_release>());

    py::class_<ReversibilityRow>(m, "ReversibilityRow")
        .def_readonly("name", &ReversibilityRow::name)
        .def_readonly("forward", &ReversibilityRow::forward)
        .def_readonly("reversed", &ReversibilityRow::reversed)
        .def_readonly("diff", &ReversibilityRow::diff)
        .def_readonly("se", &ReversibilityRow::se)
        .def_readonly("z", &ReversibilityRow::z);
    py::class_<ReversibilityReport>(m, "ReversibilityReport")
        .def_readonly("rows", &ReversibilityReport::rows)
        .def_readonly("passed", &ReversibilityReport::pass)
        .def_readonly("z_limit", &ReversibilityReport::z_limit);
    m.def("reversibility_test", &reversibility_test, py::arg("config"), py::arg("tau"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<TiltTarget>(m, "TiltTarget")
        .def(py::init<>())
        .def_readwrite("theta0", &TiltTarget::theta0)
        .def_readwrite("g", &TiltTarget::g);
    py::class_<TiltResult>(m, "TiltResult")
        .def_readonly("weighted_mean", &TiltResult::weighted_mean)
        .def_readonly("weighted_se", &TiltResult::weighted_se)
        .def_readonly("direct_mean", &TiltResult::direct_mean)
        .def_readonly("direct_se", &TiltResult::direct_se)
        .def_readonly("weight_mean", &TiltResult::weight_mean)
        .def_readonly("weight_se", &TiltResult::weight_se)
        .def_readonly("ess", &TiltResult::ess)
        .def_readonly("entropy_estimate", &TiltResult::entropy_estimate)
        .def_readonly("entropy_se", &TiltResult::entropy_se)
        .def_readonly("rate_bound", &TiltResult::rate_bound)
        .def_readonly("degenerate", &TiltResult::degenerate);
    m.def("tilt_simulate", &tilt_simulate, py::arg("target"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<SupermartingaleReport>(m, "SupermartingaleReport")
        .def_readonly("times", &SupermartingaleReport::times)
        .def_readonly("mean_q", &SupermartingaleReport::mean_q)
        .def_readonly("se_q", &SupermartingaleReport::se_q)
        .def_readonly("increment_z", &SupermartingaleReport::increment_z)
        .def_readonly("nonincreasing", &SupermartingaleReport::nonincreasing)
        .def_readonly("lambda0", &SupermartingaleReport::lambda0);
    m.def("supermartingale_check",
          [](const ControlPath& phi, const EnsembleConfig& cfg, int n_cp, double psi_scale,
             double psi_cap, double z) {
              return supermartingale_check(phi, cfg, n_cp, psi_scale, psi_cap, z);
          },
          py::arg("phi"), py::arg("config"), py::arg("n_checkpoints") = 8,
          py::arg("psi_scale") = 0.0, py::arg("psi_cap") = 1.0, py::arg("z_limit") = 3.0,
          py::call_guard<py::gil_scoped_release>());

    py::class_<ExpMomentResult>(m, "ExpMomentResult")
        .def_readonly("analytic", &ExpMomentResult::analytic)
        .def_readonly("mc", &ExpMomentResult::mc)
        .def_readonly("mc_se", &ExpMomentResult::mc_se)
        .def_readonly("n_draws", &ExpMomentResult::n_draws);
    m.def("gaussian_exp_moment",
          [](double eta, const SqgParams& p, int n, int threads) {
              return gaussian_exp_moment(eta, p, n, threads);
          },
          py::arg("eta"), py::arg("params"), py::arg("n_draws") = 100000,
          py::arg("n_threads") = 0, py::call_guard<py::gil_scoped_release>());

    m.def("save_field", &save_field, py::arg("field"), py::arg("path"));
    m.def("load_field", &load_field, py::arg("path"));
    m.def("save_trajectory", &save_trajectory, py::arg("trajectory"), py::arg("path"),
          py::arg("stride") = 1);
    m.def("load_trajectory", &load_trajectory, py::arg("path"));
    m.def("save_control", &save_control, py::arg("control"), py::arg("params"), py::arg("path"));
    m.def("load_control", &load_control, py::arg("path"));
    m.def("params_to_text", &params_to_text, py::arg("params"));
    m.def("config_load", [](const std::string& path) {
        Config c = config_load(path);
        return py::make_tuple(c.params, c.extras);
    }, py::arg("path"));

    m.attr("__version__") = "0.1.0";
}
