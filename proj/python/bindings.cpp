#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtrunc/cif.hpp"
#include "dtrunc/cox.hpp"
#include "dtrunc/error.hpp"
#include "dtrunc/npmle.hpp"
#include "dtrunc/resampling.hpp"
#include "dtrunc/sample.hpp"
#include "dtrunc/sef.hpp"
#include "dtrunc/simgen.hpp"
#include "dtrunc/tau.hpp"

namespace py = pybind11;
using namespace dtrunc;

namespace {

NpmleAlgorithm algorithm_from(const std::string& name) {
  if (name == "selfconsistency") return NpmleAlgorithm::selfconsistency;
  if (name == "joint") return NpmleAlgorithm::joint;
  throw std::invalid_argument("algorithm must be 'selfconsistency' or 'joint'");
}

BootstrapOptions bootstrap_options(int B, std::uint64_t seed, double level, const std::string& ci,
                                   const std::vector<double>& points, unsigned threads, bool keep) {
  BootstrapOptions opt;
  opt.B = B;
  opt.seed = seed;
  opt.level = level;
  if (ci != "percentile" && ci != "normal") throw std::invalid_argument("ci must be 'percentile' or 'normal'");
  opt.method = ci == "normal" ? CiMethod::normal : CiMethod::percentile;
  opt.eval_points = points;
  opt.threads = threads;
  opt.keep_replicates = keep;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonparametric and semiparametric estimation for doubly truncated data.";

  auto base = py::register_exception<Error>(m, "DtruncError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  auto degenerate = py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<GroupFailureError>(m, "GroupFailureError", degenerate.ptr());

  py::class_<TruncatedSample>(m, "TruncatedSample")
      .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>, Eigen::MatrixXd,
                    std::vector<std::string>, std::vector<int>>(),
           py::arg("x"), py::arg("u"), py::arg("v"), py::arg("z") = Eigen::MatrixXd(),
           py::arg("z_names") = std::vector<std::string>{}, py::arg("event") = std::vector<int>{})
      .def("__len__", &TruncatedSample::size)
      .def_property_readonly("x", [](const TruncatedSample& s) { return std::vector<double>(s.x().begin(), s.x().end()); })
      .def_property_readonly("u", [](const TruncatedSample& s) { return std::vector<double>(s.u().begin(), s.u().end()); })
      .def_property_readonly("v", [](const TruncatedSample& s) { return std::vector<double>(s.v().begin(), s.v().end()); })
      .def_property_readonly("z", &TruncatedSample::z)
      .def_property_readonly("z_names", &TruncatedSample::z_names)
      .def_property_readonly("event", [](const TruncatedSample& s) { return std::vector<int>(s.event().begin(), s.event().end()); });

  m.def("load_sample", [](const std::string& path, bool drop_invalid) {
    LoadOptions opt;
    opt.drop_invalid = drop_invalid;
    return load_sample(path, opt).sample;
  }, py::arg("path"), py::arg("drop_invalid") = false);

  py::class_<ExistenceReport>(m, "ExistenceReport")
      .def_readonly("s1", &ExistenceReport::s1)
      .def_readonly("s2", &ExistenceReport::s2)
      .def_readonly("ok", &ExistenceReport::ok)
      .def_readonly("violating_indices", &ExistenceReport::violating_indices);
  m.def("existence_check", &existence_check, py::arg("sample"));

  py::class_<NpmleFit>(m, "NpmleFit")
      .def_property_readonly("support", [](const NpmleFit& f) { return f.f.support(); })
      .def_property_readonly("mass", [](const NpmleFit& f) { return f.f.mass(); })
      .def_property_readonly("cdf", [](const NpmleFit& f) { return f.f.cumulative(); })
      .def_property_readonly("g", [](const NpmleFit& f) { return f.g.value; })
      .def_readonly("window_prob", &NpmleFit::window_prob)
      .def_readonly("iterations", &NpmleFit::iterations)
      .def_readonly("final_change", &NpmleFit::final_change)
      .def_readonly("converged", &NpmleFit::converged)
      .def_readonly("existence_ok", &NpmleFit::existence_ok)
      .def("cdf_at", [](const NpmleFit& f, double t) { return f.f.cdf(t); });
  m.def("npmle", [](const TruncatedSample& s, const std::string& algorithm, double tol, int max_iter) {
    py::gil_scoped_release release;
    return npmle(s, algorithm_from(algorithm), {tol, max_iter});
  }, py::arg("sample"), py::arg("algorithm") = "selfconsistency", py::arg("tol") = 1e-6, py::arg("max_iter") = 10000);

  py::class_<BootstrapResult>(m, "BootstrapResult")
      .def_readonly("eval_points", &BootstrapResult::eval_points)
      .def_readonly("estimate", &BootstrapResult::estimate)
      .def_readonly("se", &BootstrapResult::se)
      .def_readonly("ci_low", &BootstrapResult::ci_low)
      .def_readonly("ci_high", &BootstrapResult::ci_high)
      .def_readonly("level", &BootstrapResult::level)
      .def_readonly("B", &BootstrapResult::B)
      .def_readonly("failures", &BootstrapResult::failures)
      .def_readonly("seed", &BootstrapResult::seed)
      .def_readonly("replicates", &BootstrapResult::replicates);
  m.def("bootstrap", [](const TruncatedSample& s, const std::string& method, int B, std::uint64_t seed, double level,
                        const std::string& ci, const std::vector<double>& points, unsigned threads, bool keep) {
    const auto opt = bootstrap_options(B, seed, level, ci, points, threads, keep);
    if (method != "simple" && method != "obvious") throw std::invalid_argument("method must be 'simple' or 'obvious'");
    py::gil_scoped_release release;
    return method == "obvious" ? obvious_bootstrap(s, opt) : simple_bootstrap(s, opt);
  }, py::arg("sample"), py::arg("method") = "simple", py::arg("B") = 500, py::arg("seed") = 0, py::arg("level") = 0.95,
     py::arg("ci") = "percentile", py::arg("points") = std::vector<double>{}, py::arg("threads") = 1,
     py::arg("keep_replicates") = false);

  py::class_<CoxFit>(m, "CoxFit")
      .def_readonly("names", &CoxFit::names)
      .def_readonly("beta", &CoxFit::beta)
      .def_readonly("se", &CoxFit::se)
      .def_readonly("pvalue", &CoxFit::pvalue)
      .def_property_readonly("scheme", [](const CoxFit& f) { return std::string(to_string(f.scheme)); })
      .def_readonly("iterations", &CoxFit::iterations)
      .def_readonly("converged", &CoxFit::converged)
      .def_readonly("B", &CoxFit::B)
      .def_readonly("failures", &CoxFit::failures)
      .def_readonly("seed", &CoxFit::seed);
  m.def("cox_fit", [](const TruncatedSample& s, const std::string& scheme, int B, std::uint64_t seed, unsigned threads) {
    CoxFitOptions opt;
    opt.scheme = parse_cox_scheme(scheme);
    opt.B = B;
    opt.seed = seed;
    opt.threads = threads;
    py::gil_scoped_release release;
    return cox_fit(s, opt);
  }, py::arg("sample"), py::arg("scheme") = "mandel", py::arg("B") = 199, py::arg("seed") = 0, py::arg("threads") = 1);

  py::class_<CifFit>(m, "CifFit")
      .def_property_readonly("method", [](const CifFit& f) { return std::string(to_string(f.method)); })
      .def_readonly("types", &CifFit::types)
      .def_readonly("group_sizes", &CifFit::group_sizes)
      .def_readonly("times", &CifFit::times)
      .def_readonly("cif", &CifFit::cif)
      .def_readonly("se", &CifFit::se)
      .def_readonly("ci_low", &CifFit::ci_low)
      .def_readonly("ci_high", &CifFit::ci_high)
      .def_readonly("B", &CifFit::B)
      .def_readonly("failures", &CifFit::failures);
  m.def("cif", [](const TruncatedSample& s, const std::string& method, int B, std::uint64_t seed, unsigned threads) {
    CifOptions opt;
    opt.method = parse_cif_method(method);
    opt.B = B;
    opt.seed = seed;
    opt.threads = threads;
    py::gil_scoped_release release;
    return cif(s, opt);
  }, py::arg("sample"), py::arg("method") = "indep", py::arg("B") = 300, py::arg("seed") = 0, py::arg("threads") = 1);

  py::class_<TauTest>(m, "TauTest")
      .def_readonly("tau", &TauTest::tau)
      .def_readonly("n_comparable", &TauTest::n_comparable)
      .def_readonly("se", &TauTest::se)
      .def_readonly("pvalue", &TauTest::pvalue)
      .def_readonly("B", &TauTest::B)
      .def_readonly("seed", &TauTest::seed);
  m.def("kendall_tau_test", [](const TruncatedSample& s, int B, std::uint64_t seed, unsigned threads) {
    py::gil_scoped_release release;
    return kendall_tau_test(s, {B, seed, threads});
  }, py::arg("sample"), py::arg("B") = 200, py::arg("seed") = 0, py::arg("threads") = 1);

  py::class_<SefFit>(m, "SefFit")
      .def(py::init([](double eta, double a, double b) { return SefFit{.eta = eta, .a = a, .b = b}; }),
           py::arg("eta"), py::arg("a"), py::arg("b"))
      .def_readonly("eta", &SefFit::eta)
      .def_readonly("a", &SefFit::a)
      .def_readonly("b", &SefFit::b)
      .def_readonly("loglik", &SefFit::loglik)
      .def_readonly("aic", &SefFit::aic);
  m.def("sef_fit", &sef_fit, py::arg("sample"));
  m.def("sef_cdf", &sef_cdf, py::arg("fit"), py::arg("t"));

  py::class_<GeneratedSample>(m, "GeneratedSample")
      .def_readonly("sample", &GeneratedSample::sample)
      .def_readonly("acceptance_rate", &GeneratedSample::acceptance_rate)
      .def_readonly("candidates", &GeneratedSample::candidates);
  m.def("gen_truncated", [](std::size_t n, const std::string& law, double rho, double tau, double sigma,
                            std::optional<double> beta, std::uint64_t seed) {
    XLaw x;
    if (law == "cox") x.kind = XLaw::Kind::cox;
    else if (law != "uniform") throw std::invalid_argument("law must be 'uniform' or 'cox'");
    x.cox = {sigma, beta.value_or(1.0 / sigma)};
    return gen_truncated(n, x, {rho, tau}, seed);
  }, py::arg("n"), py::arg("law") = "uniform", py::arg("rho") = 0.5, py::arg("tau") = 0.25, py::arg("sigma") = 0.1,
     py::arg("beta") = py::none(), py::arg("seed") = 0);

  py::class_<ExperimentRow>(m, "ExperimentRow")
      .def_readonly("estimator", &ExperimentRow::estimator)
      .def_readonly("point", &ExperimentRow::point)
      .def_readonly("truth", &ExperimentRow::truth)
      .def_readonly("mean", &ExperimentRow::mean)
      .def_readonly("bias", &ExperimentRow::bias)
      .def_readonly("sd", &ExperimentRow::sd)
      .def_readonly("mse", &ExperimentRow::mse);
  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("rows", &ExperimentReport::rows)
      .def_readonly("trials_used", &ExperimentReport::trials_used)
      .def_readonly("trials_failed", &ExperimentReport::trials_failed)
      .def_readonly("acceptance_rate", &ExperimentReport::acceptance_rate)
      .def_readonly("insufficient_trials", &ExperimentReport::insufficient_trials);
  m.def("run_experiment", [](const std::string& preset, std::size_t n, int trials, std::uint64_t seed, int B,
                             unsigned threads) {
    auto c = preset_config(preset);
    c.n = n;
    c.trials = trials;
    c.seed = seed;
    c.B = B;
    c.threads = threads;
    py::gil_scoped_release release;
    return run_experiment(c);
  }, py::arg("preset") = "table4", py::arg("n") = 250, py::arg("trials") = 100, py::arg("seed") = 0,
     py::arg("B") = 99, py::arg("threads") = 1);
}
