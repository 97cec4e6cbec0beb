#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "opsteer/baselines.hpp"
#include "opsteer/error.hpp"
#include "opsteer/feasibility.hpp"
#include "opsteer/harness.hpp"
#include "opsteer/online.hpp"

namespace py = pybind11;
using namespace opsteer;

namespace {

Mat states_matrix(const Trajectory& t) {
  Mat m(static_cast<Eigen::Index>(t.states.size()), t.states.front().x.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = t.states[k].x.transpose();
  return m;
}

Mat controls_matrix(const Trajectory& t) {
  const Eigen::Index n = t.states.front().x.size();
  Mat m(static_cast<Eigen::Index>(t.controls.size()), n);
  for (std::size_t k = 0; k < t.controls.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = t.controls[k].transpose();
  return m;
}

py::dict record_dict(const ExperimentRecord& r) {
  py::dict d;
  d["run_id"] = r.run_id;
  d["config_hash"] = r.config_hash;
  d["controller"] = r.controller;
  d["status"] = r.status;
  d["final_err_inf"] = r.final_err_inf;
  d["cum_cost"] = r.cumulative_cost;
  d["steps"] = r.steps;
  d["trajectory_path"] = r.trajectory_path;
  d["cycles_path"] = r.cycles_path;
  d["estimator_path"] = r.estimator_path;
  d["error"] = r.error;
  return d;
}

ExperimentConfig config_from(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, e.what());
  }
  return parse_config(doc);
}

}  // namespace

PYBIND11_MODULE(_opsteer, m) {
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result([&] { return py::exception<Error>(m, "OpsteerError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error.get_stored(), e.what());
    }
  });

  py::class_<Network>(m, "Network")
      .def_property_readonly("n", &Network::n)
      .def_property_readonly("adjacency", [](const Network& n) { return n.graph.adjacency; })
      .def_property_readonly("laplacian", [](const Network& n) { return n.graph.laplacian; })
      .def_property_readonly("V", [](const Network& n) { return n.mixing.V; })
      .def_property_readonly("lambda_V", [](const Network& n) { return n.mixing.lambda_V; })
      .def_property_readonly("stubbornness", [](const Network& n) { return n.params.lambda; })
      .def_property_readonly("susceptibility", [](const Network& n) { return n.params.h; })
      .def_property_readonly("h_min", [](const Network& n) { return n.params.h_min; })
      .def_property_readonly("h_max", [](const Network& n) { return n.params.h_max; });

  m.def(
      "make_network",
      [](const Mat& adjacency, const Vec& lambda, const Vec& h, std::optional<double> h_min,
         std::optional<double> h_max) {
        AgentParams p;
        p.lambda = lambda;
        p.h = h;
        p.h_min = h_min.value_or(h.size() ? h.minCoeff() : 0.0);
        p.h_max = h_max.value_or(h.size() ? h.maxCoeff() : 0.0);
        return make_network(adjacency, std::move(p));
      },
      py::arg("adjacency"), py::arg("stubbornness"), py::arg("susceptibility"), py::arg("h_min") = py::none(),
      py::arg("h_max") = py::none());

  m.def(
      "random_network",
      [](int n, double density, std::uint64_t seed, std::pair<double, double> lambda_range,
         std::pair<double, double> h_range) {
        RandomNetworkSpec spec;
        spec.n = n;
        spec.density = density;
        spec.seed = seed;
        spec.lambda_range = lambda_range;
        spec.h_range = h_range;
        auto [g, p] = random_network(spec);
        return make_network(g.adjacency, std::move(p));
      },
      py::arg("n"), py::arg("density"), py::arg("seed"), py::arg("lambda_range") = std::pair{0.2, 0.8},
      py::arg("h_range") = std::pair{0.2, 0.8});

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("states", &states_matrix)
      .def_property_readonly("controls", &controls_matrix)
      .def_readonly("step_costs", &Trajectory::step_costs)
      .def_readonly("cum_costs", &Trajectory::cum_costs)
      .def_readonly("err_inf", &Trajectory::err_inf)
      .def_readonly("budget_exhausted", &Trajectory::budget_exhausted)
      .def_property_readonly("steps", &Trajectory::steps)
      .def_property_readonly("cumulative_cost", &Trajectory::cumulative_cost)
      .def_property_readonly("final_error", &Trajectory::final_error)
      .def("to_csv", [](const Trajectory& t) {
        std::ostringstream out;
        write_trajectory_csv(out, t);
        return out.str();
      });

  m.def(
      "step",
      [](const Network& net, const Vec& x, const Vec& u, double d) { return step(OpinionState{x, 0}, u, net, d).x; },
      py::arg("net"), py::arg("x"), py::arg("u"), py::arg("target"));

  py::class_<RateSchedule>(m, "RateSchedule")
      .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
      .def_property_readonly("a", &RateSchedule::a)
      .def_property_readonly("b", &RateSchedule::b)
      .def("rate", &RateSchedule::rate);

  m.def(
      "simulate",
      [](const Network& net, const Vec& x0, double d, const RateSchedule& s, int T, std::optional<double> budget) {
        return simulate(net, x0, d, exponential_policy(s, net.params.h), T, budget);
      },
      py::arg("net"), py::arg("x0"), py::arg("target"), py::arg("schedule"), py::arg("horizon"),
      py::arg("budget") = py::none());

  m.def("cost_weight", [](const Network& net) { return cost_weight_nonuniform(net.params.h); }, py::arg("net"));
  m.def("error_bound", &error_bound, py::arg("schedule"), py::arg("horizon"), py::arg("x0_err"));
  m.def("cost_of_schedule", &cost_of_schedule, py::arg("schedule"), py::arg("horizon"), py::arg("S"));
  m.def("max_progress_schedule", &max_progress_schedule, py::arg("horizon"), py::arg("budget"), py::arg("S"),
        py::arg("a_cap") = 0.999);

  m.def(
      "solve_schedule",
      [](int T, double eps, double x0_err, double C_max, double S) {
        const FeasibilityResult r = solve_schedule({T, eps, x0_err, C_max, S});
        py::dict out;
        out["feasible"] = r.feasible;
        out["failure"] = std::string(to_string(r.failed));
        out["schedule"] = r.schedule ? py::cast(*r.schedule) : py::none();
        out["progress"] = r.certificate.progress;
        out["required_progress"] = r.certificate.required;
        out["available_progress"] = r.certificate.available;
        out["error_bound"] = r.certificate.error_bound;
        out["cost"] = r.certificate.cost;
        return out;
      },
      py::arg("horizon"), py::arg("epsilon"), py::arg("x0_err"), py::arg("budget"), py::arg("S"));

  m.def(
      "run_online",
      [](const Network& net, const Vec& x0, double d, double alpha_0, double gamma, double c_delta,
         double alpha_min, double tol, int max_cycles, std::optional<double> budget, std::optional<int> horizon) {
        OnlineConfig c;
        c.alpha_0 = alpha_0;
        c.gamma = gamma;
        c.c_delta = c_delta;
        c.alpha_min = alpha_min;
        c.tol = tol;
        c.max_cycles = max_cycles;
        c.budget = budget;
        c.horizon = horizon;
        const OnlineResult r = run_online(net, x0, d, c);
        py::dict out;
        out["status"] = std::string(to_string(r.status));
        out["trajectory"] = r.trajectory;
        out["theta_hat"] = r.theta_hat;
        out["m_star"] = r.m_star ? py::cast(*r.m_star) : py::none();
        out["cycles"] = static_cast<int>(r.cycles.size());
        py::list combined;
        for (const auto& cyc : r.cycles) combined.append(cyc.combined_error);
        out["combined_error"] = combined;
        std::ostringstream csv;
        write_cycles_csv(csv, r.cycles);
        out["cycles_csv"] = csv.str();
        return out;
      },
      py::arg("net"), py::arg("x0"), py::arg("target"), py::arg("alpha_0") = 0.1, py::arg("gamma") = 0.5,
      py::arg("c_delta") = 0.5, py::arg("alpha_min") = 1e-3, py::arg("tol") = 1e-4, py::arg("max_cycles") = 200,
      py::arg("budget") = py::none(), py::arg("horizon") = py::none());

  m.def(
      "run_identification",
      [](const Network& net, const Vec& x0, double d, std::optional<double> alpha, int max_steps) {
        IdentificationConfig c;
        c.alpha = alpha;
        c.max_steps = max_steps;
        const IdentificationResult r = run_identification(net, x0, d, c);
        py::dict out;
        out["alpha"] = r.alpha;
        out["beta"] = r.beta;
        out["psi"] = r.psi;
        out["delta"] = r.delta;
        out["R0"] = r.R0;
        py::list R, theta;
        for (const auto& s : r.trace) {
          R.append(s.R);
          theta.append(s.theta_hat);
        }
        out["R"] = R;
        out["theta_hat"] = theta;
        out["trajectory"] = r.trajectory;
        return out;
      },
      py::arg("net"), py::arg("x0"), py::arg("target"), py::arg("alpha") = py::none(), py::arg("max_steps") = 50);

  m.def(
      "run_gradient_baseline",
      [](const Network& net, const Vec& x0, double d, int horizon, std::optional<double> budget) {
        GradientControllerConfig c;
        c.horizon = horizon;
        c.budget = budget;
        return run_gradient_baseline(net, x0, d, c).trajectory;
      },
      py::arg("net"), py::arg("x0"), py::arg("target"), py::arg("horizon") = 100, py::arg("budget") = py::none());

  m.def(
      "run_budget_optimal_baseline",
      [](const Network& net, const Vec& x0, double d, int horizon, double budget) {
        return run_budget_optimal_baseline(net, x0, d, horizon, budget).trajectory;
      },
      py::arg("net"), py::arg("x0"), py::arg("target"), py::arg("horizon"), py::arg("budget"));

  m.def("config_hash", [](const std::string& text) { return config_hash(config_from(text)); }, py::arg("config_json"));
  m.def("canonical_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        py::arg("config_json"));

  m.def(
      "run_experiment",
      [](const std::string& text, std::optional<std::filesystem::path> out_dir) {
        const ExperimentConfig c = config_from(text);
        ExperimentRecord r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, out_dir);
        }
        return record_dict(r);
      },
      py::arg("config_json"), py::arg("out_dir") = py::none());

  m.def(
      "sweep",
      [](const std::vector<std::string>& texts, int jobs, std::optional<std::filesystem::path> out_dir) {
        std::vector<ExperimentConfig> configs;
        for (const auto& t : texts) configs.push_back(config_from(t));
        std::vector<ExperimentRecord> records;
        {
          py::gil_scoped_release release;
          records = sweep(configs, jobs, out_dir);
        }
        py::list out;
        for (const auto& r : records) out.append(record_dict(r));
        return out;
      },
      py::arg("configs"), py::arg("jobs") = 1, py::arg("out_dir") = py::none());
}
