#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dcmb/clicklog.hpp"
#include "dcmb/dcm.hpp"
#include "dcmb/harness.hpp"
#include "dcmb/klucb.hpp"
#include "dcmb/policies.hpp"
#include "dcmb/theory.hpp"
#include "dcmb/version.hpp"

namespace py = pybind11;
using namespace dcmb;

namespace {

ActionList to_action(const std::vector<std::int32_t>& items) {
  ActionList a;
  a.items = items;
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dependent click model bandits: environment, policies, and harness";
  m.attr("__version__") = kVersion;

  py::class_<DcmInstance>(m, "DcmInstance")
      .def(py::init<>())
      .def(py::init([](std::vector<double> attraction, std::vector<double> termination,
                       bool order_known) {
             DcmInstance dcm{std::move(attraction), std::move(termination), order_known};
             dcm.validate();
             return dcm;
           }),
           py::arg("attraction"), py::arg("termination"), py::arg("order_known") = false)
      .def_readwrite("attraction", &DcmInstance::attraction)
      .def_readwrite("termination", &DcmInstance::termination)
      .def_readwrite("order_known", &DcmInstance::order_known)
      .def_property_readonly("item_count", &DcmInstance::item_count)
      .def_property_readonly("positions", &DcmInstance::positions)
      .def("validate", &DcmInstance::validate)
      .def("__repr__", [](const DcmInstance& d) {
        std::ostringstream os;
        os << "DcmInstance(L=" << d.item_count() << ", K=" << d.positions() << ")";
        return os.str();
      });

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("clicks", &StepOutcome::clicks)
      .def_readonly("reward", &StepOutcome::reward)
      .def_readonly("attraction_draw", &StepOutcome::attraction_draw)
      .def_readonly("termination_draw", &StepOutcome::termination_draw);

  m.def("or_value", [](const std::vector<double>& x) { return or_value(x); }, py::arg("x"));
  m.def(
      "expected_reward",
      [](const std::vector<std::int32_t>& items, const std::vector<double>& w,
         const std::vector<double>& v) { return expected_reward(to_action(items), w, v); },
      py::arg("items"), py::arg("attraction"), py::arg("termination"));
  m.def(
      "cascade_reward",
      [](const std::vector<std::int32_t>& items, const std::vector<double>& w,
         std::size_t prefix) { return cascade_reward(to_action(items), w, prefix); },
      py::arg("items"), py::arg("attraction"), py::arg("prefix"));
  m.def(
      "sample_step",
      [](const DcmInstance& dcm, const std::vector<std::int32_t>& items, std::uint64_t seed) {
        Rng rng(seed);
        return sample_step(dcm, to_action(items), rng);
      },
      py::arg("instance"), py::arg("items"), py::arg("seed"));
  m.def(
      "last_click_index",
      [](const ClickVector& c) -> std::optional<std::size_t> { return last_click_index(c); },
      py::arg("clicks"), "0-based index of the last click, or None");
  m.def("observed_prefix",
        [](const ClickVector& c) { return observed_prefix(c); }, py::arg("clicks"));
  m.def("optimal_list", [](const DcmInstance& dcm) { return optimal_list(dcm).items; },
        py::arg("instance"));
  m.def("first_click_filter", &first_click_filter, py::arg("clicks"));
  m.def("last_click_filter", &last_click_filter, py::arg("clicks"));
  m.def(
      "select_list",
      [](const std::vector<double>& ucbs, const std::vector<std::int32_t>& order) {
        return select_list(ucbs, order).items;
      },
      py::arg("ucbs"), py::arg("termination_order"));
  m.def(
      "save_instance_text",
      [](const DcmInstance& dcm) {
        std::ostringstream os;
        save_instance(os, dcm);
        return os.str();
      },
      py::arg("instance"));
  m.def(
      "load_instance_text",
      [](const std::string& text) {
        std::istringstream is(text);
        return load_instance(is);
      },
      py::arg("text"));

  m.def("kl_bernoulli", &kl_bernoulli, py::arg("p"), py::arg("q"));
  m.def("exploration_budget", &exploration_budget, py::arg("t"));
  m.def("klucb_upper", &klucb_upper, py::arg("w_hat"), py::arg("pulls"), py::arg("t"));

  py::class_<Policy>(m, "Policy")
      .def(
          "step",
          [](Policy& p, const std::optional<ClickVector>& clicks) {
            return p.step(clicks ? &*clicks : nullptr).items;
          },
          py::arg("previous_clicks") = std::nullopt)
      .def_property_readonly("init_steps", &Policy::init_steps)
      .def_property_readonly("id", &Policy::id);
  m.def("make_policy", &make_policy, py::arg("id"), py::arg("item_count"),
        py::arg("positions"), py::arg("horizon"), py::arg("seed"),
        py::arg("termination_order") = std::vector<std::int32_t>{});
  m.attr("POLICY_IDS") =
      std::vector<std::string>(kPolicyIds.begin(), kPolicyIds.end());

  py::class_<LbSpec>(m, "LbSpec")
      .def(py::init([](std::size_t item_count, std::vector<std::int32_t> optimal_items,
                       double p, double gap, double gamma) {
             LbSpec spec{item_count, std::move(optimal_items), p, gap, gamma};
             spec.validate();
             return spec;
           }),
           py::arg("item_count"), py::arg("optimal_items"), py::arg("p"), py::arg("gap"),
           py::arg("gamma"))
      .def_readwrite("item_count", &LbSpec::item_count)
      .def_readwrite("optimal_items", &LbSpec::optimal_items)
      .def_readwrite("p", &LbSpec::p)
      .def_readwrite("gap", &LbSpec::gap)
      .def_readwrite("gamma", &LbSpec::gamma);
  m.def("make_lb_instance", &make_lb_instance, py::arg("spec"));

  py::class_<RegretTrace>(m, "RegretTrace")
      .def_readonly("policy", &RegretTrace::policy)
      .def_readonly("seed", &RegretTrace::seed)
      .def_readonly("init_steps", &RegretTrace::init_steps)
      .def_readonly("cum_realized", &RegretTrace::cum_realized)
      .def_readonly("cum_expected", &RegretTrace::cum_expected)
      .def("final_regret", &RegretTrace::final_regret, py::arg("include_init") = false,
           py::arg("expected_mode") = false);

  py::class_<SummaryCurve>(m, "SummaryCurve")
      .def_readonly("mean", &SummaryCurve::mean)
      .def_readonly("sem", &SummaryCurve::sem)
      .def_readonly("runs", &SummaryCurve::runs)
      .def("final_mean", &SummaryCurve::final_mean)
      .def("final_sem", &SummaryCurve::final_sem);

  m.def(
      "run_episode",
      [](const DcmInstance& dcm, const std::string& policy_id, std::int64_t horizon,
         std::uint64_t seed) {
        auto policy = make_policy(policy_id, dcm.item_count(), dcm.positions(), horizon,
                                  derive_seed(seed, "policy"));
        return run_episode(dcm, *policy, horizon, seed);
      },
      py::arg("instance"), py::arg("policy_id"), py::arg("horizon"), py::arg("seed"));
  m.def(
      "run_batch",
      [](const DcmInstance& dcm, const std::string& policy_id, std::int64_t horizon,
         int runs, std::uint64_t base_seed, int jobs) {
        return run_batch(dcm, policy_id, horizon, runs, base_seed, jobs);
      },
      py::arg("instance"), py::arg("policy_id"), py::arg("horizon"), py::arg("runs"),
      py::arg("base_seed"), py::arg("jobs") = 0);
  m.def(
      "aggregate",
      [](const std::vector<RegretTrace>& traces, bool include_init, bool expected_mode) {
        return aggregate(traces, include_init, expected_mode);
      },
      py::arg("traces"), py::arg("include_init") = false, py::arg("expected_mode") = false);

  py::class_<BoundResult>(m, "BoundResult")
      .def_readonly("value", &BoundResult::value)
      .def_readonly("has_infinite_term", &BoundResult::has_infinite_term);
  m.def("theorem1_leading_bound", &theorem1_leading_bound, py::arg("instance"),
        py::arg("n"), py::arg("eps"));
  m.def("theorem2_leading_bound", &theorem2_leading_bound, py::arg("instance"),
        py::arg("n"), py::arg("eps"));
  m.def("theorem3_lower_bound", &theorem3_lower_bound, py::arg("spec"), py::arg("n"));

  m.def(
      "check_lemma1",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return check_lemma1(x, y);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "check_lemma2",
      [](const std::vector<double>& x, const std::vector<double>& y, double p_max) {
        return check_lemma2(x, y, p_max);
      },
      py::arg("x"), py::arg("y"), py::arg("p_max"));
  m.def(
      "check_lemma3",
      [](const std::vector<double>& x, const std::vector<double>& c) {
        return check_lemma3(x, c);
      },
      py::arg("x"), py::arg("c"));
  m.def(
      "check_lemma4",
      [](const std::vector<double>& x, const std::vector<double>& y, double gamma) {
        return check_lemma4(x, y, gamma);
      },
      py::arg("x"), py::arg("y"), py::arg("gamma"));

  py::class_<LemmaSuiteReport>(m, "LemmaSuiteReport")
      .def_readonly("lemma", &LemmaSuiteReport::lemma)
      .def_readonly("samples", &LemmaSuiteReport::samples)
      .def_readonly("worst_margin", &LemmaSuiteReport::worst_margin)
      .def_readonly("worst_case", &LemmaSuiteReport::worst_case)
      .def_readonly("pass_", &LemmaSuiteReport::pass);
  m.def("run_lemma_suite", &run_lemma_suite, py::arg("samples_per_k"), py::arg("k_max"),
        py::arg("seed"), py::arg("tolerance") = 1e-12);

  py::class_<OracleEquivalenceReport>(m, "OracleEquivalenceReport")
      .def_readonly("trials", &OracleEquivalenceReport::trials)
      .def_readonly("optimal_list_mismatches",
                    &OracleEquivalenceReport::optimal_list_mismatches)
      .def_readonly("select_list_mismatches",
                    &OracleEquivalenceReport::select_list_mismatches)
      .def_readonly("first_mismatch", &OracleEquivalenceReport::first_mismatch)
      .def("ok", &OracleEquivalenceReport::pass);
  m.def("run_oracle_equivalence", &run_oracle_equivalence, py::arg("trials"),
        py::arg("seed"));
  m.def(
      "exhaustive_best_list",
      [](const std::vector<double>& w, const std::vector<double>& v) {
        return exhaustive_best_list(w, v).items;
      },
      py::arg("attraction"), py::arg("termination"));

  py::class_<Session>(m, "Session")
      .def(py::init<>())
      .def_readwrite("query_id", &Session::query_id)
      .def_property(
          "items", [](const Session& s) { return s.items; },
          [](Session& s, const std::array<std::int32_t, kSessionPositions>& v) {
            s.items = v;
          })
      .def_property(
          "clicks", [](const Session& s) { return s.clicks; },
          [](Session& s, const std::array<std::uint8_t, kSessionPositions>& v) {
            s.clicks = v;
          });

  m.def(
      "parse_log_text",
      [](const std::string& text, bool strict) {
        std::istringstream is(text);
        const ParseResult result = parse_log(is, strict);
        std::vector<std::pair<std::size_t, std::string>> skipped;
        for (const auto& issue : result.skipped) skipped.emplace_back(issue.line, issue.reason);
        return py::make_tuple(result.sessions, skipped);
      },
      py::arg("text"), py::arg("strict") = false);
  m.def(
      "write_log_text",
      [](const std::vector<Session>& sessions) {
        std::ostringstream os;
        write_log(os, sessions);
        return os.str();
      },
      py::arg("sessions"));
  m.def(
      "generate_log",
      [](const DcmInstance& dcm, const std::vector<std::int32_t>& display,
         std::int64_t sessions, std::uint64_t seed, std::int64_t query_id) {
        return generate_log(dcm, to_action(display), sessions, seed, query_id);
      },
      py::arg("instance"), py::arg("display"), py::arg("sessions"), py::arg("seed"),
      py::arg("query_id") = 0);

  py::class_<EstimatedDcm>(m, "EstimatedDcm")
      .def_readonly("query_id", &EstimatedDcm::query_id)
      .def_readonly("item_ids", &EstimatedDcm::item_ids)
      .def_readonly("instance", &EstimatedDcm::instance)
      .def_readonly("item_examined", &EstimatedDcm::item_examined)
      .def_readonly("item_clicked", &EstimatedDcm::item_clicked)
      .def_readonly("position_click_sessions", &EstimatedDcm::position_click_sessions)
      .def_readonly("position_last_click_sessions",
                    &EstimatedDcm::position_last_click_sessions)
      .def_readonly("item_low_confidence", &EstimatedDcm::item_low_confidence)
      .def_readonly("position_low_confidence", &EstimatedDcm::position_low_confidence)
      .def_readonly("sessions", &EstimatedDcm::sessions);
  m.def(
      "estimate_dcm",
      [](const std::vector<Session>& sessions) { return estimate_dcm(sessions); },
      py::arg("sessions"));
  m.def(
      "estimate_per_query",
      [](const std::vector<Session>& sessions) { return estimate_per_query(sessions); },
      py::arg("sessions"));

  py::class_<ReplayConfig>(m, "ReplayConfig")
      .def(py::init<>())
      .def_readwrite("policy_ids", &ReplayConfig::policy_ids)
      .def_readwrite("recommend", &ReplayConfig::recommend)
      .def_readwrite("horizon", &ReplayConfig::horizon)
      .def_readwrite("runs_per_query", &ReplayConfig::runs_per_query)
      .def_readwrite("base_seed", &ReplayConfig::base_seed)
      .def_readwrite("jobs", &ReplayConfig::jobs)
      .def_readwrite("include_init", &ReplayConfig::include_init)
      .def_readwrite("expected_mode", &ReplayConfig::expected_mode);
  py::class_<PolicyReplayResult>(m, "PolicyReplayResult")
      .def_readonly("policy", &PolicyReplayResult::policy)
      .def_readonly("curve", &PolicyReplayResult::curve);
  m.def(
      "replay",
      [](const std::vector<EstimatedDcm>& queries, const ReplayConfig& config) {
        return replay(queries, config);
      },
      py::arg("queries"), py::arg("config"));
}
