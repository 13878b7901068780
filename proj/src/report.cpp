#include "assuredx/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace assuredx {

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

Json rounded(const Json& j) {
  if (j.is_number_float()) return round_significant(j.get<double>());
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& v : j) out.push_back(rounded(v));
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& item : j.items()) out[item.key()] = rounded(item.value());
    return out;
  }
  return j;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

Json optional_int(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json prior_json(const BetaParams& p) { return Json{{"a", p.a}, {"b", p.b}}; }

ExecOptions exec_of(const RunConfig& c) { return ExecOptions{c.threads}; }

Json points_json(const AssuranceCurve& curve) {
  Json pts = Json::array();
  for (const auto& p : curve.points) pts.push_back({{"n_t", p.n_t}, {"assurance", p.assurance}});
  return pts;
}

Json conflict_json(const std::string& name, const ConflictReport& r) {
  Json pmf = Json::array();
  for (double v : beta_binomial_pmf_series(r.n, r.prior)) pmf.push_back(v);
  return {{"name", name},
          {"observed", r.observed},
          {"n", r.n},
          {"prior", prior_json(r.prior)},
          {"percentile", r.percentile},
          {"tail_upper", r.tail_upper},
          {"pmf_observed", r.pmf_observed},
          {"flag", to_string(r.flag)},
          {"pmf", pmf}};
}

Json interval_json(const BetaParams& p, double alpha) {
  return {{"a", p.a},
          {"b", p.b},
          {"mean", p.mean()},
          {"lower", beta_quantile(alpha / 2.0, p)},
          {"upper", beta_quantile(1.0 - alpha / 2.0, p)}};
}

}  // namespace

RunResult run_sample_size(const RunConfig& c) {
  AssuranceEngine engine(c.priors, c.design, exec_of(c));
  const auto n_star = engine.min_sample_size(c.cap);
  Json r{{"n_star", optional_int(n_star)},
         {"found", n_star.has_value()},
         {"cap", c.cap},
         {"target", c.design.assurance_target},
         {"assurance", engine.assurance(n_star.value_or(c.cap))}};
  if (c.output.include_curve) r["curve"] = points_json(engine.curve(c.n_t_max));
  return {rounded(r), n_star.has_value()};
}

Json run_curve(const RunConfig& c) {
  const AssuranceCurve curve = assurance_curve(c.n_t_max, c.priors, c.design, exec_of(c));
  return rounded(Json{{"n_t_max", c.n_t_max},
                      {"target", c.design.assurance_target},
                      {"n_star", optional_int(curve.n_star)},
                      {"points", points_json(curve)}});
}

Json run_sensitivity(const RunConfig& c) {
  const auto& s = c.sensitivity;
  std::int64_t n_eval = 0;
  if (s.n_eval) {
    n_eval = *s.n_eval;
  } else {
    const auto n_star = min_sample_size(c.priors, c.design, c.cap, exec_of(c));
    if (!n_star) throw InfeasibleAnalysis("sensitivity: no sample size under the base priors within the cap");
    n_eval = *n_star;
  }
  SensitivityReport report;
  try {
    report = sensitivity_scan(c.priors, c.design, s.vary, s.epsilon, s.angles, n_eval, c.cap, exec_of(c));
  } catch (const InfeasibleContour& e) {
    throw InfeasibleAnalysis(e.what());
  }
  Json pts = Json::array();
  for (const auto& p : report.points) {
    pts.push_back({{"phi", p.point.phi},
                   {"r", p.point.r},
                   {"a", p.point.params.a},
                   {"b", p.point.params.b},
                   {"feasible", p.point.feasible},
                   {"n_star", optional_int(p.point.feasible ? p.n_star : std::nullopt)},
                   {"assurance", p.assurance_at_eval}});
  }
  return rounded(Json{{"vary", to_string(report.vary)},
                      {"epsilon", report.epsilon},
                      {"angles", s.angles},
                      {"n_eval", report.n_eval},
                      {"n_min", report.n_min},
                      {"n_max", report.n_max},
                      {"a_min", report.a_min},
                      {"a_max", report.a_max},
                      {"infeasible", report.infeasible},
                      {"not_found", report.not_found},
                      {"points", pts}});
}

Json run_conflict(const RunConfig& c) {
  if (!c.conflict.observed) throw ConfigError("study.conflict.observed: required");
  const auto& t = *c.conflict.observed;
  const double sl = c.conflict.suspect_level;
  const double cl = c.conflict.conflict_level;
  Json checks = Json::array();
  checks.push_back(conflict_json("prevalence", prior_predictive_check(t.diseased(), t.total(), c.priors.prev, sl, cl)));
  checks.push_back(conflict_json("sensitivity", prior_predictive_check(t.n11, t.diseased(), c.priors.sens, sl, cl)));
  checks.push_back(
      conflict_json("specificity", prior_predictive_check(t.n22, t.non_diseased(), c.priors.spec, sl, cl)));
  return rounded(Json{{"observed", {{"n11", t.n11}, {"n12", t.n12}, {"n21", t.n21}, {"n22", t.n22}}},
                      {"suspect_level", sl},
                      {"conflict_level", cl},
                      {"checks", checks}});
}

Json run_compare(const RunConfig& c, const ProgressFn& progress) {
  if (c.compare.study == CompareStudy::grid) {
    Json rows = Json::array();
    for (const auto& r : scenario_grid(c.compare.grid, exec_of(c), progress)) {
      rows.push_back({{"method", r.method},
                      {"lambda", r.lambda},
                      {"rho", r.rho},
                      {"av_size", r.av_size},
                      {"n_group", optional_int(r.n_group)},
                      {"n_total", optional_int(r.n_total)}});
    }
    return rounded(Json{{"study", "grid"}, {"rows", rows}});
  }
  const WidthStudyResult res = width_study(c.compare.widths, exec_of(c), progress);
  Json samples = Json::array();
  for (const auto& s : res.samples) {
    samples.push_back({{"method", s.method},
                       {"rep", s.rep},
                       {"lambda", s.lambda},
                       {"rho", s.rho},
                       {"n_total", optional_int(s.n_total)},
                       {"width", s.n_total ? Json(s.width) : Json(nullptr)}});
  }
  Json summary = Json::array();
  for (const auto& s : res.summary) {
    summary.push_back({{"method", s.method},
                       {"count", s.count},
                       {"missing", s.missing},
                       {"median", s.median},
                       {"q25", s.q25},
                       {"q70", s.q70},
                       {"q75", s.q75}});
  }
  return rounded(Json{{"study", "widths"}, {"summary", summary}, {"samples", samples}});
}

Json run_case_study_vap(const RunConfig& c) {
  const double alpha = c.design.interval.alpha;
  AssuranceEngine engine(c.priors, c.design, exec_of(c));
  const auto n_star = engine.min_sample_size(c.cap);
  const AssuranceCurve curve = engine.curve(c.n_t_max);

  Json sensitivity = Json::object();
  for (PriorSlot slot : {PriorSlot::sens, PriorSlot::prev}) {
    RunConfig sc = c;
    sc.sensitivity.vary = slot;
    sensitivity[to_string(slot)] = run_sensitivity(sc);
    sensitivity[to_string(slot)].erase("points");
  }

  const ContingencyTable t = c.conflict.observed.value_or(ContingencyTable(51, 55, 2, 42));
  const BetaParams sens_post = posterior_update(c.priors.sens, t.n11, t.n21);
  const BetaParams prev_post = posterior_update(c.priors.prev, t.diseased(), t.non_diseased());
  const BetaParams prev_flat = posterior_update(BetaParams(1, 1), t.diseased(), t.non_diseased());

  RunConfig cc = c;
  cc.conflict.observed = t;
  Json conflict = run_conflict(cc);
  for (auto& check : conflict["checks"]) check.erase("pmf");

  return rounded(Json{{"priors", {{"sens", prior_json(c.priors.sens)}, {"prev", prior_json(c.priors.prev)}}},
                      {"sample_size",
                       {{"n_star", optional_int(n_star)},
                        {"assurance_at_n_star", n_star ? Json(engine.assurance(*n_star)) : Json(nullptr)},
                        {"n_t_max", c.n_t_max},
                        {"assurance_at_n_t_max", engine.assurance(c.n_t_max)}}},
                      {"curve", points_json(curve)},
                      {"sensitivity", sensitivity},
                      {"posterior",
                       {{"sens", interval_json(sens_post, alpha)},
                        {"prev", interval_json(prev_post, alpha)},
                        {"prev_flat_prior", interval_json(prev_flat, alpha)}}},
                      {"conflict", conflict}});
}

std::string curve_csv(const Json& curve) {
  std::ostringstream out;
  out << "n_t,assurance\n";
  for (const auto& p : curve.at("points")) {
    out << p.at("n_t").get<std::int64_t>() << ',' << format_number(p.at("assurance").get<double>()) << '\n';
  }
  return out.str();
}

namespace {

std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string compare_csv(const Json& compare) {
  std::ostringstream out;
  if (compare.at("study") == "grid") {
    const char* cols[] = {"method", "lambda", "rho", "av_size", "n_group", "n_total"};
    out << "method,lambda,rho,av_size,n_group,n_total\n";
    for (const auto& r : compare.at("rows")) {
      for (std::size_t i = 0; i < std::size(cols); ++i) out << (i ? "," : "") << cell(r.at(cols[i]));
      out << '\n';
    }
    return out.str();
  }
  const char* cols[] = {"method", "rep", "lambda", "rho", "n_total", "width"};
  out << "method,rep,lambda,rho,n_total,width\n";
  for (const auto& r : compare.at("samples")) {
    for (std::size_t i = 0; i < std::size(cols); ++i) out << (i ? "," : "") << cell(r.at(cols[i]));
    out << '\n';
  }
  return out.str();
}

}  // namespace assuredx
