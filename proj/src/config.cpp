#include "assuredx/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <tuple>
#include <vector>

namespace assuredx {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::int64_t get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

double get_probability(const Json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0 && v < 1.0)) fail(path, "must lie in (0, 1)");
  return v;
}

std::int64_t get_positive(const Json& j, const std::string& path) {
  const std::int64_t v = get_int(j, path);
  if (v < 1) fail(path, "must be >= 1");
  return v;
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class T>
std::vector<T> get_list(const Json& j, const std::string& path, T (*one)(const Json&, const std::string&)) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(one(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<double, double> get_range(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [low, high]");
  const double lo = get_probability(j[0], path + "[0]");
  const double hi = get_probability(j[1], path + "[1]");
  if (!(lo <= hi)) fail(path, "low must not exceed high");
  return {lo, hi};
}

Json prior_json(const BetaParams& p) { return Json{{"a", p.a}, {"b", p.b}}; }

PriorSlot parse_slot(const std::string& s, const std::string& path) {
  if (s == "sens") return PriorSlot::sens;
  if (s == "spec") return PriorSlot::spec;
  if (s == "prev") return PriorSlot::prev;
  fail(path, "expected one of sens, spec, prev");
}

Measure parse_measure(const std::string& s, const std::string& path) {
  if (s == "sens") return Measure::sensitivity;
  if (s == "spec") return Measure::specificity;
  if (s == "both") return Measure::both;
  fail(path, "expected one of sens, spec, both");
}

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::sensitivity: return "sens";
    case Measure::specificity: return "spec";
    case Measure::both: return "both";
  }
  return "sens";
}

ContingencyTable parse_table(const Json& j, const std::string& path) {
  check_keys(j, path, {"n11", "n12", "n21", "n22"});
  std::int64_t cells[4];
  const char* names[] = {"n11", "n12", "n21", "n22"};
  for (int i = 0; i < 4; ++i) {
    if (!j.contains(names[i])) fail(join(path, names[i]), "required");
    cells[i] = get_int(j.at(names[i]), join(path, names[i]));
    if (cells[i] < 0) fail(join(path, names[i]), "must be >= 0");
  }
  return {cells[0], cells[1], cells[2], cells[3]};
}

void parse_priors(const Json& j, RunConfig& c) {
  check_keys(j, "priors", {"sens", "spec", "prev", "analysis_sens", "analysis_spec"});
  if (j.contains("sens")) c.priors.sens = parse_prior(j["sens"], "priors.sens");
  if (j.contains("spec")) c.priors.spec = parse_prior(j["spec"], "priors.spec");
  if (j.contains("prev")) c.priors.prev = parse_prior(j["prev"], "priors.prev");
  if (j.contains("analysis_sens")) c.priors.analysis_sens = parse_prior(j["analysis_sens"], "priors.analysis_sens");
  if (j.contains("analysis_spec")) c.priors.analysis_spec = parse_prior(j["analysis_spec"], "priors.analysis_spec");
}

void parse_design(const Json& j, RunConfig& c) {
  check_keys(j, "design", {"measure", "width", "width_spec", "alpha", "sided", "assurance"});
  auto& d = c.design;
  if (j.contains("measure")) d.measure = parse_measure(get_string(j["measure"], "design.measure"), "design.measure");
  if (j.contains("width")) d.w_star_sens = get_probability(j["width"], "design.width");
  if (j.contains("width_spec")) d.w_star_spec = get_probability(j["width_spec"], "design.width_spec");
  if (j.contains("alpha")) d.interval.alpha = get_probability(j["alpha"], "design.alpha");
  if (j.contains("sided")) {
    const std::string s = get_string(j["sided"], "design.sided");
    if (s == "two") {
      d.interval.sidedness = Sidedness::two_sided;
    } else if (s == "lower") {
      d.interval.sidedness = Sidedness::one_sided_lower;
    } else {
      fail("design.sided", "expected one of two, lower");
    }
  }
  if (j.contains("assurance")) d.assurance_target = get_probability(j["assurance"], "design.assurance");
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void parse_study(const Json& j, RunConfig& c) {
  check_keys(j, "study", {"cap", "n_t_max", "seed", "threads", "sensitivity", "conflict", "compare"});
  if (j.contains("cap")) c.cap = get_positive(j["cap"], "study.cap");
  if (j.contains("n_t_max")) c.n_t_max = get_positive(j["n_t_max"], "study.n_t_max");
  if (j.contains("seed")) {
    const Json& seed = j["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      fail("study.seed", "expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    const auto t = get_positive(j["threads"], "study.threads");
    c.threads = static_cast<unsigned>(std::min<std::int64_t>(t, 256));
  }
  if (j.contains("sensitivity")) {
    const Json& s = j["sensitivity"];
    const std::string p = "study.sensitivity";
    check_keys(s, p, {"vary", "epsilon", "angles", "n_eval"});
    if (s.contains("vary")) c.sensitivity.vary = parse_slot(get_string(s["vary"], p + ".vary"), p + ".vary");
    if (s.contains("epsilon")) {
      const double e = get_number(s["epsilon"], p + ".epsilon");
      // Distances of one or more are unreachable; the scan reports that.
      if (!(e >= 0.0)) fail(p + ".epsilon", "must be >= 0");
      c.sensitivity.epsilon = e;
    }
    if (s.contains("angles")) {
      const auto a = get_int(s["angles"], p + ".angles");
      if (a < 4 || a > 4096) fail(p + ".angles", "must lie in [4, 4096]");
      c.sensitivity.angles = static_cast<int>(a);
    }
    if (s.contains("n_eval")) c.sensitivity.n_eval = get_positive(s["n_eval"], p + ".n_eval");
  }
  if (j.contains("conflict")) {
    const Json& s = j["conflict"];
    const std::string p = "study.conflict";
    check_keys(s, p, {"observed", "suspect_level", "conflict_level"});
    if (s.contains("observed")) c.conflict.observed = parse_table(s["observed"], p + ".observed");
    if (s.contains("suspect_level")) c.conflict.suspect_level = get_probability(s["suspect_level"], p + ".suspect_level");
    if (s.contains("conflict_level")) c.conflict.conflict_level = get_probability(s["conflict_level"], p + ".conflict_level");
    if (!(c.conflict.suspect_level > 0.5 && c.conflict.suspect_level < c.conflict.conflict_level)) {
      fail(p, "need 0.5 < suspect_level < conflict_level < 1");
    }
  }
  if (j.contains("compare")) {
    const Json& s = j["compare"];
    const std::string p = "study.compare";
    check_keys(s, p, {"study", "lambdas", "rhos", "av_sizes", "flat_design_av_size", "reps", "av_size",
                      "width_reps", "lambda_range", "rho_range"});
    auto& g = c.compare.grid;
    auto& w = c.compare.widths;
    if (s.contains("study")) {
      const std::string st = get_string(s["study"], p + ".study");
      if (st == "grid") {
        c.compare.study = CompareStudy::grid;
      } else if (st == "widths") {
        c.compare.study = CompareStudy::widths;
      } else {
        fail(p + ".study", "expected one of grid, widths");
      }
    }
    if (s.contains("lambdas")) g.lambdas = get_list<double>(s["lambdas"], p + ".lambdas", get_probability);
    if (s.contains("rhos")) g.rhos = get_list<double>(s["rhos"], p + ".rhos", get_probability);
    if (s.contains("av_sizes")) {
      g.av_sizes.clear();
      for (auto v : get_list<std::int64_t>(s["av_sizes"], p + ".av_sizes", get_positive)) {
        g.av_sizes.push_back(static_cast<int>(std::min<std::int64_t>(v, 1000000)));
      }
    }
    if (s.contains("flat_design_av_size")) {
      g.flat_design_av_size = static_cast<int>(std::min<std::int64_t>(get_positive(s["flat_design_av_size"], p + ".flat_design_av_size"), 1000000));
    }
    if (s.contains("reps")) {
      const auto r = get_int(s["reps"], p + ".reps");
      if (r < 1000) fail(p + ".reps", "must be >= 1000");
      g.reps = w.sim_reps = r;
    }
    if (s.contains("av_size")) {
      const auto a = get_int(s["av_size"], p + ".av_size");
      if (a < 2) fail(p + ".av_size", "must be >= 2");
      w.av_size = static_cast<int>(std::min<std::int64_t>(a, 1000000));
    }
    if (s.contains("width_reps")) w.reps = get_positive(s["width_reps"], p + ".width_reps");
    if (s.contains("lambda_range")) std::tie(w.lambda_lo, w.lambda_hi) = get_range(s["lambda_range"], p + ".lambda_range");
    if (s.contains("rho_range")) std::tie(w.rho_lo, w.rho_hi) = get_range(s["rho_range"], p + ".rho_range");
  }
}

void parse_output(const Json& j, RunConfig& c) {
  check_keys(j, "output", {"path", "format", "include_curve"});
  if (j.contains("path")) c.output.path = get_string(j["path"], "output.path");
  if (j.contains("format")) {
    const std::string f = get_string(j["format"], "output.format");
    if (f != "json" && f != "csv") fail("output.format", "expected one of json, csv");
    c.output.format = f;
  }
  if (j.contains("include_curve")) {
    if (!j["include_curve"].is_boolean()) fail("output.include_curve", "expected a boolean");
    c.output.include_curve = j["include_curve"].get<bool>();
  }
}

// Study-level settings that the comparison engines read from the design.
void sync_compare(RunConfig& c) {
  auto& g = c.compare.grid;
  auto& w = c.compare.widths;
  g.alpha = w.alpha = c.design.interval.alpha;
  g.beta = w.beta = c.design.assurance_target;
  g.w_star = w.w_star = c.design.w_star_sens;
  g.seed = w.seed = c.seed;
  g.cap = w.cap = c.cap;
}

}  // namespace

BetaParams parse_prior(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  try {
    if (j.contains("base")) {
      check_keys(j, path, {"base", "successes", "failures", "discount"});
      const BetaParams base = parse_prior(j["base"], join(path, "base"));
      const double s = j.contains("successes") ? get_number(j["successes"], join(path, "successes")) : 0.0;
      const double f = j.contains("failures") ? get_number(j["failures"], join(path, "failures")) : 0.0;
      const double d = j.contains("discount") ? get_number(j["discount"], join(path, "discount")) : 1.0;
      if (s < 0.0) fail(join(path, "successes"), "must be >= 0");
      if (f < 0.0) fail(join(path, "failures"), "must be >= 0");
      if (!(d >= 0.0 && d <= 1.0)) fail(join(path, "discount"), "must lie in [0, 1]");
      return posterior_update(base, s, f, d);
    }
    if (j.contains("mean") || j.contains("ess")) {
      check_keys(j, path, {"mean", "ess"});
      if (!j.contains("mean") || !j.contains("ess")) fail(path, "mean and ess are both required");
      return BetaParams::from_mean_ess(get_probability(j["mean"], join(path, "mean")),
                                       get_number(j["ess"], join(path, "ess")));
    }
    check_keys(j, path, {"a", "b"});
    if (!j.contains("a") || !j.contains("b")) fail(path, "a and b are both required");
    return BetaParams(get_number(j["a"], join(path, "a")), get_number(j["b"], join(path, "b")));
  } catch (const std::domain_error& e) {
    fail(path, e.what());
  }
}

RunConfig parse_config(const Json& j) {
  check_keys(j, "", {"priors", "design", "study", "output"});
  RunConfig c;
  if (j.contains("priors")) parse_priors(j["priors"], c);
  if (j.contains("design")) {
    parse_design(j["design"], c);
  } else {
    try {
      c.design.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("study")) parse_study(j["study"], c);
  if (j.contains("output")) parse_output(j["output"], c);
  sync_compare(c);
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json priors{{"sens", prior_json(c.priors.sens)},
              {"spec", prior_json(c.priors.spec)},
              {"prev", prior_json(c.priors.prev)}};
  if (c.priors.analysis_sens) priors["analysis_sens"] = prior_json(*c.priors.analysis_sens);
  if (c.priors.analysis_spec) priors["analysis_spec"] = prior_json(*c.priors.analysis_spec);

  Json design{{"measure", measure_name(c.design.measure)},
              {"width", c.design.w_star_sens},
              {"alpha", c.design.interval.alpha},
              {"sided", c.design.interval.sidedness == Sidedness::two_sided ? "two" : "lower"},
              {"assurance", c.design.assurance_target}};
  if (c.design.w_star_spec) design["width_spec"] = *c.design.w_star_spec;

  Json sensitivity{{"vary", to_string(c.sensitivity.vary)},
                   {"epsilon", c.sensitivity.epsilon},
                   {"angles", c.sensitivity.angles}};
  if (c.sensitivity.n_eval) sensitivity["n_eval"] = *c.sensitivity.n_eval;
  Json conflict{{"suspect_level", c.conflict.suspect_level}, {"conflict_level", c.conflict.conflict_level}};
  if (c.conflict.observed) {
    const auto& t = *c.conflict.observed;
    conflict["observed"] = {{"n11", t.n11}, {"n12", t.n12}, {"n21", t.n21}, {"n22", t.n22}};
  }
  const auto& g = c.compare.grid;
  const auto& w = c.compare.widths;
  Json compare{{"study", c.compare.study == CompareStudy::grid ? "grid" : "widths"},
               {"lambdas", g.lambdas},
               {"rhos", g.rhos},
               {"av_sizes", g.av_sizes},
               {"flat_design_av_size", g.flat_design_av_size},
               {"reps", g.reps},
               {"av_size", w.av_size},
               {"width_reps", w.reps},
               {"lambda_range", {w.lambda_lo, w.lambda_hi}},
               {"rho_range", {w.rho_lo, w.rho_hi}}};
  Json study{{"cap", c.cap},
             {"n_t_max", c.n_t_max},
             {"seed", c.seed},
             {"threads", c.threads},
             {"sensitivity", sensitivity},
             {"conflict", conflict},
             {"compare", compare}};
  Json output{{"include_curve", c.output.include_curve}};
  if (c.output.format) output["format"] = *c.output.format;
  if (c.output.path) output["path"] = *c.output.path;
  return Json{{"priors", priors}, {"design", design}, {"study", study}, {"output", output}};
}

RunConfig vap_config() {
  RunConfig c;
  // Selection-study priors updated with the biomarker selection counts.
  c.priors.sens = posterior_update(BetaParams(9.9, 1.1), 16, 1);
  c.priors.prev = posterior_update(BetaParams(12, 43), 17, 55);
  c.priors.spec = posterior_update(BetaParams(1, 1), 20, 35);
  c.design.measure = Measure::sensitivity;
  c.design.w_star_sens = 0.16;
  c.design.interval = IntervalSpec(0.05, Sidedness::two_sided);
  c.design.assurance_target = 0.8;
  c.n_t_max = 150;
  c.conflict.observed = ContingencyTable(51, 55, 2, 42);
  sync_compare(c);
  return c;
}

}  // namespace assuredx
