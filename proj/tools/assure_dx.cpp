// assure_dx: sample sizes, assurance curves, prior sensitivity, conflict
// checks and comparator studies from the command line.
//
// Exit status: 0 success, 1 configuration error, 2 no sample size within
// the cap, 3 infeasible analysis.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "assuredx/config.hpp"
#include "assuredx/report.hpp"

using namespace assuredx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNotFound = 2;
constexpr int kExitInfeasible = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, format, measure, sided;
  std::optional<double> width, width_spec, alpha, assurance;
  std::optional<std::int64_t> cap, threads, n_max;
  std::optional<std::string> sens, spec, prev, analysis_sens, analysis_spec;
  bool include_curve = false;
  // sensitivity
  std::optional<std::string> vary;
  std::optional<double> epsilon;
  std::optional<std::int64_t> angles, n_eval;
  // conflict
  std::optional<std::string> observed;
  std::optional<double> suspect_level, conflict_level;
  // compare
  std::optional<std::string> study, lambdas, rhos, av_sizes;
  std::optional<std::int64_t> reps, width_reps, av_size;
};

std::vector<double> split_numbers(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": expected comma separated numbers");
    }
  }
  return out;
}

Json prior_flag(const std::string& s, const std::string& flag) {
  const auto v = split_numbers(s, flag);
  if (v.size() != 2) throw ConfigError(flag + ": expected A,B");
  return Json{{"a", v[0]}, {"b", v[1]}};
}

Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config: " + std::string(e.what()));
  }
}

// Flags win over the file.
Json overlay(Json j, const Flags& f) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  auto set = [&](const char* section, const char* key, const Json& v) { j[section][key] = v; };
  if (f.sens) j["priors"]["sens"] = prior_flag(*f.sens, "--sens");
  if (f.spec) j["priors"]["spec"] = prior_flag(*f.spec, "--spec");
  if (f.prev) j["priors"]["prev"] = prior_flag(*f.prev, "--prev");
  if (f.analysis_sens) j["priors"]["analysis_sens"] = prior_flag(*f.analysis_sens, "--analysis-sens");
  if (f.analysis_spec) j["priors"]["analysis_spec"] = prior_flag(*f.analysis_spec, "--analysis-spec");
  if (f.measure) set("design", "measure", *f.measure);
  if (f.width) set("design", "width", *f.width);
  if (f.width_spec) set("design", "width_spec", *f.width_spec);
  if (f.alpha) set("design", "alpha", *f.alpha);
  if (f.assurance) set("design", "assurance", *f.assurance);
  if (f.sided) set("design", "sided", *f.sided);
  if (f.cap) set("study", "cap", *f.cap);
  if (f.n_max) set("study", "n_t_max", *f.n_max);
  if (f.seed) set("study", "seed", *f.seed);
  if (f.threads) set("study", "threads", *f.threads);
  if (f.vary) j["study"]["sensitivity"]["vary"] = *f.vary;
  if (f.epsilon) j["study"]["sensitivity"]["epsilon"] = *f.epsilon;
  if (f.angles) j["study"]["sensitivity"]["angles"] = *f.angles;
  if (f.n_eval) j["study"]["sensitivity"]["n_eval"] = *f.n_eval;
  if (f.observed) {
    const auto v = split_numbers(*f.observed, "--observed");
    if (v.size() != 4) throw ConfigError("--observed: expected N11,N12,N21,N22");
    Json t;
    const char* names[] = {"n11", "n12", "n21", "n22"};
    for (int i = 0; i < 4; ++i) {
      if (v[i] != std::floor(v[i])) throw ConfigError("--observed: counts must be integers");
      t[names[i]] = static_cast<std::int64_t>(v[i]);
    }
    j["study"]["conflict"]["observed"] = t;
  }
  if (f.suspect_level) j["study"]["conflict"]["suspect_level"] = *f.suspect_level;
  if (f.conflict_level) j["study"]["conflict"]["conflict_level"] = *f.conflict_level;
  if (f.study) j["study"]["compare"]["study"] = *f.study;
  if (f.lambdas) j["study"]["compare"]["lambdas"] = split_numbers(*f.lambdas, "--lambdas");
  if (f.rhos) j["study"]["compare"]["rhos"] = split_numbers(*f.rhos, "--rhos");
  if (f.av_sizes) {
    Json sizes = Json::array();
    for (double v : split_numbers(*f.av_sizes, "--av-sizes")) sizes.push_back(static_cast<std::int64_t>(v));
    j["study"]["compare"]["av_sizes"] = sizes;
  }
  if (f.reps) j["study"]["compare"]["reps"] = *f.reps;
  if (f.width_reps) j["study"]["compare"]["width_reps"] = *f.width_reps;
  if (f.av_size) j["study"]["compare"]["av_size"] = *f.av_size;
  if (f.out) set("output", "path", *f.out);
  if (f.format) set("output", "format", *f.format);
  if (f.include_curve) set("output", "include_curve", true);
  return j;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--out", f.out, "Write the result to this path instead of stdout");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--measure", f.measure, "Accuracy measure")->check(CLI::IsMember({"sens", "spec", "both"}));
  cmd->add_option("--width", f.width, "Target interval width for sensitivity");
  cmd->add_option("--width-spec", f.width_spec, "Target interval width for specificity");
  cmd->add_option("--alpha", f.alpha, "Interval level parameter");
  cmd->add_option("--assurance", f.assurance, "Assurance target");
  cmd->add_option("--sided", f.sided, "Interval type")->check(CLI::IsMember({"two", "lower"}));
  cmd->add_option("--cap", f.cap, "Largest total sample size searched");
  cmd->add_option("--threads", f.threads, "Worker threads");
  cmd->add_option("--sens", f.sens, "Sensitivity prior A,B");
  cmd->add_option("--spec", f.spec, "Specificity prior A,B");
  cmd->add_option("--prev", f.prev, "Prevalence prior A,B");
  cmd->add_option("--analysis-sens", f.analysis_sens, "Sensitivity analysis prior A,B");
  cmd->add_option("--analysis-spec", f.analysis_spec, "Specificity analysis prior A,B");
}

void emit(const std::string& text, const RunConfig& c) {
  if (c.output.path) {
    std::ofstream out(*c.output.path, std::ios::binary);
    if (!out) throw ConfigError("--out: cannot write " + *c.output.path);
    out << text;
  } else {
    std::cout << text;
  }
}

std::string as_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian assurance sample sizes for diagnostic accuracy studies"};
  app.require_subcommand(1);
  Flags f;

  auto* ss = app.add_subcommand("sample-size", "Smallest total sample size reaching the assurance target");
  add_common(ss, f);
  ss->add_flag("--include-curve", f.include_curve, "Add the curve up to --n-max");
  ss->add_option("--n-max", f.n_max, "Curve length for --include-curve");

  auto* curve = app.add_subcommand("curve", "Assurance for n_t = 1..n-max (CSV n_t,assurance by default)");
  add_common(curve, f);
  curve->add_option("--n-max", f.n_max, "Largest total sample size");

  auto* sens = app.add_subcommand("sensitivity", "Prior sensitivity over a distance contour");
  add_common(sens, f);
  sens->add_option("--vary", f.vary, "Prior to perturb")->check(CLI::IsMember({"sens", "spec", "prev"}));
  sens->add_option("--epsilon", f.epsilon, "Distance from the base prior");
  sens->add_option("--angles", f.angles, "Contour angles");
  sens->add_option("--n-eval", f.n_eval, "Sample size at which assurance is reported");

  auto* conflict = app.add_subcommand("conflict", "Prior predictive checks against an observed 2x2 table");
  add_common(conflict, f);
  conflict->add_option("--observed", f.observed, "Observed counts N11,N12,N21,N22");
  conflict->add_option("--suspect-level", f.suspect_level, "Tail level for a suspect flag");
  conflict->add_option("--conflict-level", f.conflict_level, "Tail level for a conflict flag");

  auto* compare = app.add_subcommand("compare", "Comparator scenario grid or interval width study (CSV by default)");
  add_common(compare, f);
  compare->add_option("--study", f.study, "Which study")->check(CLI::IsMember({"grid", "widths"}));
  compare->add_option("--lambdas", f.lambdas, "Grid sensitivities, comma separated");
  compare->add_option("--rhos", f.rhos, "Grid prevalences, comma separated");
  compare->add_option("--av-sizes", f.av_sizes, "Prior study sizes, comma separated");
  compare->add_option("--reps", f.reps, "Simulations per candidate size");
  compare->add_option("--width-reps", f.width_reps, "Replicates of the width study");
  compare->add_option("--av-size", f.av_size, "Prior study size in the width study");

  std::string case_name;
  auto* cs = app.add_subcommand("case-study", "Reproduce a worked example");
  add_common(cs, f);
  cs->add_option("name", case_name, "Case study")->required()->check(CLI::IsMember({"vap"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Json base = cs->parsed() ? config_to_json(vap_config()) : Json::object();
    if (!f.config.empty()) base = load_file(f.config);
    const RunConfig c = parse_config(overlay(base, f));

    if (ss->parsed()) {
      const RunResult r = run_sample_size(c);
      emit(as_json(r.result), c);
      if (!r.found) {
        std::cerr << "no sample size up to " << c.cap << " reaches assurance " << c.design.assurance_target << "\n";
        return kExitNotFound;
      }
    } else if (curve->parsed()) {
      const Json r = run_curve(c);
      emit(c.output.format.value_or("csv") == "csv" ? curve_csv(r) : as_json(r), c);
    } else if (sens->parsed()) {
      emit(as_json(run_sensitivity(c)), c);
    } else if (conflict->parsed()) {
      emit(as_json(run_conflict(c)), c);
    } else if (compare->parsed()) {
      const Json r = run_compare(c);
      emit(c.output.format.value_or("csv") == "csv" ? compare_csv(r) : as_json(r), c);
    } else if (cs->parsed()) {
      emit(as_json(run_case_study_vap(c)), c);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleAnalysis& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::domain_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
