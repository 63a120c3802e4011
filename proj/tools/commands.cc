// Copyright 2026 The fnlgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "fnlgen/errors.h"
#include "fnlgen/evalkit.h"
#include "fnlgen/gencheck.h"
#include "fnlgen/synth.h"
#include "fnlgen/trainer.h"
#include "json.hpp"

namespace fnlgen::cli {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Creates the output directory and echoes the effective configuration.
void prepare_out_dir(const CommandContext& ctx, std::string_view command) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
  write_text(ctx.out_dir / (std::string(command) + ".config.json"), ctx.config.effective_text);
}

std::string percent(std::size_t part, std::size_t whole) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1)
     << (whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole)) << '%';
  return os.str();
}

std::string cohort_stem(const fs::path& path) {
  std::string name = path.filename().string();
  for (std::string_view suffix : {".json", ".cohort"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.resize(name.size() - suffix.size());
    }
  }
  return name;
}

Cohort read_cohort(const CommandContext& ctx, const fs::path& path) {
  ctx.log(LogLevel::kInfo, "reading cohort " + path.string());
  Cohort c = load_cohort(path);
  if (c.exams.empty()) throw ConfigError("cohort " + path.string() + " has no exams");
  return c;
}

std::string shift_summary(const ShiftSpec& s) {
  if (s.is_identity()) return "identity";
  double norm = 0.0;
  for (double v : s.mean_shift) norm += v * v;
  std::ostringstream os;
  os << std::setprecision(4) << "|mean_shift|=" << std::sqrt(norm) << " cov_scale=" << s.cov_scale
     << " rotation=" << s.rotation_angle << " noise=" << s.noise_sigma;
  return os.str();
}

}  // namespace

LogLevel log_level_from_env() {
  const char* raw = std::getenv("FNLGEN_LOG");
  if (raw == nullptr) return LogLevel::kWarn;
  const std::string_view v(raw);
  if (v == "quiet") return LogLevel::kQuiet;
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void CommandContext::log(LogLevel level, std::string_view message) const {
  if (err == nullptr || level > log_level) return;
  static constexpr std::string_view kNames[] = {"", "error", "warn", "info", "debug"};
  *err << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

int cmd_generate(const CommandContext& ctx) {
  prepare_out_dir(ctx, "generate");
  const GenerateConfig& g = ctx.config.generate;
  for (const CohortSpec* spec : {&g.train, &g.test_internal, &g.test_shifted}) {
    const Cohort cohort = generate_cohort(*spec);
    save_cohort(cohort, ctx.out_dir / (spec->name + ".cohort.json"));
    write_text(ctx.out_dir / (spec->name + ".csv"), cohort_to_csv(cohort));

    std::size_t positives = 0, lo = std::numeric_limits<std::size_t>::max(), hi = 0, candidates = 0;
    for (const Exam& e : cohort.exams) {
      const std::size_t p = e.positive_count();
      positives += p;
      lo = std::min(lo, p);
      hi = std::max(hi, p);
      candidates += e.candidates.size();
    }
    *ctx.out << spec->name << ": " << cohort.exams.size() << " exams, " << candidates
             << " candidates, " << positives << " positives (" << lo << "-" << hi
             << " per exam), site " << to_string(spec->site) << ", shift "
             << shift_summary(spec->shift) << '\n';
  }
  return kExitOk;
}

int cmd_train(const CommandContext& ctx, const fs::path& cohort_path) {
  const Cohort cohort = read_cohort(ctx, cohort_path);
  prepare_out_dir(ctx, "train");
  const TrainConfig& tc = ctx.config.train;
  ctx.log(LogLevel::kInfo, "training for up to " + std::to_string(tc.max_steps) + " steps");
  const TrainResult r = train_model(tc, cohort.exams);
  save_bundle(r.bundle, ctx.out_dir / "bundle.json");
  write_text(ctx.out_dir / "train_log.csv", train_log_to_csv(r.log));

  const LsmDiagnostics diag =
      latent_diagnostics(positive_latents(r.bundle.network, cohort.exams), tc.fnl);
  std::ostream& out = *ctx.out;
  out << std::setprecision(6);
  out << "trained " << r.bundle.meta.steps << " steps"
      << (r.bundle.meta.baseline ? " (baseline, w_fnl = 0)" : "") << '\n';
  out << "batch fnl: first " << r.log.front().fnl << ", last " << r.log.back().fnl << '\n';
  out << "training positives: " << diag.n << ", fnl " << diag.fnl_value << ", mean |z| "
      << diag.mean_l2 << '\n';
  out << "psi " << r.bundle.psi << " (training sensitivity " << r.calibration.achieved_sensitivity
      << ", " << r.calibration.n_detected << "/" << r.calibration.n_positives << ")\n";
  if (!r.bundle.forced.warning().empty()) {
    ctx.log(LogLevel::kWarn, r.bundle.forced.warning());
  }
  return kExitOk;
}

int cmd_score(const CommandContext& ctx, const fs::path& bundle_path, const fs::path& cohort_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const Cohort cohort = read_cohort(ctx, cohort_path);
  if (cohort.spec.feature_dim != bundle.network.config().input_dim) {
    throw DimensionError("cohort features have dimension " + std::to_string(cohort.spec.feature_dim) +
                         " but the bundle expects " +
                         std::to_string(bundle.network.config().input_dim));
  }
  prepare_out_dir(ctx, "score");
  const std::vector<GenReport> reports = score_exams(bundle, cohort.exams, ctx.workers);
  const std::string name = cohort_stem(cohort_path);
  write_text(ctx.out_dir / (name + ".reports.csv"), reports_to_csv(reports));
  write_text(ctx.out_dir / (name + ".reports.json"), reports_to_text(reports));

  const StatusCounts c = count_statuses(reports);
  const double low_rate = static_cast<double>(c.low) / static_cast<double>(c.total());
  *ctx.out << name << ": " << c.total() << " exams, high " << c.high << " ("
           << percent(c.high, c.total()) << "), low " << c.low << " (" << percent(c.low, c.total())
           << "), indeterminate " << c.indeterminate << " ("
           << percent(c.indeterminate, c.total()) << ")\n";
  std::ostringstream alarm;
  alarm << std::fixed << std::setprecision(1) << 100.0 * ctx.config.alarm_low_rate << '%';
  if (low_rate > ctx.config.alarm_low_rate) {
    *ctx.out << "ALARM: low-generalizability rate " << percent(c.low, c.total()) << " exceeds "
             << alarm.str() << '\n';
  } else {
    *ctx.out << "low-generalizability rate " << percent(c.low, c.total()) << " within "
             << alarm.str() << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const CommandContext& ctx, const fs::path& bundle_path,
                 const std::vector<fs::path>& cohort_paths,
                 const std::vector<fs::path>& report_paths) {
  const ModelBundle bundle = load_bundle(bundle_path);
  std::vector<Exam> exams;
  for (const fs::path& p : cohort_paths) {
    Cohort c = read_cohort(ctx, p);
    for (Exam& e : c.exams) exams.push_back(std::move(e));
  }
  std::vector<GenReport> reports;
  for (const fs::path& p : report_paths) {
    for (GenReport& r : reports_from_text(read_text(p))) reports.push_back(std::move(r));
  }
  const std::vector<ScoredExam> scored = score_candidates(bundle.network, exams, ctx.workers);
  const StratifiedReport table = stratified_report(scored, reports);
  prepare_out_dir(ctx, "evaluate");
  const std::string csv = table_to_csv(table);
  write_text(ctx.out_dir / "table.csv", csv);
  for (const EvalStratum& s : table.strata) {
    if (s.curve) write_text(ctx.out_dir / ("curve_" + s.name + ".csv"), curve_to_csv(*s.curve));
  }
  *ctx.out << csv;
  return kExitOk;
}

int cmd_diagnose(const CommandContext& ctx, const fs::path& bundle_path,
                 const fs::path& positives_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  std::vector<Exam> exams;
  if (positives_path.extension() == ".csv") {
    exams = exams_from_csv(read_text(positives_path));
  } else {
    exams = load_cohort(positives_path).exams;
  }
  std::vector<std::vector<double>> positives;
  for (const Exam& e : exams) {
    for (const Candidate& c : e.candidates) {
      if (c.label == 1) positives.push_back(c.features);
    }
  }
  if (positives.empty()) {
    throw ConfigError("no labeled positives in " + positives_path.string());
  }
  const LsmDiagnostics d = dataset_lsm_diagnostics(bundle, positives);
  prepare_out_dir(ctx, "diagnose");
  nlohmann::ordered_json j;
  j["n"] = d.n;
  j["mean_l2"] = d.mean_l2;
  j["median_dist_origin"] = d.median_dist_origin;
  j["fnl"] = d.fnl_value;
  j["fnl_alarm"] = ctx.config.fnl_alarm;
  j["alarm"] = d.fnl_value > ctx.config.fnl_alarm;
  write_text(ctx.out_dir / "diagnostics.json", j.dump(2) + "\n");

  *ctx.out << std::setprecision(6) << "positives " << d.n << ", mean |z| " << d.mean_l2
           << ", median distance to origin " << d.median_dist_origin << ", fnl " << d.fnl_value
           << '\n';
  if (d.fnl_value > ctx.config.fnl_alarm) {
    *ctx.out << "ALARM: fnl " << d.fnl_value << " exceeds " << ctx.config.fnl_alarm << '\n';
    return kExitAlarm;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forced-latent generalizability checks on synthetic detection cohorts", "fnlgen"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Worker threads for exam-level scoring")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  app.add_option("--set", sets, "Override a config value: section.key=value (repeatable)")
      ->allow_extra_args(false);

  std::string cohort, bundle, positives;
  std::vector<std::string> cohorts, reports;
  auto* generate = app.add_subcommand("generate", "Write train, internal and shifted cohorts");
  auto* train = app.add_subcommand("train", "Train a model bundle on a cohort");
  train->add_option("--cohort", cohort, "Training cohort")->required();
  auto* score = app.add_subcommand("score", "Flag each exam's generalizability");
  score->add_option("--bundle", bundle, "Model bundle")->required();
  score->add_option("--cohort", cohort, "Cohort to score")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Stratified AFP tables and curves");
  evaluate->add_option("--bundle", bundle, "Model bundle")->required();
  evaluate->add_option("--cohort", cohorts, "Cohort files")->required();
  evaluate->add_option("--reports", reports, "Report files from score")->required();
  auto* diagnose = app.add_subcommand("diagnose", "Latent statistics of labeled positives");
  diagnose->add_option("--bundle", bundle, "Model bundle")->required();
  diagnose->add_option("--positives", positives, "Cohort JSON or candidate CSV")->required();
  for (CLI::App* sub : {generate, train, score, evaluate, diagnose}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CommandContext ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.log_level = log_level_from_env();
  ctx.out_dir = out_dir;
  ctx.workers = workers;
  try {
    ConfigSources src;
    if (!config_path.empty()) src.file = config_path;
    src.sets = sets;
    if (seed_opt->count() > 0) src.seed = seed;
    ctx.config = load_run_config(src);

    if (*generate) return cmd_generate(ctx);
    if (*train) return cmd_train(ctx, cohort);
    if (*score) return cmd_score(ctx, bundle, cohort);
    if (*evaluate) {
      std::vector<fs::path> cp(cohorts.begin(), cohorts.end());
      std::vector<fs::path> rp(reports.begin(), reports.end());
      return cmd_evaluate(ctx, bundle, cp, rp);
    }
    return cmd_diagnose(ctx, bundle, positives);
  } catch (const IoError& e) {
    err << "fnlgen: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "fnlgen: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "fnlgen: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fnlgen: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fnlgen::cli
