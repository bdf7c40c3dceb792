#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gpulat/errors.hpp"

using namespace gpulat::cli;

namespace {

const std::vector<std::string> kOptNames = {"O0", "O1", "O2", "O3"};
const std::vector<std::string> kFormats = {"md", "markdown", "csv", "json"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gpulat: PTX instruction latency microbenchmarks"};
  app.set_config("--config", "", "defaults file (TOML/INI, one section per subcommand)");
  app.require_subcommand(1);

  ListArgs list;
  auto* list_cmd = app.add_subcommand("list", "list cataloged instructions");
  list_cmd->add_option("--category", list.category);
  list_cmd->add_option("--gpu", list.gpu, "only instructions this board can run");
  list_cmd->add_flag("--probes", list.probes, "include memory probe kernels");
  list_cmd->add_option("--format", list.format)->check(CLI::IsMember({"text", "json"}));

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "emit PTX kernels and a manifest");
  gen_cmd->add_option("--out", gen.out_dir);
  gen_cmd->add_option("--arch", gen.arch);
  gen_cmd->add_option("--category", gen.category);
  gen_cmd->add_option("--kernel", gen.kernels, "kernel id; repeatable");
  gen_cmd->add_flag("--literals", gen.literals, "materialize operands as immediates");
  gen_cmd->add_flag("!--no-probes", gen.probes);

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "plan and run the toolchain");
  build_cmd->add_option("--out", build.out_dir);
  build_cmd->add_option("--opt", build.opt_levels)->check(CLI::IsMember(kOptNames));
  build_cmd->add_option("--arch", build.arch);
  build_cmd->add_option("--l1", build.l1)->check(CLI::IsMember({"on", "off", "both"}));
  build_cmd->add_option("--category", build.category);
  build_cmd->add_option("--kernel", build.kernels);
  build_cmd->add_option("--toolchain", build.toolchain, "command template key");
  build_cmd->add_option("--templates", build.templates, "command template file");
  build_cmd->add_flag("--dry-run", build.dry_run, "print the command transcript only");
  build_cmd->add_flag("!--no-probes", build.probes);

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "measure the clock-read overhead");
  cal_cmd->add_option("--backend", cal.backend)->check(CLI::IsMember({"hw", "replay"}));
  cal_cmd->add_option("--fixtures", cal.fixtures);
  cal_cmd->add_option("--reps", cal.reps);
  cal_cmd->add_option("--arch", cal.arch);
  cal_cmd->add_option("--gpu", cal.gpu);
  cal_cmd->add_option("--opt", cal.opt)->check(CLI::IsMember(kOptNames));
  cal_cmd->add_option("--work-dir", cal.work_dir);

  MeasureArgs measure;
  auto add_measure_options = [&](CLI::App* cmd) {
    cmd->add_option("--fixtures", measure.fixtures, "fixture directory for replay");
    cmd->add_option("--reps", measure.reps);
    cmd->add_option("--gpu", measure.gpu);
    cmd->add_option("--arch", measure.arch);
    cmd->add_option("--opt", measure.opt_levels)->check(CLI::IsMember(kOptNames));
    cmd->add_option("--category", measure.category);
    cmd->add_flag("--probes", measure.probes);
    cmd->add_option("--report", measure.report)->check(CLI::IsMember(kFormats));
    cmd->add_option("--out", measure.out);
    cmd->add_option("--record", measure.record_dir, "write raw samples as fixtures");
    cmd->add_option("--templates", measure.templates);
    cmd->add_option("--work-dir", measure.work_dir);
    cmd->add_option("--toolchain", measure.toolchain, "toolchain the report views select");
  };
  auto* measure_cmd = app.add_subcommand("measure", "time kernels and aggregate");
  measure_cmd->add_option("--backend", measure.backend)->check(CLI::IsMember({"hw", "replay"}));
  add_measure_options(measure_cmd);
  auto* replay_cmd = app.add_subcommand("replay", "measure with the replay backend");
  add_measure_options(replay_cmd);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "render latency tables");
  report_cmd->add_option("--records", report.records, "records JSON");
  report_cmd->add_option("--fixtures", report.fixtures);
  report_cmd->add_option("--format", report.format)->check(CLI::IsMember(kFormats));
  report_cmd->add_option("--out", report.out);
  report_cmd->add_option("--toolchain", report.toolchain);

  DiffArgs diff;
  auto* diff_cmd = app.add_subcommand("diff", "compare against the reference tables");
  diff_cmd->add_option("--against", diff.against);
  diff_cmd->add_option("--fixtures", diff.fixtures);
  diff_cmd->add_option("--records", diff.records);
  diff_cmd->add_option("--tolerance", diff.tolerance, "ALU tolerance in cycles (0 = exact)");
  diff_cmd->add_option("--memory-tolerance", diff.memory_tolerance, "relative memory tolerance");
  diff_cmd->add_option("--threshold", diff.threshold, "minimum conforming fraction")->check(CLI::Range(0.0, 1.0));
  diff_cmd->add_option("--format", diff.format)->check(CLI::IsMember({"text", "md", "csv", "json"}));
  diff_cmd->add_option("--out", diff.out);

  ReferenceArgs reference;
  auto* ref_cmd = app.add_subcommand("reference", "dump or query the embedded tables");
  ref_cmd->add_option("--table", reference.table)->check(CLI::IsMember({"all", "alu", "memory", "cuda", "gpus"}));
  ref_cmd->add_option("--format", reference.format)->check(CLI::IsMember(kFormats));
  ref_cmd->add_option("--lookup", reference.lookup, "row key");
  ref_cmd->add_option("--gpu", reference.gpu);
  ref_cmd->add_option("--opt", reference.opt)->check(CLI::IsMember({"optimized", "non-optimized", "O0", "O3"}));
  ref_cmd->add_flag("--checksum", reference.checksum);
  ref_cmd->add_option("--data", reference.data, "load tables from a file instead");

  FixturesArgs fix;
  auto* fix_cmd = app.add_subcommand("fixtures", "write or check the reference fixture set");
  fix_cmd->add_option("--out", fix.out_dir);
  fix_cmd->add_flag("--check", fix.check, "report drift instead of writing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (list_cmd->parsed()) return cmd_list(list);
    if (gen_cmd->parsed()) return cmd_generate(gen);
    if (build_cmd->parsed()) return cmd_build(build);
    if (cal_cmd->parsed()) return cmd_calibrate(cal);
    if (measure_cmd->parsed()) return cmd_measure(measure);
    if (replay_cmd->parsed()) {
      measure.backend = "replay";
      return cmd_measure(measure);
    }
    if (report_cmd->parsed()) return cmd_report(report);
    if (diff_cmd->parsed()) return cmd_diff(diff);
    if (ref_cmd->parsed()) return cmd_reference(reference);
    if (fix_cmd->parsed()) return cmd_fixtures(fix);
  } catch (const gpulat::ConfigError& e) {
    print_error(e.code(), e.what());
    return kConfigError;
  } catch (const gpulat::ParseError& e) {
    print_error(e.code(), e.what());
    return kConfigError;
  } catch (const gpulat::SchemaError& e) {
    print_error(e.code(), e.what());
    return kConfigError;
  } catch (const gpulat::Error& e) {
    print_error(e.code(), e.what());
    return kFailure;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return kFailure;
  }
  return kFailure;
}
