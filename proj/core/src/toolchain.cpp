#include "gpulat/toolchain.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded.hpp"
#include "gpulat/errors.hpp"
#include "gpulat/ptx_validator.hpp"
#include "gpulat/subprocess.hpp"

namespace gpulat::toolchain {

using nlohmann::json;

namespace {

std::map<std::string, std::string> string_map(const json& j) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
  return out;
}

void apply_fields(ToolchainTemplate& t, const json& j) {
  if (j.contains("optFlags")) t.opt_flags = string_map(j.at("optFlags"));
  if (j.contains("hostOptFlags")) t.host_opt_flags = string_map(j.at("hostOptFlags"));
  if (j.contains("archFlag")) t.arch_flag = j.at("archFlag").get<std::string>();
  if (j.contains("l1Flags")) t.l1_flags = string_map(j.at("l1Flags"));
  if (j.contains("steps")) {
    t.steps.clear();
    for (const auto& s : j.at("steps")) {
      TemplateStep step;
      step.name = s.at("name").get<std::string>();
      step.tool = s.at("tool").get<std::string>();
      step.args = s.at("args").get<std::vector<std::string>>();
      step.inputs = s.value("inputs", std::vector<std::string>{});
      step.outputs = s.value("outputs", std::vector<std::string>{});
      step.stdout_file = s.value("stdout", std::string{});
      t.steps.push_back(std::move(step));
    }
  }
}

}  // namespace

CommandTemplates CommandTemplates::parse(std::string_view json_text) {
  CommandTemplates out;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("schemaVersion", 0) != 1) throw ConfigError("command templates: unsupported schemaVersion");
    const json& chains = doc.at("toolchains");
    std::set<std::string> resolving;
    // Resolve inheritance depth-first.
    std::function<ToolchainTemplate(const std::string&)> resolve = [&](const std::string& name) {
      if (!chains.contains(name)) throw ConfigError("command templates: unknown toolchain '" + name + "'");
      if (!resolving.insert(name).second) throw ConfigError("command templates: inheritance cycle at '" + name + "'");
      const json& j = chains.at(name);
      ToolchainTemplate t;
      if (j.contains("inherits")) t = resolve(j.at("inherits").get<std::string>());
      apply_fields(t, j);
      resolving.erase(name);
      return t;
    };
    for (const auto& [name, _] : chains.items()) out.toolchains_[name] = resolve(name);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("command templates: ") + e.what());
  }
  if (!out.toolchains_.contains("default")) throw ConfigError("command templates: no 'default' toolchain");
  for (const auto& [name, t] : out.toolchains_) {
    if (t.steps.empty()) throw ConfigError("command templates: toolchain '" + name + "' has no steps");
  }
  return out;
}

CommandTemplates CommandTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const CommandTemplates& CommandTemplates::builtin() {
  static const CommandTemplates t = parse(embedded::command_templates());
  return t;
}

const ToolchainTemplate& CommandTemplates::for_version(std::string_view version) const {
  auto it = toolchains_.find(version);
  if (it == toolchains_.end()) it = toolchains_.find("default");
  return it->second;
}

std::vector<std::string> CommandTemplates::versions() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : toolchains_) out.push_back(k);
  return out;
}

std::string CommandStep::command_line() const {
  std::string s = executable;
  for (const auto& a : args) s += " " + a;
  if (!stdout_file.empty()) s += " > " + stdout_file;
  return s;
}

std::vector<std::string> CommandPlan::initial_inputs() const {
  std::vector<std::string> out;
  for (const auto& s : sources) out.push_back(s.path);
  return out;
}

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Planned: return "planned";
    case StepStatus::Succeeded: return "succeeded";
    case StepStatus::Failed: return "failed";
    case StepStatus::Skipped: return "skipped";
  }
  return "?";
}

std::string format_transcript(const CommandPlan& plan) {
  std::ostringstream os;
  os << "# gpulat build plan\n";
  os << "# kernel: " << plan.kernel_id << "\n";
  os << "# opt: " << plan.opt_level << "  l1: " << plan.l1_mode << "  arch: " << plan.target_arch
     << "  toolchain: " << plan.toolchain_version << "\n";
  os << "# workdir: " << plan.work_dir.string() << "\n";
  os << "# sources:";
  for (const auto& s : plan.sources) os << " " << s.path;
  os << "\n";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    os << "[" << i << "] " << plan.steps[i].command_line() << "\n";
  }
  os << "# artifact: " << plan.artifact << "\n";
  return os.str();
}

namespace {

std::string expand(const std::string& text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    const auto close = text.find('}', open);
    if (close == std::string::npos) throw ConfigError("unterminated placeholder in '" + text + "'");
    out += text.substr(pos, open - pos);
    const std::string name = text.substr(open + 1, close - open - 1);
    auto it = vars.find(name);
    if (it == vars.end()) throw ConfigError("unknown placeholder {" + name + "} in '" + text + "'");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

std::string identifier(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return out;
}

std::string l1_suffix(L1Mode m) {
  switch (m) {
    case L1Mode::Enabled: return "_ca";
    case L1Mode::Disabled: return "_cg";
    case L1Mode::NotApplicable: return "";
  }
  return "";
}

}  // namespace

std::string build_stem(const ptx::PtxModule& module, const BuildConfig& cfg) {
  return module.file_stem + "_" + std::string(to_string(cfg.opt_level)) + l1_suffix(cfg.l1_mode);
}

CommandPlan plan_compilation(const ptx::PtxModule& module, const BuildConfig& cfg,
                             const runner::LaunchConfig& launch, const CommandTemplates& templates) {
  ComputeCapability target;
  try {
    target = ComputeCapability::parse(cfg.target_arch);
  } catch (const Error& e) {
    throw UnsupportedConfig("bad target architecture '" + cfg.target_arch + "'");
  }
  if (cfg.l1_mode != L1Mode::NotApplicable && module.kind != ptx::KernelKind::GlobalMemory) {
    throw UnsupportedConfig("L1 mode " + std::string(to_string(cfg.l1_mode)) + " only applies to the global-memory probe, not " +
                            module.kernel_id);
  }
  if (module.descriptor && !module.descriptor->supported_on(target)) {
    throw UnsupportedConfig(module.kernel_id + " needs compute capability " +
                            module.descriptor->min_compute_capability.to_string() + ", target is " +
                            target.sm_name());
  }
  if (!module.target_arch.empty() && ComputeCapability::parse(module.target_arch) > target) {
    throw UnsupportedConfig("module targets " + module.target_arch + ", build targets " + target.sm_name());
  }
  if (const auto diags = ptx::validate_ptx(module); !diags.empty()) {
    throw UnsupportedConfig(module.kernel_id + " does not validate: " + diags.front().code + ": " +
                            diags.front().message);
  }

  const ToolchainTemplate& t = templates.for_version(cfg.toolchain_version);
  const std::string stem = build_stem(module, cfg);
  const std::string opt(to_string(cfg.opt_level));

  std::map<std::string, std::string> vars;
  vars["sm"] = target.sm_name();
  vars["ptx"] = stem + ".ptx";
  vars["cubin"] = stem + ".cubin";
  vars["fatbin"] = stem + ".fatbin";
  vars["fatbin_header"] = stem + "_fatbin.h";
  vars["launcher"] = stem + "_launcher.cu";
  vars["object"] = stem + ".o";
  vars["exe"] = stem;
  vars["symbol"] = identifier(stem) + "_fatbin";
  auto flag = [&](const std::map<std::string, std::string>& m, const std::string& key, const char* what) {
    auto it = m.find(key);
    if (it == m.end()) throw ConfigError(std::string("command templates: no ") + what + " for '" + key + "'");
    return expand(it->second, vars);
  };
  vars["opt"] = flag(t.opt_flags, opt, "opt flag");
  vars["host_opt"] = flag(t.host_opt_flags, opt, "host opt flag");
  vars["l1"] = flag(t.l1_flags, std::string(to_string(cfg.l1_mode)), "L1 flag");
  vars["arch"] = expand(t.arch_flag, vars);

  CommandPlan plan;
  plan.kernel_id = module.kernel_id;
  plan.opt_level = opt;
  plan.l1_mode = std::string(to_string(cfg.l1_mode));
  plan.target_arch = target.sm_name();
  plan.toolchain_version = cfg.toolchain_version;
  plan.work_dir = cfg.work_dir;
  plan.sources.push_back({vars["ptx"], module.text});
  plan.sources.push_back({vars["launcher"], emit_host_launcher(module, launch, vars["fatbin_header"], vars["symbol"])});
  plan.artifact = vars["exe"];

  for (const auto& ts : t.steps) {
    CommandStep step;
    step.name = ts.name;
    step.tool = ts.tool;
    auto path = cfg.tool_paths.find(ts.tool);
    step.executable = path != cfg.tool_paths.end() ? path->second : ts.tool;
    for (const auto& a : ts.args) {
      std::string v = expand(a, vars);
      if (!v.empty()) step.args.push_back(std::move(v));
    }
    for (const auto& i : ts.inputs) step.inputs.push_back(expand(i, vars));
    for (const auto& o : ts.outputs) step.outputs.push_back(expand(o, vars));
    if (!ts.stdout_file.empty()) step.stdout_file = expand(ts.stdout_file, vars);
    plan.steps.push_back(std::move(step));
  }

  const auto initial = plan.initial_inputs();
  std::set<std::string> available(initial.begin(), initial.end());
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    for (const auto& in : plan.steps[i].inputs) {
      if (!available.contains(in)) {
        throw ConfigError("command templates: step " + std::to_string(i) + " reads '" + in +
                          "' before any step produces it");
      }
    }
    available.insert(plan.steps[i].outputs.begin(), plan.steps[i].outputs.end());
  }
  return plan;
}

BuildResult execute_plan(const CommandPlan& plan, ExecMode mode) {
  BuildResult result;
  result.mode = mode;
  result.transcript = format_transcript(plan);
  result.artifact = plan.work_dir / plan.artifact;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    result.steps.push_back({i, plan.steps[i].name, plan.steps[i].command_line(), StepStatus::Planned, 0, {}, {}});
  }
  if (mode == ExecMode::DryRun) return result;

  for (const auto& step : plan.steps) {
    if (!proc::find_executable(step.executable)) {
      throw ToolNotFound("step '" + step.name + "': executable not found: " + step.executable);
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(plan.work_dir, ec);
  if (ec) throw IoError("cannot create " + plan.work_dir.string() + ": " + ec.message());
  for (const auto& src : plan.sources) {
    std::ofstream out(plan.work_dir / src.path, std::ios::binary);
    out << src.content;
    if (!out) throw IoError("cannot write " + (plan.work_dir / src.path).string());
  }

  for (auto& r : result.steps) r.status = StepStatus::Skipped;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    std::vector<std::string> argv{step.executable};
    argv.insert(argv.end(), step.args.begin(), step.args.end());
    const auto pr = proc::run(argv, plan.work_dir);
    auto& r = result.steps[i];
    r.exit_code = pr.exit_code;
    r.stdout_text = pr.stdout_text;
    r.stderr_text = pr.stderr_text;
    if (pr.exit_code != 0) {
      r.status = StepStatus::Failed;
      result.status = StepStatus::Failed;
      throw StepFailed(i, pr.exit_code, pr.stderr_text);
    }
    if (!step.stdout_file.empty()) {
      std::ofstream out(plan.work_dir / step.stdout_file, std::ios::binary);
      out << pr.stdout_text;
      if (!out) throw IoError("cannot write " + (plan.work_dir / step.stdout_file).string());
    }
    r.status = StepStatus::Succeeded;
  }
  result.status = StepStatus::Succeeded;
  return result;
}

std::optional<std::string> parse_release_version(std::string_view text) {
  static const std::regex re(R"(release\s+([0-9]+\.[0-9]+))");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(text.begin(), text.end(), m, re)) return m[1].str();
  return std::nullopt;
}

namespace {

std::vector<std::string> architectures_for(const std::string& version) {
  int major = 0, minor = 0;
  if (std::sscanf(version.c_str(), "%d.%d", &major, &minor) != 2) return {};
  const int v = major * 10 + minor;
  std::vector<std::pair<int, const char*>> table = {
      {60, "sm_30"}, {60, "sm_35"}, {65, "sm_37"}, {65, "sm_50"}, {65, "sm_52"}, {70, "sm_53"},
      {80, "sm_60"}, {80, "sm_61"}, {80, "sm_62"}, {90, "sm_70"}, {92, "sm_72"}, {100, "sm_75"},
  };
  std::vector<std::string> out;
  for (const auto& [since, sm] : table) {
    if (v >= since) out.emplace_back(sm);
  }
  return out;
}

}  // namespace

ToolchainInfo detect_toolchain(const std::map<std::string, std::string>& tool_paths) {
  ToolchainInfo info;
  info.tool_paths = tool_paths;
  if (tool_paths.empty()) {
    info.detail = "no toolchain paths configured";
    return info;
  }
  for (const char* tool : {"ptxas", "nvcc"}) {
    auto it = tool_paths.find(tool);
    if (it == tool_paths.end()) continue;
    try {
      const auto pr = proc::run({it->second, "--version"});
      if (pr.exit_code != 0) {
        info.detail = std::string(tool) + " --version exited with " + std::to_string(pr.exit_code);
        continue;
      }
      if (auto v = parse_release_version(pr.stdout_text + pr.stderr_text)) {
        info.available = true;
        info.version = *v;
        info.architectures = architectures_for(*v);
        info.detail.clear();
        return info;
      }
      info.detail = std::string(tool) + " printed no release version";
    } catch (const Error& e) {
      info.detail = e.what();
    }
  }
  if (info.detail.empty()) info.detail = "neither ptxas nor nvcc configured";
  return info;
}

std::map<std::string, std::string> tool_paths_for_root(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const char* tool : {"ptxas", "fatbinary", "bin2c", "nvcc"}) out[tool] = (root / "bin" / tool).string();
  return out;
}

std::map<std::string, std::string> default_tool_paths() {
  if (const char* root = std::getenv(kCudaRootEnv); root && *root) return tool_paths_for_root(root);
  if (auto nvcc = proc::find_executable("nvcc")) return tool_paths_for_root(nvcc->parent_path().parent_path());
  return {};
}

}  // namespace gpulat::toolchain
