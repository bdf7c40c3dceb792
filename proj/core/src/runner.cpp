#include "gpulat/runner.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpulat/errors.hpp"
#include "gpulat/subprocess.hpp"

namespace gpulat::runner {

using nlohmann::ordered_json;

void LaunchConfig::validate() const {
  const unsigned long long threads = 1ull * grid.x * grid.y * grid.z * block.x * block.y * block.z;
  if (threads != 1) {
    throw ConfigError("launch must engage exactly one thread, got " + std::to_string(threads));
  }
  if (repetitions < 3) throw ConfigError("at least 3 repetitions are required");
}

void RawSamples::validate() const {
  if (kernel_id.empty()) throw SchemaError("samples without a kernel id");
  if (samples.empty()) throw SchemaError(kernel_id + ": no outputs");
  auto check = [&](const std::vector<Cycles>& v, const std::string& what) {
    if (v.empty()) throw SchemaError(kernel_id + ": " + what + " is empty");
    for (Cycles c : v) {
      if (c >= kMaxPlausibleDelta) throw SchemaError(kernel_id + ": " + what + " value " + std::to_string(c) + " is implausible");
    }
  };
  for (const auto& [name, values] : samples) check(values, "output '" + name + "'");
  check(clock_overhead_samples, "clockOverheadSamples");
}

std::string fixture_to_json(const RawSamples& s) {
  ordered_json j;
  j["schemaVersion"] = kFixtureSchemaVersion;
  j["kernelId"] = s.kernel_id;
  j["gpuName"] = s.gpu_name;
  j["toolchainVersion"] = s.toolchain_version;
  j["optLevel"] = std::string(to_string(s.opt_level));
  if (s.l1_mode != L1Mode::NotApplicable) j["l1Mode"] = std::string(to_string(s.l1_mode));
  j["clockOverheadSamples"] = s.clock_overhead_samples;
  ordered_json outputs = ordered_json::object();
  for (const auto& [name, values] : s.samples) outputs[name] = values;
  j["outputs"] = outputs;
  if (s.provenance) j["provenance"] = *s.provenance;
  return j.dump(2) + "\n";
}

namespace {

std::vector<Cycles> cycles_array(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  std::vector<Cycles> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw SchemaError(what + " must hold unsigned integers");
    }
    const auto x = v.get<unsigned long long>();
    if (x >= kMaxPlausibleDelta) throw SchemaError(what + " value " + std::to_string(x) + " out of range");
    out.push_back(static_cast<Cycles>(x));
  }
  return out;
}

std::string required_string(const ordered_json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw SchemaError(std::string("fixture field '") + field + "' missing or not a string");
  }
  return j.at(field).get<std::string>();
}

}  // namespace

RawSamples fixture_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw SchemaError(std::string("fixture is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schemaVersion") || !j.at("schemaVersion").is_number_integer()) {
    throw SchemaError("fixture has no schemaVersion");
  }
  const int version = j.at("schemaVersion").get<int>();
  if (version != kFixtureSchemaVersion) {
    throw SchemaError("unsupported fixture schemaVersion " + std::to_string(version));
  }
  RawSamples s;
  s.kernel_id = required_string(j, "kernelId");
  s.gpu_name = required_string(j, "gpuName");
  s.toolchain_version = required_string(j, "toolchainVersion");
  try {
    s.opt_level = parse_opt_level(required_string(j, "optLevel"));
    if (j.contains("l1Mode")) s.l1_mode = parse_l1_mode(required_string(j, "l1Mode"));
  } catch (const ParseError& e) {
    throw SchemaError(e.what());
  }
  if (!j.contains("clockOverheadSamples")) throw SchemaError("fixture has no clockOverheadSamples");
  s.clock_overhead_samples = cycles_array(j.at("clockOverheadSamples"), "clockOverheadSamples");
  if (!j.contains("outputs") || !j.at("outputs").is_object()) throw SchemaError("fixture has no outputs object");
  for (const auto& [name, values] : j.at("outputs").items()) s.samples[name] = cycles_array(values, "output '" + name + "'");
  if (j.contains("provenance")) s.provenance = required_string(j, "provenance");
  s.validate();
  return s;
}

void record_fixture(const RawSamples& samples, const std::filesystem::path& path) {
  samples.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << fixture_to_json(samples);
  if (!out) throw IoError("write failed for " + path.string());
}

RawSamples load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return fixture_from_json(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + ": " + e.what());
  }
}

std::string fixture_filename(std::string_view gpu_slug, std::string_view kernel_id, OptLevel opt,
                             std::string_view toolchain, std::string_view default_toolchain, L1Mode l1) {
  std::string name = std::string(gpu_slug) + "_" + std::string(kernel_id) + "_" + std::string(to_string(opt));
  if (l1 == L1Mode::Enabled) name += "_ca";
  if (l1 == L1Mode::Disabled) name += "_cg";
  if (toolchain != default_toolchain) name += "_cuda" + std::string(toolchain);
  return name + ".json";
}

std::vector<ResultLine> parse_result_lines(std::string_view text) {
  std::vector<ResultLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> tokens;
    std::size_t p = 0;
    while (p < line.size()) {
      while (p < line.size() && line[p] == ' ') ++p;
      const std::size_t start = p;
      while (p < line.size() && line[p] != ' ') ++p;
      if (p > start) tokens.push_back(line.substr(start, p - start));
    }
    auto fail = [&](const std::string& why) {
      throw ParseError("line " + std::to_string(line_no) + ": " + why + ": '" + std::string(line) + "'");
    };
    if (tokens.size() != 4 || tokens[0] != "RESULT") fail("expected 'RESULT <kernel> <output> <value>'");
    unsigned long long v = 0;
    auto [ptr, ec] = std::from_chars(tokens[3].data(), tokens[3].data() + tokens[3].size(), v);
    if (ec != std::errc{} || ptr != tokens[3].data() + tokens[3].size()) fail("value is not an unsigned integer");
    if (v >= kMaxPlausibleDelta) fail("value out of range");
    out.push_back({std::string(tokens[1]), std::string(tokens[2]), static_cast<Cycles>(v)});
  }
  return out;
}

std::vector<ResultLine> HardwareBackend::launch_once(const std::filesystem::path& exe, const std::string& kernel_id) {
  proc::ProcessResult pr;
  try {
    pr = proc::run({exe.string()});
  } catch (const Error& e) {
    throw BackendFailure(kernel_id, e.what());
  }
  if (pr.exit_code != 0) {
    throw BackendFailure(kernel_id, exe.filename().string() + " exited with " + std::to_string(pr.exit_code) +
                                        (pr.stderr_text.empty() ? "" : ": " + pr.stderr_text));
  }
  try {
    return parse_result_lines(pr.stdout_text);
  } catch (const ParseError& e) {
    throw BackendFailure(kernel_id, std::string("malformed output: ") + e.what());
  }
}

RawSamples HardwareBackend::run(const KernelRef& ref, const LaunchConfig& launch) {
  std::lock_guard lock(exclusive_);
  try {
    launch.validate();
  } catch (const Error& e) {
    throw BackendFailure(ref.kernel_id, e.what());
  }
  if (ref.executable.empty()) throw BackendFailure(ref.kernel_id, "no executable");
  if (ref.clock_overhead_executable.empty()) throw BackendFailure(ref.kernel_id, "no clock overhead executable");

  RawSamples s;
  s.kernel_id = ref.kernel_id;
  s.gpu_name = ref.gpu_name;
  s.toolchain_version = ref.toolchain_version;
  s.opt_level = ref.opt_level;
  s.l1_mode = ref.l1_mode;

  // Calibration runs first, in the same session.
  for (unsigned r = 0; r < launch.repetitions; ++r) {
    const auto lines = launch_once(ref.clock_overhead_executable, ref.kernel_id);
    if (lines.size() != 1) {
      throw BackendFailure(ref.kernel_id, "clock overhead run printed " + std::to_string(lines.size()) + " results");
    }
    s.clock_overhead_samples.push_back(lines.front().value);
  }
  for (unsigned r = 0; r < launch.repetitions; ++r) {
    const auto lines = launch_once(ref.executable, ref.kernel_id);
    for (const auto& l : lines) {
      if (l.kernel != ref.kernel_id) {
        throw BackendFailure(ref.kernel_id, "malformed output: result for kernel '" + l.kernel + "'");
      }
      s.samples[l.output].push_back(l.value);
    }
    for (const auto& name : ref.output_names) {
      if (s.samples[name].size() != r + 1) {
        throw BackendFailure(ref.kernel_id, "malformed output: missing or repeated output '" + name + "'");
      }
    }
  }
  if (s.samples.empty()) throw BackendFailure(ref.kernel_id, "malformed output: no RESULT lines");
  return s;
}

RawSamples ReplayBackend::run(const KernelRef& ref, const LaunchConfig& /*launch*/) {
  RawSamples s;
  try {
    s = load_fixture(ref.fixture);
  } catch (const Error& e) {
    throw BackendFailure(ref.kernel_id.empty() ? ref.fixture.filename().string() : ref.kernel_id, e.what());
  }
  if (!ref.kernel_id.empty() && s.kernel_id != ref.kernel_id) {
    throw BackendFailure(ref.kernel_id, "fixture " + ref.fixture.filename().string() + " holds " + s.kernel_id);
  }
  return s;
}

MeasurementResult run_measurement(const std::vector<KernelRef>& suite, ExecutionBackend& backend,
                                  const LaunchConfig& launch) {
  MeasurementResult result;
  for (const auto& ref : suite) {
    try {
      result.samples.push_back(backend.run(ref, launch));
    } catch (const BackendFailure& e) {
      result.failures.push_back({e.kernel_id(), e.detail()});
    } catch (const Error& e) {
      result.failures.push_back({ref.kernel_id, e.what()});
    }
  }
  return result;
}

std::vector<KernelRef> discover_fixtures(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("fixture directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<KernelRef> refs;
  for (const auto& f : files) {
    KernelRef ref;
    ref.fixture = f;
    refs.push_back(std::move(ref));
  }
  return refs;
}

}  // namespace gpulat::runner
