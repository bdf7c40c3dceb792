#include "gpulat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/reference_data.hpp"

namespace gpulat::analysis {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Measured: return "measured";
    case Provenance::Replayed: return "replayed";
    case Provenance::ReferenceTable: return "referenceTable";
  }
  return "?";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "measured") return Provenance::Measured;
  if (text == "replayed") return Provenance::Replayed;
  if (text == "referenceTable") return Provenance::ReferenceTable;
  throw ParseError("unknown provenance '" + std::string(text) + "'");
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::OptLevel: return "optLevel";
    case Axis::Gpu: return "gpu";
    case Axis::ToolchainVersion: return "toolchainVersion";
  }
  return "?";
}

Axis parse_axis(std::string_view text) {
  if (text == "optLevel" || text == "opt") return Axis::OptLevel;
  if (text == "gpu") return Axis::Gpu;
  if (text == "toolchainVersion" || text == "toolchain") return Axis::ToolchainVersion;
  throw ParseError("unknown axis '" + std::string(text) + "'");
}

std::string_view to_string(ConformanceStatus s) {
  switch (s) {
    case ConformanceStatus::Exact: return "exact";
    case ConformanceStatus::WithinTolerance: return "within-tolerance";
    case ConformanceStatus::OutOfTolerance: return "out-of-tolerance";
    case ConformanceStatus::MissingInReference: return "missing-in-reference";
    case ConformanceStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

Cycles median(std::span<const Cycles> values) {
  if (values.empty()) throw EmptySamples("median of an empty sample set");
  std::vector<Cycles> sorted(values.begin(), values.end());
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  return *mid;
}

Cycles clock_overhead(std::span<const Cycles> samples) {
  if (samples.empty()) throw EmptySamples("no clock overhead samples");
  return median(samples);
}

NetLatency net_latency(Cycles raw_delta, Cycles overhead) {
  if (raw_delta < overhead) return {0, true};
  return {raw_delta - overhead, false};
}

DivVariant classify_divisor(std::int64_t d) {
  if (d == 0) throw ZeroDivisor("divisor must be nonzero");
  const std::uint64_t mag = d < 0 ? 0 - static_cast<std::uint64_t>(d) : static_cast<std::uint64_t>(d);
  return (mag & (mag - 1)) == 0 ? DivVariant::Regular : DivVariant::Irregular;
}

DivVariant classify_divisor(double d) {
  if (d == 0.0) throw ZeroDivisor("divisor must be nonzero");
  if (!std::isfinite(d)) return DivVariant::Irregular;
  int exp = 0;
  const double frac = std::frexp(std::fabs(d), &exp);
  return frac == 0.5 ? DivVariant::Regular : DivVariant::Irregular;
}

Cycles div_average(Cycles regular, Cycles irregular) {
  return static_cast<Cycles>((static_cast<std::uint64_t>(regular) + irregular) / 2);
}

std::vector<Cycles> apply_warmup(std::span<const Cycles> samples, bool cold) {
  if (cold || samples.size() <= 1) return {samples.begin(), samples.end()};
  return {samples.begin() + 1, samples.end()};
}

namespace {

struct RecordIdentity {
  std::string key, category, instruction, dtype, variant;
  L1Mode effective_l1 = L1Mode::NotApplicable;
};

RecordIdentity identify(const runner::RawSamples& s, const std::string& output) {
  const auto& catalog = isa::InstructionCatalog::instance();
  if (const auto* d = catalog.find_by_kernel_id(s.kernel_id)) {
    return {d->report_group,
            std::string(to_string(d->category)),
            d->mnemonic,
            std::string(to_string(d->data_type)),
            d->div_variant ? std::string(to_string(*d->div_variant)) : std::string(),
            L1Mode::NotApplicable};
  }
  if (const auto* p = catalog.find_probe_kernel(s.kernel_id)) {
    const auto kind = p->kind_for(output, s.l1_mode);
    if (!kind) throw SchemaError(s.kernel_id + " has no output '" + output + "'");
    const std::string name(to_string(*kind));
    return {name, "Memory", name, "", "", p->uses_l1_mode ? s.l1_mode : L1Mode::NotApplicable};
  }
  // Unknown kernels still reduce; they are reported by id.
  return {s.kernel_id, "Unknown", s.kernel_id, "", "", s.l1_mode};
}

bool output_is_cold(const runner::RawSamples& s, const std::string& output) {
  if (const auto* p = isa::InstructionCatalog::instance().find_probe_kernel(s.kernel_id)) {
    for (const auto& o : p->outputs) {
      if (o.output_name == output) return o.cold;
    }
  }
  return false;
}

}  // namespace

LatencyRecord aggregate(const runner::RawSamples& samples, Cycles overhead, std::string_view output,
                        Provenance provenance) {
  std::string name(output);
  if (name.empty()) {
    if (samples.samples.size() != 1) {
      throw EmptySamples(samples.kernel_id + ": output name required for a multi-output kernel");
    }
    name = samples.samples.begin()->first;
  }
  const auto it = samples.samples.find(name);
  if (it == samples.samples.end() || it->second.empty()) {
    throw EmptySamples(samples.kernel_id + ": no samples for output '" + name + "'");
  }

  std::vector<Cycles> net;
  net.reserve(it->second.size());
  bool anomalous = false;
  for (Cycles raw : it->second) {
    const auto n = net_latency(raw, overhead);
    anomalous = anomalous || n.anomalous;
    net.push_back(n.cycles);
  }

  const RecordIdentity id = identify(samples, name);
  LatencyRecord r;
  r.key = id.key;
  r.category = id.category;
  r.instruction = id.instruction;
  r.dtype = id.dtype;
  r.variant = id.variant;
  r.kernel_id = samples.kernel_id;
  r.output_name = name;
  r.gpu_name = samples.gpu_name;
  r.opt_level = samples.opt_level;
  r.toolchain_version = samples.toolchain_version;
  r.l1_mode = id.effective_l1;
  r.latency_cycles = median(net);
  const auto [lo, hi] = std::minmax_element(net.begin(), net.end());
  r.dispersion = {*lo, *hi, net.size()};
  r.derived_from = provenance;
  r.anomalous = anomalous;
  return r;
}

std::vector<LatencyRecord> reduce(const runner::RawSamples& samples, Provenance provenance) {
  const auto calibration = apply_warmup(samples.clock_overhead_samples, false);
  const Cycles overhead = clock_overhead(calibration);
  std::vector<LatencyRecord> out;
  for (const auto& [name, values] : samples.samples) {
    runner::RawSamples view = samples;
    view.samples = {{name, apply_warmup(values, output_is_cold(samples, name))}};
    out.push_back(aggregate(view, overhead, name, provenance));
  }
  return out;
}

namespace {

// "{s} div (regular) [int]" -> "{s} div (average) [int]"
std::optional<std::string> average_key(const std::string& key, const std::string& marker) {
  const auto pos = key.find(marker);
  if (pos == std::string::npos) return std::nullopt;
  std::string out = key;
  out.replace(pos, marker.size(), "(average)");
  return out;
}

}  // namespace

std::vector<LatencyRecord> derive_div_averages(std::vector<LatencyRecord> records) {
  using Group = std::tuple<std::string, std::string, int, std::string, int>;
  std::map<Group, std::pair<const LatencyRecord*, const LatencyRecord*>> pairs;
  std::vector<Group> order;
  for (const auto& r : records) {
    if (r.instruction != "div") continue;
    const bool regular = r.variant == "regular";
    if (!regular && r.variant != "irregular") continue;
    const auto avg = average_key(r.key, regular ? "(regular)" : "(irregular)");
    if (!avg) continue;
    Group g{*avg, r.gpu_name, static_cast<int>(r.opt_level), r.toolchain_version, static_cast<int>(r.derived_from)};
    auto [it, inserted] = pairs.try_emplace(g);
    if (inserted) order.push_back(g);
    (regular ? it->second.first : it->second.second) = &r;
  }

  std::vector<LatencyRecord> derived;
  for (const auto& g : order) {
    const auto [reg, irr] = pairs.at(g);
    if (!reg || !irr) continue;
    LatencyRecord a = *reg;
    a.key = std::get<0>(g);
    a.variant = "average";
    a.kernel_id.clear();
    a.output_name.clear();
    a.latency_cycles = div_average(reg->latency_cycles, irr->latency_cycles);
    a.dispersion = {div_average(reg->dispersion.min, irr->dispersion.min),
                    div_average(reg->dispersion.max, irr->dispersion.max),
                    std::min(reg->dispersion.count, irr->dispersion.count)};
    a.anomalous = reg->anomalous || irr->anomalous;
    derived.push_back(std::move(a));
  }
  records.insert(records.end(), derived.begin(), derived.end());
  return records;
}

namespace {

std::string axis_value(const LatencyRecord& r, Axis axis) {
  switch (axis) {
    case Axis::OptLevel: return std::string(to_string(r.opt_level));
    case Axis::Gpu: return r.gpu_name;
    case Axis::ToolchainVersion: return r.toolchain_version;
  }
  return {};
}

std::string fixed_fields(const LatencyRecord& r, Axis axis) {
  std::string s;
  if (axis != Axis::Gpu) s += "gpu=" + r.gpu_name + " ";
  if (axis != Axis::OptLevel) s += "opt=" + std::string(to_string(r.opt_level)) + " ";
  if (axis != Axis::ToolchainVersion) s += "toolchain=" + r.toolchain_version + " ";
  s += "l1=" + std::string(to_string(r.l1_mode));
  return s;
}

}  // namespace

DeltaTable compare(const std::vector<LatencyRecord>& records, Axis axis, std::optional<std::string> baseline) {
  DeltaTable table;
  table.axis = axis;
  if (records.empty()) return table;

  const std::string expected = fixed_fields(records.front(), axis);
  for (const auto& r : records) {
    const std::string got = fixed_fields(r, axis);
    if (got != expected) throw MixedKeys("records differ outside the " + std::string(to_string(axis)) +
                                         " axis: '" + expected + "' vs '" + got + "'");
    const std::string point = axis_value(r, axis);
    if (std::find(table.points.begin(), table.points.end(), point) == table.points.end()) {
      table.points.push_back(point);
    }
  }
  if (baseline) {
    auto it = std::find(table.points.begin(), table.points.end(), *baseline);
    if (it == table.points.end()) throw MixedKeys("baseline '" + *baseline + "' is not an axis point");
    std::rotate(table.points.begin(), it, it + 1);
  }

  std::vector<std::string> keys;
  std::map<std::pair<std::string, std::string>, Cycles> values;
  for (const auto& r : records) {
    if (std::find(keys.begin(), keys.end(), r.key) == keys.end()) keys.push_back(r.key);
    auto [it, inserted] = values.try_emplace({r.key, axis_value(r, axis)}, r.latency_cycles);
    if (!inserted) throw MixedKeys("duplicate record for '" + r.key + "' at " + axis_value(r, axis));
  }

  for (const auto& key : keys) {
    DeltaRow row;
    row.key = key;
    std::optional<Cycles> base;
    for (std::size_t i = 0; i < table.points.size(); ++i) {
      auto it = values.find({key, table.points[i]});
      std::optional<Cycles> v;
      if (it != values.end()) v = it->second;
      if (i == 0) base = v;
      row.values.push_back(v);
      if (v && base) {
        const std::int64_t d = static_cast<std::int64_t>(*v) - static_cast<std::int64_t>(*base);
        row.deltas.emplace_back(d);
        row.relative.emplace_back(*base == 0 ? std::optional<double>{}
                                             : std::optional<double>{static_cast<double>(d) / *base});
      } else {
        row.deltas.emplace_back(std::nullopt);
        row.relative.emplace_back(std::nullopt);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double ConformanceReport::exact_fraction() const {
  return compared() == 0 ? 1.0 : static_cast<double>(exact) / static_cast<double>(compared());
}

double ConformanceReport::conforming_fraction() const {
  return compared() == 0 ? 1.0 : static_cast<double>(exact + within_tolerance) / static_cast<double>(compared());
}

namespace {

std::optional<Cycles> reference_for(const LatencyRecord& r, const ref::ReferenceData& table, bool& not_applicable) {
  not_applicable = false;
  const auto opt = opt_class_of(r.opt_level);
  if (!opt) return std::nullopt;
  const GpuTarget* gpu = table.find_gpu(r.gpu_name);
  if (!gpu) return std::nullopt;

  if (r.toolchain_version != gpu->toolchain_version) {
    const auto& cuda = table.cuda_versions();
    if (*opt != OptClass::Optimized || r.toolchain_version != cuda.candidate) return std::nullopt;
    if (std::find(cuda.gpus.begin(), cuda.gpus.end(), gpu->name) == cuda.gpus.end()) return std::nullopt;
    for (const auto& row : cuda.rows) {
      if (row.appendix_key == r.key) return row.candidate;
    }
    return std::nullopt;
  }

  try {
    if (r.category == "Memory") return table.lookup_memory(gpu->name, parse_probe_kind(r.instruction), *opt);
    return table.lookup(gpu->name, r.key, *opt);
  } catch (const NotApplicable&) {
    not_applicable = true;
  } catch (const NotInTable&) {
  }
  return std::nullopt;
}

}  // namespace

ConformanceReport diff_vs_reference(const std::vector<LatencyRecord>& records, const ref::ReferenceData& table,
                                    const Tolerance& tolerance) {
  ConformanceReport report;
  for (const auto& r : records) {
    ConformanceEntry e;
    e.record = r;
    bool na = false;
    e.reference = reference_for(r, table, na);
    if (!e.reference) {
      e.status = na ? ConformanceStatus::NotApplicable : ConformanceStatus::MissingInReference;
    } else {
      e.delta = static_cast<std::int64_t>(r.latency_cycles) - static_cast<std::int64_t>(*e.reference);
      const double allowed = r.category == "Memory" ? tolerance.memory_fraction * *e.reference
                                                    : static_cast<double>(tolerance.alu_cycles);
      if (e.delta == 0) {
        e.status = ConformanceStatus::Exact;
      } else if (static_cast<double>(std::llabs(e.delta)) <= allowed) {
        e.status = ConformanceStatus::WithinTolerance;
      } else {
        e.status = ConformanceStatus::OutOfTolerance;
      }
    }
    switch (e.status) {
      case ConformanceStatus::Exact: ++report.exact; break;
      case ConformanceStatus::WithinTolerance: ++report.within_tolerance; break;
      case ConformanceStatus::OutOfTolerance: ++report.out_of_tolerance; break;
      case ConformanceStatus::MissingInReference: ++report.missing; break;
      case ConformanceStatus::NotApplicable: ++report.not_applicable; break;
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace gpulat::analysis
