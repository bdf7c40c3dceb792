#include "gpulat/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"

namespace gpulat::report {

using analysis::LatencyRecord;
using nlohmann::ordered_json;

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Markdown: return "md";
    case Format::Csv: return "csv";
    case Format::Json: return "json";
  }
  return "?";
}

Format parse_format(std::string_view text) {
  if (text == "md" || text == "markdown") return Format::Markdown;
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw ConfigError("unknown report format '" + std::string(text) + "' (use md, csv or json)");
}

namespace {

int category_rank(const std::string& category) {
  for (std::size_t i = 0; i < kAllCategories.size(); ++i) {
    if (to_string(kAllCategories[i]) == category) return static_cast<int>(i);
  }
  return category == "Memory" ? 100 : 200;
}

int probe_rank(const std::string& name) {
  for (std::size_t i = 0; i < kAllProbeKinds.size(); ++i) {
    if (to_string(kAllProbeKinds[i]) == name) return static_cast<int>(i);
  }
  return 100;
}

using CellIndex = std::map<std::tuple<std::string, std::string, OptClass>, std::vector<Cycles>>;

CellIndex index_records(const std::vector<LatencyRecord>& records, const ref::ReferenceData& data,
                        const ViewOptions& options) {
  CellIndex index;
  for (const auto& r : records) {
    const auto opt = opt_class_of(r.opt_level);
    if (!opt) continue;
    std::string want;
    if (options.toolchain) {
      want = *options.toolchain;
    } else if (const auto* g = data.find_gpu(r.gpu_name)) {
      want = g->toolchain_version;
    } else {
      want = r.toolchain_version;
    }
    if (r.toolchain_version != want) continue;
    index[{r.key, r.gpu_name, *opt}].push_back(r.latency_cycles);
  }
  return index;
}

std::optional<Cycles> cell_value(const CellIndex& index, const std::string& key, const std::string& gpu, OptClass opt) {
  auto it = index.find({key, gpu, opt});
  if (it == index.end()) return std::nullopt;
  return analysis::median(it->second);
}

bool category_runs_on(InstructionCategory c, const ref::ReferenceData& data, const std::string& gpu) {
  const auto* g = data.find_gpu(gpu);
  if (!g) return true;
  return !isa::InstructionCatalog::instance().list_instructions(c, g->compute_capability).empty();
}

// Joins per-board cells the way the published table does.
std::string join_cells(const std::vector<std::string>& parts) {
  if (parts.empty()) return std::string(kMissingCell);
  if (std::all_of(parts.begin(), parts.end(), [&](const auto& p) { return p == parts.front(); })) return parts.front();
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " / " : "") + parts[i];
  return out;
}

std::string render_alu_cell(const CellIndex& index, const ref::ReferenceData& data, const ref::AppendixColumn& col,
                            InstructionCategory category, const std::string& key, OptClass opt) {
  std::vector<std::string> parts;
  for (const auto& gpu : col.gpus) {
    if (auto v = cell_value(index, key, gpu, opt)) {
      parts.push_back(std::to_string(*v));
    } else if (!category_runs_on(category, data, gpu)) {
      parts.emplace_back(kNaCell);
    } else {
      parts.emplace_back(kMissingCell);
    }
  }
  return join_cells(parts);
}

std::string label_of_key(const std::string& key) {
  const auto pos = key.rfind(" [");
  return pos == std::string::npos ? key : key.substr(0, pos);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<LatencyRecord> sorted_records(std::vector<LatencyRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const LatencyRecord& a, const LatencyRecord& b) {
    auto key = [](const LatencyRecord& r) {
      return std::make_tuple(category_rank(r.category), probe_rank(r.instruction), r.key, r.instruction, r.dtype,
                             r.variant, r.gpu_name, static_cast<int>(r.opt_level), r.toolchain_version,
                             static_cast<int>(r.l1_mode), r.kernel_id, r.output_name);
    };
    return key(a) < key(b);
  });
  return records;
}

AppendixView build_appendix_view(const std::vector<LatencyRecord>& records, const ref::ReferenceData& data,
                                 const ViewOptions& options) {
  const CellIndex index = index_records(records, data, options);
  AppendixView view;
  view.columns = data.columns();

  std::map<InstructionCategory, std::vector<std::string>> extra;
  for (const auto& r : sorted_records(records)) {
    if (r.category == "Memory" || data.find_row(r.key)) continue;
    InstructionCategory c;
    try {
      c = parse_category(r.category);
    } catch (const Error&) {
      continue;
    }
    auto& keys = extra[c];
    if (std::find(keys.begin(), keys.end(), r.key) == keys.end()) keys.push_back(r.key);
  }

  for (const auto category : kAllCategories) {
    auto add_row = [&](const std::string& label, const std::string& key, bool published) {
      AppendixView::Row row;
      row.category = category;
      row.label = label;
      row.key = key;
      row.published = published;
      for (const auto& col : view.columns) {
        row.optimized.push_back(render_alu_cell(index, data, col, category, key, OptClass::Optimized));
        row.non_optimized.push_back(render_alu_cell(index, data, col, category, key, OptClass::NonOptimized));
      }
      view.rows.push_back(std::move(row));
    };
    for (const auto& r : data.rows()) {
      if (r.category == category) add_row(r.label, r.key, true);
    }
    for (const auto& key : extra[category]) add_row(label_of_key(key), key, false);
  }
  return view;
}

MemoryView build_memory_view(const std::vector<LatencyRecord>& records, const ref::ReferenceData& data,
                             const ViewOptions& options) {
  const CellIndex index = index_records(records, data, options);
  MemoryView view;
  view.gpus = data.memory_gpus();
  std::vector<std::string> keys;
  for (const auto& r : data.memory_rows()) keys.emplace_back(to_string(r.probe));
  for (const auto& r : sorted_records(records)) {
    if (r.category != "Memory") continue;
    if (std::find(keys.begin(), keys.end(), r.key) == keys.end()) keys.push_back(r.key);
    if (std::find(view.gpus.begin(), view.gpus.end(), r.gpu_name) == view.gpus.end()) view.gpus.push_back(r.gpu_name);
  }
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return probe_rank(a) < probe_rank(b); });

  for (const auto& key : keys) {
    MemoryView::Row row;
    row.key = key;
    row.label = key;
    for (const auto& r : data.memory_rows()) {
      if (to_string(r.probe) == key) row.label = r.label;
    }
    for (const auto& gpu : view.gpus) {
      for (const auto opt : {OptClass::Optimized, OptClass::NonOptimized}) {
        const auto v = cell_value(index, key, gpu, opt);
        (opt == OptClass::Optimized ? row.optimized : row.non_optimized)
            .push_back(v ? std::to_string(*v) : std::string(kMissingCell));
      }
    }
    view.rows.push_back(std::move(row));
  }
  return view;
}

CompilerView build_compiler_view(const std::vector<LatencyRecord>& records, const ref::ReferenceData& data) {
  const auto& cuda = data.cuda_versions();
  CompilerView view;
  view.baseline_version = cuda.baseline;
  view.candidate_version = cuda.candidate;
  for (std::size_t i = 0; i < cuda.gpus.size(); ++i) view.gpu_label += (i ? " / " : "") + cuda.gpus[i];

  auto index_for = [&](const std::string& version) { return index_records(records, data, {version}); };
  const CellIndex base = index_for(cuda.baseline);
  const CellIndex cand = index_for(cuda.candidate);

  auto render_cell = [&](const CellIndex& idx, const std::string& key, std::optional<Cycles>& single) {
    std::vector<std::string> parts;
    std::vector<std::optional<Cycles>> values;
    for (const auto& gpu : cuda.gpus) {
      values.push_back(cell_value(idx, key, gpu, OptClass::Optimized));
      parts.push_back(values.back() ? std::to_string(*values.back()) : std::string(kMissingCell));
    }
    const std::string cell = join_cells(parts);
    single.reset();
    if (!values.empty() && values.front() &&
        std::all_of(values.begin(), values.end(), [&](const auto& v) { return v == values.front(); })) {
      single = values.front();
    }
    return cell;
  };

  for (const auto& r : cuda.rows) {
    CompilerView::Row row;
    row.section = r.section;
    row.label = r.label;
    std::optional<Cycles> b, c;
    row.baseline = render_cell(base, r.appendix_key, b);
    row.candidate = render_cell(cand, r.appendix_key, c);
    if (b && c) {
      const long long d = static_cast<long long>(*c) - static_cast<long long>(*b);
      row.delta = (d > 0 ? "+" : "") + std::to_string(d);
    } else {
      row.delta = std::string(kMissingCell);
    }
    view.rows.push_back(std::move(row));
  }
  return view;
}

std::string render_markdown(const std::vector<LatencyRecord>& records, const ref::ReferenceData& data,
                            const ViewOptions& options) {
  std::ostringstream os;
  os << "# Instruction latency report\n\n";
  os << "Latencies in clock cycles. Opt = optimized (O3), Non-Opt = non-optimized (O0).\n\n";

  const AppendixView alu = build_appendix_view(records, data, options);
  os << "## ALU instructions\n";
  for (const auto category : kAllCategories) {
    os << "\n### " << category_heading(category) << "\n\n| Instruction |";
    for (const auto& c : alu.columns) os << " " << c.label << " Opt | " << c.label << " Non-Opt |";
    os << "\n| --- |";
    for (std::size_t i = 0; i < alu.columns.size(); ++i) os << " ---: | ---: |";
    os << "\n";
    for (const auto& row : alu.rows) {
      if (row.category != category) continue;
      os << "| " << row.label << (row.published ? "" : " (derived split)") << " |";
      for (std::size_t i = 0; i < alu.columns.size(); ++i) {
        os << " " << row.optimized[i] << " | " << row.non_optimized[i] << " |";
      }
      os << "\n";
    }
  }

  const MemoryView mem = build_memory_view(records, data, options);
  os << "\n## Memory access latencies\n\n| Memory |";
  for (const auto& g : mem.gpus) os << " " << g << " Opt | " << g << " Non-Opt |";
  os << "\n| --- |";
  for (std::size_t i = 0; i < mem.gpus.size(); ++i) os << " ---: | ---: |";
  os << "\n";
  for (const auto& row : mem.rows) {
    os << "| " << row.label << " |";
    for (std::size_t i = 0; i < mem.gpus.size(); ++i) os << " " << row.optimized[i] << " | " << row.non_optimized[i] << " |";
    os << "\n";
  }

  const CompilerView cv = build_compiler_view(records, data);
  os << "\n## Compiler versions (" << cv.gpu_label << ", optimized)\n\n";
  os << "| Section | Instruction | CUDA " << cv.baseline_version << " | CUDA " << cv.candidate_version << " | Delta |\n";
  os << "| --- | --- | ---: | ---: | ---: |\n";
  for (const auto& row : cv.rows) {
    os << "| " << row.section << " | " << row.label << " | " << row.baseline << " | " << row.candidate << " | "
       << row.delta << " |\n";
  }
  return os.str();
}

std::string render_csv(const std::vector<LatencyRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& r : sorted_records(records)) {
    os << csv_field(r.category) << ',' << csv_field(r.instruction) << ',' << csv_field(r.dtype) << ','
       << csv_field(r.variant) << ',' << csv_field(r.gpu_name) << ',' << to_string(r.opt_level) << ','
       << csv_field(r.toolchain_version) << ',' << r.latency_cycles << ',' << r.dispersion.min << ','
       << r.dispersion.max << ',' << r.dispersion.count << ',' << analysis::to_string(r.derived_from) << "\n";
  }
  return os.str();
}

std::string render_json(const std::vector<LatencyRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : sorted_records(records)) {
    ordered_json j;
    j["key"] = r.key;
    j["category"] = r.category;
    j["instruction"] = r.instruction;
    j["dtype"] = r.dtype;
    j["variant"] = r.variant;
    j["kernelId"] = r.kernel_id;
    j["output"] = r.output_name;
    j["gpu"] = r.gpu_name;
    j["optLevel"] = std::string(to_string(r.opt_level));
    j["toolchain"] = r.toolchain_version;
    j["l1Mode"] = std::string(to_string(r.l1_mode));
    j["latencyCycles"] = r.latency_cycles;
    j["min"] = r.dispersion.min;
    j["max"] = r.dispersion.max;
    j["n"] = r.dispersion.count;
    j["source"] = std::string(analysis::to_string(r.derived_from));
    j["anomalous"] = r.anomalous;
    arr.push_back(std::move(j));
  }
  ordered_json doc;
  doc["records"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<LatencyRecord> parse_records_json(std::string_view text) {
  std::vector<LatencyRecord> out;
  try {
    const auto doc = ordered_json::parse(text);
    for (const auto& j : doc.at("records")) {
      LatencyRecord r;
      r.key = j.at("key").get<std::string>();
      r.category = j.at("category").get<std::string>();
      r.instruction = j.at("instruction").get<std::string>();
      r.dtype = j.at("dtype").get<std::string>();
      r.variant = j.at("variant").get<std::string>();
      r.kernel_id = j.at("kernelId").get<std::string>();
      r.output_name = j.at("output").get<std::string>();
      r.gpu_name = j.at("gpu").get<std::string>();
      r.opt_level = parse_opt_level(j.at("optLevel").get<std::string>());
      r.toolchain_version = j.at("toolchain").get<std::string>();
      r.l1_mode = parse_l1_mode(j.at("l1Mode").get<std::string>());
      r.latency_cycles = j.at("latencyCycles").get<Cycles>();
      r.dispersion = {j.at("min").get<Cycles>(), j.at("max").get<Cycles>(), j.at("n").get<std::size_t>()};
      r.derived_from = analysis::parse_provenance(j.at("source").get<std::string>());
      r.anomalous = j.at("anomalous").get<bool>();
      out.push_back(std::move(r));
    }
  } catch (const ordered_json::exception& e) {
    throw SchemaError(std::string("records file: ") + e.what());
  } catch (const ParseError& e) {
    throw SchemaError(std::string("records file: ") + e.what());
  }
  return out;
}

std::string render(const std::vector<LatencyRecord>& records, Format format, const ref::ReferenceData& data,
                   const ViewOptions& options) {
  switch (format) {
    case Format::Markdown: return render_markdown(records, data, options);
    case Format::Csv: return render_csv(records);
    case Format::Json: return render_json(records);
  }
  return {};
}

namespace {

std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", f * 100.0);
  std::string s = buf;
  if (s == "100.00%") return "100%";
  return s;
}

}  // namespace

std::string render_conformance(const analysis::ConformanceReport& report, Format format) {
  using analysis::ConformanceStatus;
  if (format == Format::Json) {
    ordered_json doc;
    doc["compared"] = report.compared();
    doc["exact"] = report.exact;
    doc["withinTolerance"] = report.within_tolerance;
    doc["outOfTolerance"] = report.out_of_tolerance;
    doc["missingInReference"] = report.missing;
    doc["notApplicable"] = report.not_applicable;
    doc["exactFraction"] = report.exact_fraction();
    ordered_json entries = ordered_json::array();
    for (const auto& e : report.entries) {
      if (e.status == ConformanceStatus::Exact) continue;
      ordered_json j;
      j["key"] = e.record.key;
      j["kernelId"] = e.record.kernel_id;
      j["gpu"] = e.record.gpu_name;
      j["optLevel"] = std::string(to_string(e.record.opt_level));
      j["toolchain"] = e.record.toolchain_version;
      j["status"] = std::string(to_string(e.status));
      j["latencyCycles"] = e.record.latency_cycles;
      if (e.reference) {
        j["reference"] = *e.reference;
        j["delta"] = e.delta;
      }
      entries.push_back(std::move(j));
    }
    doc["nonExact"] = std::move(entries);
    return doc.dump(2) + "\n";
  }
  if (format == Format::Csv) {
    std::ostringstream os;
    os << "key,kernel_id,gpu,opt_level,toolchain,status,latency_cycles,reference,delta\n";
    for (const auto& e : report.entries) {
      os << csv_field(e.record.key) << ',' << e.record.kernel_id << ',' << csv_field(e.record.gpu_name) << ','
         << to_string(e.record.opt_level) << ',' << e.record.toolchain_version << ',' << to_string(e.status) << ','
         << e.record.latency_cycles << ',' << (e.reference ? std::to_string(*e.reference) : "") << ','
         << (e.reference ? std::to_string(e.delta) : "") << "\n";
    }
    return os.str();
  }
  std::ostringstream os;
  os << "Conformance against the reference tables\n";
  os << "  compared:             " << report.compared() << "\n";
  os << "  exact:                " << report.exact << "\n";
  os << "  within tolerance:     " << report.within_tolerance << "\n";
  os << "  out of tolerance:     " << report.out_of_tolerance << "\n";
  os << "  missing in reference: " << report.missing << "\n";
  os << "  not applicable:       " << report.not_applicable << "\n";
  for (const auto& e : report.entries) {
    if (e.status != ConformanceStatus::OutOfTolerance && e.status != ConformanceStatus::WithinTolerance) continue;
    os << "  " << to_string(e.status) << ": " << e.record.key << " " << e.record.gpu_name << " "
       << to_string(e.record.opt_level) << " cuda " << e.record.toolchain_version << ": " << e.record.latency_cycles
       << " vs " << *e.reference << " (" << (e.delta > 0 ? "+" : "") << e.delta << ")\n";
  }
  os << percent(report.exact_fraction()) << " exact, " << percent(report.conforming_fraction())
     << " within tolerance\n";
  return os.str();
}

std::string render_reference(const ref::ReferenceData& data, Format format, std::string_view table) {
  const bool all = table == "all";
  if (!all && table != "alu" && table != "memory" && table != "cuda" && table != "gpus") {
    throw ConfigError("unknown reference table '" + std::string(table) + "' (alu, memory, cuda, gpus, all)");
  }
  if (format == Format::Json) {
    ordered_json doc;
    doc["checksum"] = data.checksum();
    if (all || table == "gpus") {
      ordered_json gpus = ordered_json::array();
      for (const auto& g : data.gpus()) {
        ordered_json j;
        j["name"] = g.name;
        j["architecture"] = std::string(to_string(g.architecture));
        j["chip"] = g.chip ? ordered_json(*g.chip) : ordered_json(nullptr);
        j["computeCapability"] = g.compute_capability.to_string();
        j["toolchain"] = g.toolchain_version;
        if (g.config) {
          j["gpuClockMHz"] = g.config->gpu_clock_mhz;
          j["memSizeGB"] = g.config->mem_size_gb;
          j["memType"] = g.config->mem_type;
          j["l1SizeKB"] = g.config->l1_size_kb;
          j["l2Size"] = g.config->l2_size;
          j["smxCount"] = g.config->smx_count;
          j["coresTotal"] = g.config->cores_total;
        }
        gpus.push_back(std::move(j));
      }
      doc["gpus"] = std::move(gpus);
    }
    if (all || table == "alu") {
      ordered_json cells = ordered_json::array();
      for (const auto& c : data.cells()) {
        ordered_json j;
        j["category"] = std::string(to_string(c.category));
        j["row"] = c.row_label;
        j["key"] = c.key;
        j["gpu"] = c.gpu;
        j["optimized"] = c.optimized ? ordered_json(*c.optimized) : ordered_json("NA");
        j["nonOptimized"] = c.non_optimized ? ordered_json(*c.non_optimized) : ordered_json("NA");
        cells.push_back(std::move(j));
      }
      doc["alu"] = std::move(cells);
    }
    if (all || table == "memory") {
      ordered_json rows = ordered_json::array();
      for (const auto& r : data.memory_rows()) {
        for (std::size_t i = 0; i < data.memory_gpus().size(); ++i) {
          rows.push_back({{"probe", std::string(to_string(r.probe))},
                          {"gpu", data.memory_gpus()[i]},
                          {"optimized", r.optimized[i]},
                          {"nonOptimized", r.non_optimized[i]}});
        }
      }
      doc["memory"] = std::move(rows);
    }
    if (all || table == "cuda") {
      ordered_json rows = ordered_json::array();
      for (const auto& r : data.cuda_versions().rows) {
        rows.push_back({{"section", r.section},
                        {"instruction", r.key},
                        {data.cuda_versions().baseline, r.baseline},
                        {data.cuda_versions().candidate, r.candidate}});
      }
      doc["cudaVersions"] = std::move(rows);
    }
    return doc.dump(2) + "\n";
  }

  // CSV and Markdown share a flat table per section.
  std::ostringstream os;
  const bool md = format == Format::Markdown;
  auto line = [&](const std::vector<std::string>& fields) {
    if (md) {
      os << "|";
      for (const auto& f : fields) os << " " << f << " |";
    } else {
      for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
    }
    os << "\n";
  };
  auto header = [&](const std::string& title, const std::vector<std::string>& fields) {
    if (md) {
      os << "## " << title << "\n\n";
      line(fields);
      os << "|";
      for (std::size_t i = 0; i < fields.size(); ++i) os << " --- |";
      os << "\n";
    } else {
      os << "# " << title << "\n";
      line(fields);
    }
  };
  auto na = [](const std::optional<Cycles>& v) { return v ? std::to_string(*v) : std::string(kNaCell); };

  if (all || table == "gpus") {
    header("gpus", {"name", "architecture", "chip", "compute_capability", "toolchain"});
    for (const auto& g : data.gpus()) {
      line({g.name, std::string(to_string(g.architecture)), g.chip.value_or(""), g.compute_capability.to_string(),
            g.toolchain_version});
    }
    if (md) os << "\n";
  }
  if (all || table == "alu") {
    header("alu", {"category", "row", "gpu", "optimized", "non_optimized"});
    for (const auto& c : data.cells()) {
      line({std::string(to_string(c.category)), c.key, c.gpu, na(c.optimized), na(c.non_optimized)});
    }
    if (md) os << "\n";
  }
  if (all || table == "memory") {
    header("memory", {"probe", "gpu", "optimized", "non_optimized"});
    for (const auto& r : data.memory_rows()) {
      for (std::size_t i = 0; i < data.memory_gpus().size(); ++i) {
        line({std::string(to_string(r.probe)), data.memory_gpus()[i], std::to_string(r.optimized[i]),
              std::to_string(r.non_optimized[i])});
      }
    }
    if (md) os << "\n";
  }
  if (all || table == "cuda") {
    const auto& cuda = data.cuda_versions();
    header("cuda", {"section", "instruction", "cuda_" + cuda.baseline, "cuda_" + cuda.candidate});
    for (const auto& r : cuda.rows) line({r.section, r.key, std::to_string(r.baseline), std::to_string(r.candidate)});
  }
  return os.str();
}

}  // namespace gpulat::report
