#include "gpulat/reference_data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded.hpp"
#include "gpulat/errors.hpp"

namespace gpulat::ref {

using nlohmann::json;

std::string fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return std::string(s);
}

Cycles parse_cycles(std::string_view text) {
  Cycles v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw SchemaError("bad cycle value '" + std::string(text) + "'");
  }
  return v;
}

template <typename T>
T required(const json& j, const char* field) {
  if (!j.contains(field)) throw SchemaError(std::string("missing field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + field + "': " + e.what());
  }
}

GpuConfiguration parse_config(const json& c) {
  GpuConfiguration g;
  g.gpu_clock_mhz = required<int>(c, "gpuClockMHz");
  g.mem_clock_mhz = required<int>(c, "memClockMHz");
  g.mem_size_gb = required<int>(c, "memSizeGB");
  g.mem_type = required<std::string>(c, "memType");
  g.mem_bus_bits = required<int>(c, "memBusBits");
  g.mem_bandwidth_gbs = required<double>(c, "memBandwidthGBs");
  g.l1_size_kb = required<int>(c, "l1SizeKB");
  g.l2_size = required<std::string>(c, "l2Size");
  if (c.contains("tflopsFp16") && !c.at("tflopsFp16").is_null()) g.tflops_fp16 = c.at("tflopsFp16").get<double>();
  g.tflops_fp32 = required<double>(c, "tflopsFp32");
  g.tflops_fp64 = required<double>(c, "tflopsFp64");
  g.texture_rate_gtexels = required<double>(c, "textureRateGTexels");
  g.cores_total = required<int>(c, "coresTotal");
  g.smx_count = required<int>(c, "smxCount");
  const json& p = c.at("perSmx");
  g.per_smx = {required<int>(p, "sp"), required<int>(p, "dp"), required<int>(p, "sfu"), required<int>(p, "ldst")};
  return g;
}

std::vector<Cycles> parse_value_list(const json& j, const char* field, std::size_t expected) {
  std::vector<Cycles> out;
  for (const auto& s : required<std::vector<std::string>>(j, field)) out.push_back(parse_cycles(trim(s)));
  if (out.size() != expected) throw SchemaError(std::string("field '") + field + "' has the wrong length");
  return out;
}

}  // namespace

std::vector<std::optional<Cycles>> parse_cell(std::string_view text) {
  std::vector<std::optional<Cycles>> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t slash = text.find('/', pos);
    const std::string part = trim(text.substr(pos, slash == std::string_view::npos ? std::string_view::npos : slash - pos));
    if (part == "NA") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_cycles(part));
    }
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return out;
}

std::string compute_tables_checksum(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("reference data: ") + e.what());
  }
  if (!doc.contains("tables")) throw SchemaError("reference data: missing 'tables'");
  return fnv1a64(doc.at("tables").dump());
}

ReferenceData ReferenceData::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("reference data: ") + e.what());
  }
  const int version = required<int>(doc, "schemaVersion");
  if (version != kReferenceSchemaVersion) {
    throw SchemaError("reference data: unsupported schemaVersion " + std::to_string(version));
  }
  ReferenceData data;
  data.checksum_ = required<std::string>(doc, "checksum");
  const json& tables = doc.at("tables");
  const std::string actual = fnv1a64(tables.dump());
  if (actual != data.checksum_) {
    throw SchemaError("reference data checksum mismatch: file says " + data.checksum_ + ", content is " + actual);
  }

  try {
    for (const auto& g : tables.at("gpus")) {
      GpuTarget t;
      t.name = required<std::string>(g, "name");
      t.slug = required<std::string>(g, "slug");
      t.architecture = parse_architecture(required<std::string>(g, "architecture"));
      if (!g.at("chip").is_null()) t.chip = g.at("chip").get<std::string>();
      t.compute_capability = ComputeCapability::parse(required<std::string>(g, "computeCapability"));
      t.toolchain_version = required<std::string>(g, "toolchain");
      if (!g.at("config").is_null()) t.config = parse_config(g.at("config"));
      if (!compute_capability_matches(t.architecture, t.compute_capability)) {
        throw SchemaError("gpu " + t.name + ": compute capability does not match architecture");
      }
      data.gpus_.push_back(std::move(t));
    }

    const json& appendix = tables.at("appendix");
    for (const auto& c : appendix.at("columns")) {
      data.columns_.push_back({required<std::string>(c, "label"), required<std::vector<std::string>>(c, "gpus")});
    }
    for (const auto& r : appendix.at("rows")) {
      AppendixRow row;
      row.category = parse_category(required<std::string>(r, "category"));
      row.label = required<std::string>(r, "label");
      row.key = required<std::string>(r, "key");
      row.optimized = required<std::vector<std::string>>(r, "optimized");
      row.non_optimized = required<std::vector<std::string>>(r, "nonOptimized");
      if (row.optimized.size() != data.columns_.size() || row.non_optimized.size() != data.columns_.size()) {
        throw SchemaError("row '" + row.key + "' does not have one cell per column");
      }
      for (std::size_t i = 0; i < data.columns_.size(); ++i) {
        for (const auto* cells : {&row.optimized, &row.non_optimized}) {
          const auto parts = parse_cell((*cells)[i]);
          if (parts.size() != 1 && parts.size() != data.columns_[i].gpus.size()) {
            throw SchemaError("row '" + row.key + "': cell '" + (*cells)[i] + "' does not fit its column");
          }
        }
      }
      data.rows_.push_back(std::move(row));
    }

    const json& memory = tables.at("memory");
    data.memory_gpus_ = required<std::vector<std::string>>(memory, "gpus");
    for (const auto& r : memory.at("rows")) {
      MemoryRow row;
      row.probe = parse_probe_kind(required<std::string>(r, "probe"));
      row.label = required<std::string>(r, "label");
      row.optimized = parse_value_list(r, "optimized", data.memory_gpus_.size());
      row.non_optimized = parse_value_list(r, "nonOptimized", data.memory_gpus_.size());
      data.memory_rows_.push_back(std::move(row));
    }

    const json& cuda = tables.at("cudaVersions");
    data.cuda_.gpus = required<std::vector<std::string>>(cuda, "gpus");
    data.cuda_.baseline = required<std::string>(cuda, "baseline");
    data.cuda_.candidate = required<std::string>(cuda, "candidate");
    for (const auto& r : cuda.at("rows")) {
      CudaVersionRow row;
      row.section = required<std::string>(r, "section");
      row.label = required<std::string>(r, "label");
      row.key = required<std::string>(r, "key");
      row.appendix_key = required<std::string>(r, "appendixKey");
      const auto values = parse_value_list(r, "values", 2);
      row.baseline = values[0];
      row.candidate = values[1];
      data.cuda_.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("reference data: ") + e.what());
  } catch (const ParseError& e) {
    throw SchemaError(std::string("reference data: ") + e.what());
  }
  return data;
}

ReferenceData ReferenceData::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ReferenceData& ReferenceData::embedded() {
  static const ReferenceData data = parse(embedded::reference_tables());
  return data;
}

const GpuTarget* ReferenceData::find_gpu(std::string_view name_or_slug) const {
  for (const auto& g : gpus_) {
    if (g.name == name_or_slug || g.slug == name_or_slug) return &g;
  }
  return nullptr;
}

const GpuTarget& ReferenceData::gpu(std::string_view name_or_slug) const {
  if (const auto* g = find_gpu(name_or_slug)) return *g;
  throw NotInTable("unknown gpu '" + std::string(name_or_slug) + "'");
}

const AppendixRow* ReferenceData::find_row(std::string_view key) const {
  for (const auto& r : rows_) {
    if (r.key == key) return &r;
  }
  return nullptr;
}

std::size_t ReferenceData::column_of(std::string_view gpu_name) const {
  const std::string name = gpu(gpu_name).name;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    for (const auto& g : columns_[i].gpus) {
      if (g == name) return i;
    }
  }
  throw NotInTable("gpu '" + name + "' has no column in the ALU table");
}

namespace {

std::optional<Cycles> resolve(const std::string& cell, const AppendixColumn& column, const std::string& gpu) {
  const auto parts = parse_cell(cell);
  if (parts.size() == 1) return parts.front();
  for (std::size_t i = 0; i < column.gpus.size(); ++i) {
    if (column.gpus[i] == gpu) return parts[i];
  }
  return std::nullopt;
}

}  // namespace

std::vector<ReferenceCell> ReferenceData::cells() const {
  std::vector<ReferenceCell> out;
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      for (const auto& gpu : columns_[c].gpus) {
        out.push_back({row.label, row.key, row.category, gpu, resolve(row.optimized[c], columns_[c], gpu),
                       resolve(row.non_optimized[c], columns_[c], gpu)});
      }
    }
  }
  return out;
}

Cycles ReferenceData::lookup(std::string_view gpu_name, std::string_view row_key, OptClass opt) const {
  const AppendixRow* row = find_row(row_key);
  if (!row) throw NotInTable("no ALU table row '" + std::string(row_key) + "'");
  const std::size_t c = column_of(gpu_name);
  const std::string& cell = opt == OptClass::Optimized ? row->optimized[c] : row->non_optimized[c];
  const auto value = resolve(cell, columns_[c], gpu(gpu_name).name);
  if (!value) {
    throw NotApplicable(std::string(row_key) + " is NA for " + gpu(gpu_name).name);
  }
  return *value;
}

Cycles ReferenceData::lookup_memory(std::string_view gpu_name, MemoryProbeKind probe, OptClass opt) const {
  if (probe != MemoryProbeKind::SharedMemory && probe != MemoryProbeKind::ConstantMemory) {
    throw NotInTable(std::string(to_string(probe)) + " latencies are not tabulated");
  }
  const std::string name = gpu(gpu_name).name;
  std::size_t col = memory_gpus_.size();
  for (std::size_t i = 0; i < memory_gpus_.size(); ++i) {
    if (memory_gpus_[i] == name) col = i;
  }
  if (col == memory_gpus_.size()) throw NotInTable("gpu '" + name + "' has no memory latency column");
  for (const auto& r : memory_rows_) {
    if (r.probe == probe) return opt == OptClass::Optimized ? r.optimized[col] : r.non_optimized[col];
  }
  throw NotInTable(std::string(to_string(probe)) + " row missing");
}

const CudaVersionRow* ReferenceData::find_cuda_row(std::string_view instruction) const {
  for (const auto& r : cuda_.rows) {
    if (r.key == instruction || r.appendix_key == instruction) return &r;
  }
  return nullptr;
}

std::pair<Cycles, Cycles> ReferenceData::lookup_cuda_delta(std::string_view instruction) const {
  if (const auto* r = find_cuda_row(instruction)) return {r->baseline, r->candidate};
  throw NotInTable("'" + std::string(instruction) + "' is not a compiler-version table row");
}

}  // namespace gpulat::ref
