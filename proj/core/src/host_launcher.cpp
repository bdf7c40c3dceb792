#include <sstream>

#include "gpulat/toolchain.hpp"

namespace gpulat::toolchain {

namespace {

const char* c_type(int bits) {
  switch (bits) {
    case 16: return "std::uint16_t";
    case 64: return "std::uint64_t";
    default: return "std::uint32_t";
  }
}

const char* print_format(int bits) { return bits == 64 ? "%llu" : "%u"; }
const char* print_cast(int bits) { return bits == 64 ? "(unsigned long long)" : "(unsigned)"; }

void emit_initializer(std::ostringstream& os, const std::string& name, const ptx::KernelParam& p) {
  os << "  const " << c_type(p.element_bits) << " " << name << "_init[] = {";
  if (p.initial_bits.empty()) {
    os << "0";
  } else {
    for (std::size_t i = 0; i < p.initial_bits.size(); ++i) {
      if (i) os << ", ";
      os << p.initial_bits[i] << (p.element_bits == 64 ? "ull" : "u");
    }
  }
  os << "};\n";
}

}  // namespace

std::string emit_host_launcher(const ptx::PtxModule& module, const runner::LaunchConfig& launch,
                               const std::string& fatbin_header, const std::string& fatbin_symbol) {
  std::ostringstream os;
  os << "// Generated by gpulat: host launcher for " << module.kernel_id << ".\n";
  os << "// RESULT lines: RESULT <kernel> <output-name> <value>\n";
  os << "#include <cuda.h>\n#include <cstdint>\n#include <cstdio>\n\n";
  os << "#include \"" << fatbin_header << "\"\n\n";
  os << "#define CHECK(call)                                                   \\\n"
        "  do {                                                              \\\n"
        "    CUresult status_ = (call);                                      \\\n"
        "    if (status_ != CUDA_SUCCESS) {                                  \\\n"
        "      const char* msg_ = nullptr;                                   \\\n"
        "      cuGetErrorString(status_, &msg_);                             \\\n"
        "      std::fprintf(stderr, \"%s failed: %s\\n\", #call, msg_ ? msg_ : \"?\"); \\\n"
        "      return 1;                                                     \\\n"
        "    }                                                               \\\n"
        "  } while (0)\n\n";

  os << "static const unsigned kGrid[3] = {" << launch.grid.x << ", " << launch.grid.y << ", " << launch.grid.z
     << "};\n";
  os << "static const unsigned kBlock[3] = {" << launch.block.x << ", " << launch.block.y << ", " << launch.block.z
     << "};\n\n";

  os << "int main() {\n";
  os << "  CHECK(cuInit(0));\n";
  os << "  CUdevice device;\n  CHECK(cuDeviceGet(&device, 0));\n";
  os << "  CUcontext context;\n  CHECK(cuCtxCreate(&context, 0, device));\n";
  os << "  CUmodule module;\n  CHECK(cuModuleLoadFatBinary(&module, " << fatbin_symbol << "));\n";
  os << "  CUfunction kernel;\n  CHECK(cuModuleGetFunction(&kernel, module, \"" << module.entry_name << "\"));\n\n";

  std::vector<std::string> arg_names;
  for (std::size_t i = 0; i < module.params.size(); ++i) {
    const auto& p = module.params[i];
    const std::string buf = "buf" + std::to_string(i);
    const std::string type = c_type(p.element_bits);
    os << "  // param " << i << ": " << to_string(p.role);
    if (!p.output_name.empty()) os << " " << p.output_name;
    os << "\n";
    switch (p.role) {
      case ptx::ParamRole::InputPointer:
        emit_initializer(os, buf, p);
        os << "  CUdeviceptr " << buf << ";\n";
        os << "  CHECK(cuMemAlloc(&" << buf << ", sizeof " << buf << "_init));\n";
        os << "  CHECK(cuMemcpyHtoD(" << buf << ", " << buf << "_init, sizeof " << buf << "_init));\n";
        arg_names.push_back(buf);
        break;
      case ptx::ParamRole::CycleOutput:
      case ptx::ParamRole::SinkOutput:
        os << "  CUdeviceptr " << buf << ";\n";
        os << "  CHECK(cuMemAlloc(&" << buf << ", sizeof(" << type << ")));\n";
        os << "  CHECK(cuMemsetD8(" << buf << ", 0, sizeof(" << type << ")));\n";
        arg_names.push_back(buf);
        break;
      case ptx::ParamRole::TextureObject: {
        emit_initializer(os, buf, p);
        os << "  CUdeviceptr " << buf << ";\n";
        os << "  CHECK(cuMemAlloc(&" << buf << ", sizeof " << buf << "_init));\n";
        os << "  CHECK(cuMemcpyHtoD(" << buf << ", " << buf << "_init, sizeof " << buf << "_init));\n";
        os << "  CUDA_RESOURCE_DESC res" << i << " = {};\n";
        os << "  res" << i << ".resType = CU_RESOURCE_TYPE_LINEAR;\n";
        os << "  res" << i << ".res.linear.devPtr = " << buf << ";\n";
        os << "  res" << i << ".res.linear.format = CU_AD_FORMAT_UNSIGNED_INT32;\n";
        os << "  res" << i << ".res.linear.numChannels = 1;\n";
        os << "  res" << i << ".res.linear.sizeInBytes = sizeof " << buf << "_init;\n";
        os << "  CUDA_TEXTURE_DESC tdesc" << i << " = {};\n";
        os << "  tdesc" << i << ".addressMode[0] = CU_TR_ADDRESS_MODE_CLAMP;\n";
        os << "  tdesc" << i << ".filterMode = CU_TR_FILTER_MODE_POINT;\n";
        os << "  tdesc" << i << ".flags = CU_TRSF_READ_AS_INTEGER;\n";
        os << "  CUtexObject tex" << i << ";\n";
        os << "  CHECK(cuTexObjectCreate(&tex" << i << ", &res" << i << ", &tdesc" << i << ", nullptr));\n";
        os << "  unsigned long long texarg" << i << " = tex" << i << ";\n";
        arg_names.push_back("texarg" + std::to_string(i));
        break;
      }
    }
  }

  os << "\n  void* args[] = {";
  for (std::size_t i = 0; i < arg_names.size(); ++i) os << (i ? ", " : "") << "&" << arg_names[i];
  os << "};\n";
  os << "  CHECK(cuLaunchKernel(kernel, kGrid[0], kGrid[1], kGrid[2], kBlock[0], kBlock[1], kBlock[2], 0, "
        "nullptr, args, nullptr));\n";
  os << "  CHECK(cuCtxSynchronize());\n\n";

  for (std::size_t i = 0; i < module.params.size(); ++i) {
    const auto& p = module.params[i];
    if (p.role != ptx::ParamRole::CycleOutput && p.role != ptx::ParamRole::SinkOutput) continue;
    const std::string buf = "buf" + std::to_string(i);
    const std::string type = c_type(p.element_bits);
    os << "  " << type << " out" << i << " = 0;\n";
    os << "  CHECK(cuMemcpyDtoH(&out" << i << ", " << buf << ", sizeof out" << i << "));\n";
    if (p.role == ptx::ParamRole::CycleOutput) {
      os << "  std::printf(\"RESULT " << module.kernel_id << " " << p.output_name << " %u\\n\", (unsigned)out" << i
         << ");\n";
    } else {
      os << "  std::printf(\"# sink " << print_format(p.element_bits) << "\\n\", " << print_cast(p.element_bits)
         << "out" << i << ");\n";
    }
  }
  os << "\n  CHECK(cuModuleUnload(module));\n";
  os << "  CHECK(cuCtxDestroy(context));\n";
  os << "  return 0;\n}\n";
  return os.str();
}

}  // namespace gpulat::toolchain
