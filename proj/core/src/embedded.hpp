#pragma once

#include <cstddef>
#include <string_view>

namespace gpulat::embedded {

extern const unsigned char kReferenceTables[];
extern const std::size_t kReferenceTables_size;
extern const unsigned char kCommandTemplates[];
extern const std::size_t kCommandTemplates_size;

inline std::string_view reference_tables() {
  return {reinterpret_cast<const char*>(kReferenceTables), kReferenceTables_size};
}
inline std::string_view command_templates() {
  return {reinterpret_cast<const char*>(kCommandTemplates), kCommandTemplates_size};
}

}  // namespace gpulat::embedded
