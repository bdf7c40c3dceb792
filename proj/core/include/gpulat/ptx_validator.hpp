#pragma once

#include <string>
#include <vector>

#include "gpulat/ptx_module.hpp"

namespace gpulat::ptx {

struct Diagnostic {
  std::string code;     // "undeclared-register", "ill-nested-timing-block", ...
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

// A clock sandwich found in an entry body; indices are body positions.
struct DiscoveredBlock {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  std::size_t subtract_index = 0;
  TimingBlock block;
};

struct BlockScan {
  std::vector<DiscoveredBlock> blocks;
  std::vector<Diagnostic> diagnostics;
};

// Pairs clock reads through the subtraction that consumes them.
BlockScan find_timing_blocks(const Entry& entry);

// Parses module.text and checks it is a well-formed measurement kernel:
// declared registers cover all uses, no register is read before written,
// timing blocks are well nested and bracketed by membar+bar.sync, every
// timed result feeds a dependent operation, each output parameter is
// stored exactly once and every block's delta reaches a cycle output.
// An empty result means the module is valid.
std::vector<Diagnostic> validate_ptx(const PtxModule& module);

}  // namespace gpulat::ptx
