#pragma once

#include <string>

#include "busweaver/ir.hpp"

namespace busweaver {

/// Verilog-2005 text for every module, in design order. Deterministic.
std::string emit_design(const HwDesign& design);
std::string emit_module(const HwModule& module, const HwDesign* design = nullptr);

/// One operation per line; see dump_module.
std::string emit_ir_dump(const HwDesign& design);

/// Output file for `input_path`: `<stem>.vec.v` next to it, or inside
/// `out_dir` when that is non-empty.
std::string output_path_for(const std::string& input_path, const std::string& out_dir = "");

}  // namespace busweaver
