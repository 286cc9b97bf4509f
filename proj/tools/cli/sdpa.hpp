#pragma once

#include <string>

#include <refine_sdo/model.hpp>

namespace refine_sdo::cli {

// Sparse SDPA (.dat-s). Matrix 0 becomes C, matrix i becomes A_i, the rhs vector becomes b.
// Diagonal blocks (negative size) are stored as runs of 1×1 blocks.
// Throws ParseError, IndexOutOfBlock or NonSymmetricDuplicate, each carrying a line number.
SdoProblem parse_sdpa(const std::string& text, Form form);

// Reads and parses a file. Throws IoError when it cannot be read.
SdoProblem load_sdpa(const std::string& path, Form form);

// Upper-triangle entries with 17 significant digits; every block is written as a dense block.
std::string emit_sdpa(const SdoProblem& prob);

} // namespace refine_sdo::cli
