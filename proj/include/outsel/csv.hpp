#pragma once

#include "outsel/linear_model.hpp"

#include <istream>
#include <string>

namespace outsel {

/// Reads an RFC 4180 CSV stream (quoted fields, doubled quotes, CRLF or LF
/// line endings). The first record is the header. Throws ValidationError on
/// ragged rows, unterminated quotes, or a missing header.
Table readCsv(std::istream& in);
Table readCsvFile(const std::string& path);

}  // namespace outsel
