#pragma once

#include <string>

namespace localmart {

/// Shortest decimal that round-trips to the same double.
std::string fmt_num(double v);

/// Fixed 17 significant digits, used for CSV numeric columns.
std::string fmt17(double v);

}  // namespace localmart
