#pragma once

#include <string>

namespace samom {

// %.17g-style: 17 significant digits, reads back to the same double.
std::string format_double(double v);
// Shortest text that reads back to the same double; used in labels.
std::string format_short(double v);

}  // namespace samom
