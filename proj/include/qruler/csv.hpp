#pragma once

#include <string>

namespace qruler {

/// 12 significant digits, locale-independent.
std::string format_number(double value);

}  // namespace qruler
