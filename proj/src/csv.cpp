#include "qruler/csv.hpp"

#include <cmath>
#include <locale>
#include <sstream>

namespace qruler {

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << value;
  return os.str();
}

}  // namespace qruler
