#include "scenmap/error.hpp"

namespace scenmap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::rank_deficient: return "rank_deficient";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace scenmap
