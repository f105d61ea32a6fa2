#pragma once

#include <array>
#include <string>
#include <string_view>

#include "ridl/errors.hpp"

namespace ridl {

enum class Family { star, path, grid2d, grid3d, complete, erdos_renyi, file };

inline constexpr std::array<Family, 7> kAllFamilies{Family::star,     Family::path,        Family::grid2d,
                                                    Family::grid3d,   Family::complete,    Family::erdos_renyi,
                                                    Family::file};

inline constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::star: return "star";
    case Family::path: return "path";
    case Family::grid2d: return "grid2d";
    case Family::grid3d: return "grid3d";
    case Family::complete: return "complete";
    case Family::erdos_renyi: return "erdos-renyi";
    case Family::file: return "file";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (auto f : kAllFamilies)
    if (to_string(f) == name) return f;
  throw ValidationError("unknown graph family \"" + std::string(name) + "\"");
}

}  // namespace ridl
