#pragma once

#include <string>

#include "tmap/estimation.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

std::string map_to_json(const TriangularMap& map);
TriangularMap map_from_json(const std::string& text);

std::string fit_report_json(const FitReport& report);

}  // namespace tmap
