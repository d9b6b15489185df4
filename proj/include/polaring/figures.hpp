// Parameter grids behind each published figure, runnable at a
// configurable ensemble scale.  Emits the underlying data tables into
// one directory per figure.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "polaring/config.hpp"

namespace polaring {

std::vector<std::string> figure_names();

// scale multiplies the reference ensemble sizes (1.0 reproduces the
// published statistics, smaller values give quick passes)
void reproduce_figure(const std::string& name, const RunConfig& base, double scale,
                      const std::filesystem::path& out_root);

} // namespace polaring
