// Convenience PNG emission (heat maps and line plots) behind the
// --plots flag.  The CSV files remain the canonical output; these are
// quick-look rasters with no axes decoration.

#pragma once

#include <filesystem>
#include <vector>

namespace polaring {

void write_png(const std::filesystem::path& path, int width, int height,
               const std::vector<unsigned char>& rgb);

// values row-major [ny][nx] mapped onto a blue-white-red scale between
// lo and hi; x runs along nx (typically time), y along ny
std::filesystem::path plot_heatmap(const std::filesystem::path& path,
                                   const std::vector<double>& values, int nx, int ny, double lo,
                                   double hi);

std::filesystem::path plot_line(const std::filesystem::path& path, const std::vector<double>& x,
                                const std::vector<double>& y);

} // namespace polaring
