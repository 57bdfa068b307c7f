#ifndef EKFLOW_PLOT_HPP
#define EKFLOW_PLOT_HPP

#include "ekflow/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ekflow {

enum class Colormap { Sequential, Diverging };

/// Binary PPM (P6) heatmap of a cell field, y up, each cell drawn as a
/// square block of `scale` pixels. Diverging maps are symmetric about 0.
std::string heatmap_ppm(const ScalarField& f, Colormap cmap, int scale);

using Series = std::pair<std::string, std::vector<Scalar>>;
/// Line chart of one or more series against x as a standalone SVG document.
std::string timeseries_svg(const std::string& title, const std::vector<Scalar>& x, const std::vector<Series>& ys);

/// Writes heatmaps of the last snapshot and time-series charts of the
/// diagnostics into <run_dir>/plots; returns the written paths.
std::vector<std::string> plot_run(const std::string& run_dir);

}  // namespace ekflow

#endif  // EKFLOW_PLOT_HPP
