// Built-in trajectory presets mirroring the experiment tube geometries:
// straight 215 mm, 30° slope, 244 mm bent tube, 684 mm complex tube, a
// 2.46 m intestine-length serpentine, and its 0.3 m desk-scale variant.
#pragma once

#include <string_view>
#include <vector>

#include "capsim/geometry.hpp"

namespace capsim::presets {

std::vector<Vec3> path_preset(std::string_view name);

/// All preset names, in a fixed order.
const std::vector<std::string>& path_preset_names();

}  // namespace capsim::presets
