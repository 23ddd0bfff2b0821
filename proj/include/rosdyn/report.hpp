#pragma once

// Trajectory CSV emission/parsing and orbit SVG plots.

#include <array>
#include <string>
#include <vector>

#include "rosdyn/dynamics.hpp"

namespace rosdyn {

// Header `t,m_<name>...,U_<name>...`, one row per sample, full decimal
// precision so values round-trip exactly.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
std::string trajectory_to_csv(const Trajectory& traj);

// Parses a CSV produced by write_trajectory_csv (utility columns optional).
Trajectory trajectory_from_csv(const std::string& text);
Trajectory read_trajectory_csv(const std::string& path);

// Single polyline over the 2D path with axes; the viewBox is fitted to the
// data with a 5% margin and uses one scale for both axes.
void write_orbit_svg(const std::vector<std::array<double, 2>>& path2d,
                     const std::string& path);
std::string orbit_svg(const std::vector<std::array<double, 2>>& path2d);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rosdyn
