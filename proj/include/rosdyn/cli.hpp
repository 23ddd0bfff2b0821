#pragma once

// Command-line front end and the gallery scenario definitions it shares with
// the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "rosdyn/analysis.hpp"
#include "rosdyn/circuit.hpp"
#include "rosdyn/dynamics.hpp"
#include "rosdyn/linear.hpp"
#include "rosdyn/market.hpp"

namespace rosdyn::cli {

// argv-style entry point (without the program name); returns the exit status.
int run_cli(const std::vector<std::string>& args);

// Dense row-major matrix text: one row per line, entries separated by spaces
// or commas.
Eigen::MatrixXd parse_matrix_text(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

// Jordan data text: one "re im multiplicity" triple per line.
std::vector<linear::JordanBlockSpec> parse_jordan_text(const std::string& text);

// --- gallery scenarios -----------------------------------------------------

// The planar rotation compiled through the competitive lift with the
// canonical affine map (scale 0.4, offsets 1.5), so the first two multipliers
// trace m1 = 1.5 - 0.4 cos t, m2 = 1.5 - 0.4 sin t from
// m0 = (1.1, 1.5, 1.9, 1.5, 2, 2).
linear::SimulatedLinear circle_scenario(double horizon = 4.0 * 3.14159265358979323846);

// Three mutually repressing NOR constraints (one satisfying assignment per
// rotation).
circuit::BooleanNetwork nor3_network();
// Three-gate feedforward circuit: A = NOR(), B = NOR(A), C = NOR(A, B).
circuit::BooleanNetwork acyclic3_network();
// Unsatisfiable NOT triangle.
circuit::BooleanNetwork not3_network();

struct GalleryScenario {
  std::string name;
  MarketInstance instance;
  std::vector<double> m0;
  double horizon = 200.0;
  double dt = 0.01;
  double sample_every = 0.01;
  bool smooth = true;
};

// The repressilator / coupling / circle / circuit scenarios behind the
// figures, with seeded starts where the source leaves them unspecified.
std::vector<GalleryScenario> gallery_scenarios(std::uint64_t seed);

int run_gallery(const std::string& out_dir, std::uint64_t seed);

std::string classification_report(const Trajectory& traj,
                                  const analysis::OrbitClass& orbit);

}  // namespace rosdyn::cli
