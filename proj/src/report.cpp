#include "rosdyn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rosdyn {

namespace {

void append_full_precision(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t";
  for (const auto& name : traj.bidder_names) out += ",m_" + name;
  if (traj.has_utilities())
    for (const auto& name : traj.bidder_names) out += ",U_" + name;
  out += "\n";
  for (std::size_t k = 0; k < traj.n_samples(); ++k) {
    append_full_precision(out, traj.times[k]);
    for (double v : traj.states[k]) {
      out += ',';
      append_full_precision(out, v);
    }
    if (traj.has_utilities())
      for (double v : traj.utilities[k]) {
        out += ',';
        append_full_precision(out, v);
      }
    out += "\n";
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  write_text_file(path, trajectory_to_csv(traj));
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty trajectory CSV");
  const auto header = split_line(line);
  if (header.empty() || header[0] != "t")
    throw std::invalid_argument("trajectory CSV must start with a 't' column");

  Trajectory traj;
  std::size_t n_m = 0, n_u = 0;
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k].rfind("m_", 0) == 0) {
      if (n_u > 0) throw std::invalid_argument("m_ column after U_ columns");
      traj.bidder_names.push_back(header[k].substr(2));
      ++n_m;
    } else if (header[k].rfind("U_", 0) == 0) {
      ++n_u;
    } else {
      throw std::invalid_argument("unexpected column '" + header[k] + "'");
    }
  }
  if (n_u != 0 && n_u != n_m)
    throw std::invalid_argument("utility column count does not match state columns");

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 1 + n_m + n_u)
      throw std::invalid_argument("row " + std::to_string(lineno) + ": expected " +
                                  std::to_string(1 + n_m + n_u) + " fields");
    std::size_t at = 0;
    const auto next = [&]() {
      try {
        return std::stod(fields[at++]);
      } catch (const std::exception&) {
        throw std::invalid_argument("row " + std::to_string(lineno) + ": bad number '" +
                                    fields[at - 1] + "'");
      }
    };
    traj.times.push_back(next());
    std::vector<double> state(n_m);
    for (auto& v : state) v = next();
    traj.states.push_back(std::move(state));
    if (n_u) {
      std::vector<double> u(n_u);
      for (auto& v : u) v = next();
      traj.utilities.push_back(std::move(u));
    }
  }
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k)
    if (!(traj.times[k] < traj.times[k + 1]))
      throw std::invalid_argument("times must be strictly increasing");
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory CSV: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return trajectory_from_csv(buf.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string orbit_svg(const std::vector<std::array<double, 2>>& path2d) {
  double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  if (!path2d.empty()) {
    xlo = xhi = path2d[0][0];
    ylo = yhi = path2d[0][1];
    for (const auto& p : path2d) {
      xlo = std::min(xlo, p[0]);
      xhi = std::max(xhi, p[0]);
      ylo = std::min(ylo, p[1]);
      yhi = std::max(yhi, p[1]);
    }
  }
  const double margin = 0.05 * std::max({xhi - xlo, yhi - ylo, 1e-9});
  xlo -= margin;
  xhi += margin;
  ylo -= margin;
  yhi += margin;

  // One scale for both axes keeps orbits round.
  const double width = 640.0;
  const double scale = width / (xhi - xlo);
  const double height = (yhi - ylo) * scale;
  const auto px = [&](double x) { return (x - xlo) * scale; };
  const auto py = [&](double y) { return height - (y - ylo) * scale; };

  std::ostringstream svg;
  svg.precision(8);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes through zero when visible, otherwise along the data edge
  const double ax = (xlo < 0.0 && xhi > 0.0) ? 0.0 : xlo;
  const double ay = (ylo < 0.0 && yhi > 0.0) ? 0.0 : ylo;
  svg << "  <line x1=\"" << px(xlo) << "\" y1=\"" << py(ay) << "\" x2=\"" << px(xhi)
      << "\" y2=\"" << py(ay) << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
  svg << "  <line x1=\"" << px(ax) << "\" y1=\"" << py(ylo) << "\" x2=\"" << px(ax)
      << "\" y2=\"" << py(yhi) << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
  svg << "  <text x=\"4\" y=\"" << height - 4 << "\" font-size=\"12\" fill=\"#555\">("
      << xlo << ", " << ylo << ")</text>\n";
  svg << "  <text x=\"" << width - 150 << "\" y=\"14\" font-size=\"12\" fill=\"#555\">("
      << xhi << ", " << yhi << ")</text>\n";
  svg << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  for (const auto& p : path2d) svg << px(p[0]) << ',' << py(p[1]) << ' ';
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

void write_orbit_svg(const std::vector<std::array<double, 2>>& path2d,
                     const std::string& path) {
  write_text_file(path, orbit_svg(path2d));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rosdyn
