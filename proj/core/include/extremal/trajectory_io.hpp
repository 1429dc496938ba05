#pragma once

#include <iosfwd>
#include <string>

#include "extremal/integrate.hpp"

namespace extremal {

// CSV with header t,x1..xn,rho,u1..uk,h<k+1>..h<n>, one row per sample, followed by
// a '#'-prefixed switch block (t_switch, u_before, u_after, predicted d). Numbers are
// written with 17 significant digits so output is bitwise stable.
void write_trajectory_csv(std::ostream& os, const ExtremalTrajectory& traj, int n, int k);
std::string trajectory_csv(const ExtremalTrajectory& traj, int n, int k);

}  // namespace extremal
