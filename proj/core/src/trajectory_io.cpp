#include "extremal/trajectory_io.hpp"

#include <ostream>
#include <sstream>

#include "extremal/errors.hpp"

namespace extremal {

namespace {

void write_vector(std::ostream& os, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << ',' << v[i];
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const ExtremalTrajectory& traj, int n, int k) {
    if (k < 1 || k >= n) {
        throw DimensionError("write_trajectory_csv: need 1 <= k < n");
    }
    const auto precision = os.precision(17);
    os << 't';
    for (int i = 1; i <= n; ++i) {
        os << ",x" << i;
    }
    os << ",rho";
    for (int i = 1; i <= k; ++i) {
        os << ",u" << i;
    }
    for (int j = k + 1; j <= n; ++j) {
        os << ",h" << j;
    }
    os << '\n';
    for (const TrajectorySample& s : traj.samples) {
        if (s.point.x.size() != n || s.point.u.size() != k || s.point.h_tail.size() != n - k) {
            throw DimensionError("write_trajectory_csv: sample dimension mismatch");
        }
        os << s.t;
        write_vector(os, s.point.x);
        os << ',' << s.point.rho;
        write_vector(os, s.point.u);
        write_vector(os, s.point.h_tail);
        os << '\n';
    }
    os << "# switches " << traj.switches.size() << '\n';
    os << "# t_switch";
    for (int i = 1; i <= k; ++i) {
        os << ",u_before" << i;
    }
    for (int i = 1; i <= k; ++i) {
        os << ",u_after" << i;
    }
    os << ",d\n";
    for (const SwitchEvent& ev : traj.switches) {
        os << "# " << ev.t;
        write_vector(os, ev.u_before);
        write_vector(os, ev.u_after);
        os << ',' << ev.predicted.d << '\n';
    }
    os.precision(precision);
}

std::string trajectory_csv(const ExtremalTrajectory& traj, int n, int k) {
    std::ostringstream os;
    write_trajectory_csv(os, traj, n, k);
    return os.str();
}

}  // namespace extremal
