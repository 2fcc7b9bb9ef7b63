#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>

namespace mbnoma {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using IMatrix = Eigen::MatrixXi;

inline constexpr double kPi = 3.14159265358979323846;

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Counter-based seed mixer (splitmix64). Feeding (master ^ mix(counter))
/// through this gives independent per-drop streams that do not depend on
/// scheduling order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one Monte Carlo drop, stable under any parallel schedule.
inline std::uint64_t drop_seed(std::uint64_t master, std::uint64_t drop_index) {
  return splitmix64(splitmix64(master) ^ splitmix64(0x5851f42d4c957f2dULL + drop_index));
}

}  // namespace mbnoma
