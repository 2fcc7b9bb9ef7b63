#pragma once

#include <random>
#include <vector>

#include "mbnoma/common.hpp"

namespace mbnoma {

/// One propagation path: departure angle at the BS, arrival angle at the UE,
/// complex gain (large-scale loss, shadowing and phase folded in).
struct PathComponent {
  double aod = 0.0;
  double aoa = 0.0;
  Complex gain{0.0, 0.0};
};

/// Geometric channel of one user: a line-of-sight path plus scattered paths.
struct UserChannel {
  int user_id = 0;  // 1-based rank after sorting by LOS power, strongest first
  double distance_m = 0.0;
  double pos_x = 0.0;
  double pos_y = 0.0;
  PathComponent los;
  std::vector<PathComponent> nlos;

  double los_power() const { return std::norm(los.gain); }
};

/// Distance-law parameters in dB: pl(d) = intercept + slope*log10(d) plus
/// lognormal shadowing with the given sigma.
struct PathLossParams {
  double los_intercept_db = 61.4;
  double los_slope_db = 20.0;
  double los_shadow_sigma_db = 5.8;
  double nlos_intercept_db = 72.0;
  double nlos_slope_db = 29.2;
  double nlos_shadow_sigma_db = 8.7;
};

/// Scenario knobs for one Monte Carlo drop. Powers are configured in dBm and
/// converted to mW at the accessors; everything internal runs in mW.
struct DropConfig {
  int num_users = 7;
  int num_rf_chains = 4;
  int m_bs = 100;
  int m_ue = 10;
  int m_min = 10;
  int num_nlos_paths = 10;
  double cell_radius_m = 200.0;
  double d_min_m = 10.0;
  double cell_portion = 1.0;  // fraction of the hexagon kept, in {1, 1/2, ..., 1/6}
  double bs_power_dbm = 30.0;
  double noise_power_dbm = -80.0;
  double r_min_low = 0.0;   // per-user rate floor drawn uniformly from (low, high]
  double r_min_high = 5.0;
  int max_sweeps_factor = 10;  // coalition formation cap: factor * num_users sweeps
  PathLossParams pathloss;

  double bs_power_mw() const { return dbm_to_mw(bs_power_dbm); }
  double noise_mw() const { return dbm_to_mw(noise_power_dbm); }

  /// Throws std::invalid_argument naming every offending field.
  void validate() const;
};

/// ULA response for m elements at half-wavelength spacing, entry i equal to
/// exp(-j*i*pi*cos(angle)), i = 0..m-1. Unnormalized. The angle must lie
/// strictly inside (0, pi).
CVector array_response(int m, double angle);

/// Sum of rank-one path contributions gain * a_rx(aoa) * a_tx(aod)^H,
/// LOS first. Result is m_ue x m_bs.
CMatrix channel_matrix(const UserChannel& user, int m_ue, int m_bs);

/// Draws K user channels: positions uniform over the kept hexagon wedge with
/// d >= d_min, LOS departure angle from the position, arrival and scattered
/// angles uniform in (0, pi), gains from the distance laws. Users are returned
/// sorted by LOS power, strongest first, user_id = 1..K.
std::vector<UserChannel> generate_drop(const DropConfig& cfg, std::mt19937_64& rng);

/// Per-user rate floors, uniform on (r_min_low, r_min_high] bit/s/Hz.
std::vector<double> draw_rate_floors(const DropConfig& cfg, std::mt19937_64& rng, int count);

}  // namespace mbnoma
