#include "mbnoma/channel.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mbnoma {

namespace {

// Keep drawn angles strictly inside (0, pi) so array_response never rejects
// a generated drop. The clamp only ever moves boundary-measure draws.
constexpr double kAngleEps = 1e-9;

double clamp_angle(double a) {
  return std::min(std::max(a, kAngleEps), kPi - kAngleEps);
}

}  // namespace

void DropConfig::validate() const {
  std::ostringstream err;
  auto fail = [&err](const std::string& msg) { err << msg << "; "; };

  if (num_users < 1) fail("num_users must be >= 1");
  if (num_rf_chains < 1) fail("num_rf_chains must be >= 1");
  if (num_users < num_rf_chains || num_users > 2 * num_rf_chains)
    fail("num_users must satisfy num_rf_chains <= num_users <= 2*num_rf_chains");
  if (m_bs < 1) fail("m_bs must be >= 1");
  if (m_ue < 1) fail("m_ue must be >= 1");
  if (m_min < 1) fail("m_min must be >= 1");
  if (2 * m_min > m_bs) fail("m_min too large: need 2*m_min <= m_bs");
  if (num_nlos_paths < 0) fail("num_nlos_paths must be >= 0");
  if (cell_radius_m <= 0.0) fail("cell_radius_m must be > 0");
  if (d_min_m < 0.0 || d_min_m >= cell_radius_m)
    fail("d_min_m must lie in [0, cell_radius_m)");
  {
    bool ok = false;
    for (int denom = 1; denom <= 6; ++denom)
      if (std::abs(cell_portion - 1.0 / denom) < 1e-6) ok = true;
    if (!ok) fail("cell_portion must be one of 1, 1/2, 1/3, 1/4, 1/5, 1/6");
  }
  if (r_min_low < 0.0) fail("r_min_low must be >= 0");
  if (r_min_high <= r_min_low) fail("r_min_high must exceed r_min_low");
  if (max_sweeps_factor < 1) fail("max_sweeps_factor must be >= 1");

  std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("DropConfig: " + msg);
}

CVector array_response(int m, double angle) {
  if (m < 1) throw std::invalid_argument("array_response: m must be >= 1");
  if (!(angle > 0.0 && angle < kPi))
    throw std::invalid_argument("array_response: angle must lie in (0, pi)");
  CVector a(m);
  const double step = kPi * std::cos(angle);
  for (int i = 0; i < m; ++i) a(i) = std::polar(1.0, -step * i);
  return a;
}

CMatrix channel_matrix(const UserChannel& user, int m_ue, int m_bs) {
  CMatrix h = user.los.gain * array_response(m_ue, user.los.aoa) *
              array_response(m_bs, user.los.aod).adjoint();
  for (const PathComponent& p : user.nlos)
    h += p.gain * array_response(m_ue, p.aoa) * array_response(m_bs, p.aod).adjoint();
  return h;
}

std::vector<UserChannel> generate_drop(const DropConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();

  const double radius = cfg.cell_radius_m;
  // Hexagon corners, one sextant triangle per 60 degree slice.
  double vx[7], vy[7];
  for (int s = 0; s <= 6; ++s) {
    vx[s] = radius * std::cos(kPi / 3.0 * s);
    vy[s] = radius * std::sin(kPi / 3.0 * s);
  }
  const int sextants = static_cast<int>(std::ceil(6.0 * cfg.cell_portion - 1e-9));
  const double az_cut = 2.0 * kPi * cfg.cell_portion;

  std::uniform_int_distribution<int> pick_sextant(0, sextants - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<UserChannel> users(cfg.num_users);
  for (UserChannel& u : users) {
    // Rejection sampling: uniform in the union of the first ceil(6p)
    // sextant triangles, then clipped to azimuth <= p*360deg and d >= d_min.
    double x = 0.0, y = 0.0, d = 0.0, az = 0.0;
    for (;;) {
      const int s = pick_sextant(rng);
      double b1 = unit(rng), b2 = unit(rng);
      if (b1 + b2 > 1.0) {
        b1 = 1.0 - b1;
        b2 = 1.0 - b2;
      }
      x = b1 * vx[s] + b2 * vx[s + 1];
      y = b1 * vy[s] + b2 * vy[s + 1];
      d = std::hypot(x, y);
      if (d < cfg.d_min_m) continue;
      az = std::atan2(y, x);
      if (az < 0.0) az += 2.0 * kPi;
      if (az > az_cut) continue;
      break;
    }
    u.pos_x = x;
    u.pos_y = y;
    u.distance_m = d;
    // ULA steering depends on the angle only through cos, so the azimuth
    // folds onto (0, pi) without changing the response.
    u.los.aod = clamp_angle(az <= kPi ? az : 2.0 * kPi - az);

    const PathLossParams& pl = cfg.pathloss;
    const double los_pl_db =
        pl.los_intercept_db + pl.los_slope_db * std::log10(d) + pl.los_shadow_sigma_db * gauss(rng);
    const double los_mag = std::pow(10.0, -los_pl_db / 20.0);
    u.los.gain = std::polar(los_mag, 2.0 * kPi * unit(rng));
    u.los.aoa = clamp_angle(kPi * unit(rng));

    const double nlos_pl_db = pl.nlos_intercept_db + pl.nlos_slope_db * std::log10(d) +
                              pl.nlos_shadow_sigma_db * gauss(rng);
    const double nlos_mag = std::pow(10.0, -nlos_pl_db / 20.0);
    u.nlos.resize(cfg.num_nlos_paths);
    for (PathComponent& p : u.nlos) {
      p.aod = clamp_angle(kPi * unit(rng));
      p.aoa = clamp_angle(kPi * unit(rng));
      // CN(0,1) small-scale fading on top of the distance law.
      p.gain = nlos_mag * Complex(gauss(rng) * M_SQRT1_2, gauss(rng) * M_SQRT1_2);
    }
  }

  std::stable_sort(users.begin(), users.end(), [](const UserChannel& a, const UserChannel& b) {
    return a.los_power() > b.los_power();
  });
  for (int k = 0; k < cfg.num_users; ++k) users[k].user_id = k + 1;
  return users;
}

std::vector<double> draw_rate_floors(const DropConfig& cfg, std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> r(count);
  // high - u*(high-low) lands in (low, high].
  for (double& v : r) v = cfg.r_min_high - unit(rng) * (cfg.r_min_high - cfg.r_min_low);
  return r;
}

}  // namespace mbnoma
