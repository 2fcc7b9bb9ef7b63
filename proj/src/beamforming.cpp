#include "mbnoma/beamforming.hpp"

#include <cstdio>
#include <stdexcept>

namespace mbnoma {

CVector subarray_weights(int m_k, double steer, double phase_offset, int m_bs) {
  if (m_k < 1) throw std::invalid_argument("subarray_weights: m_k must be >= 1");
  if (m_bs < m_k) throw std::invalid_argument("subarray_weights: m_bs must be >= m_k");
  if (!(steer > 0.0 && steer < kPi))
    throw std::invalid_argument("subarray_weights: steer must lie in (0, pi)");
  const double amp = 1.0 / std::sqrt(static_cast<double>(m_bs));
  const double step = kPi * std::cos(steer);
  CVector w(m_k);
  for (int i = 0; i < m_k; ++i) w(i) = std::polar(amp, -(phase_offset + step * i));
  return w;
}

CVector rf_chain_beamformer(const std::vector<Subarray>& subarrays, int m_bs) {
  if (subarrays.empty())
    throw std::invalid_argument("rf_chain_beamformer: at least one subarray required");
  int total = 0;
  for (const Subarray& s : subarrays) {
    if (s.antennas < 1)
      throw std::invalid_argument("rf_chain_beamformer: subarray needs >= 1 antennas");
    total += s.antennas;
  }
  if (total > m_bs)
    throw std::invalid_argument("rf_chain_beamformer: subarrays exceed m_bs antennas");

  CVector w = CVector::Zero(m_bs);
  int pos = 0;
  double offset = 0.0;
  for (const Subarray& s : subarrays) {
    w.segment(pos, s.antennas) = subarray_weights(s.antennas, s.steer, offset, m_bs);
    offset += s.antennas * kPi * std::cos(s.steer);
    pos += s.antennas;
  }
  return w;
}

RVector beam_pattern(const CVector& w, const RVector& angles) {
  RVector g(angles.size());
  for (Eigen::Index i = 0; i < angles.size(); ++i)
    g(i) = std::abs(array_response(static_cast<int>(w.size()), angles(i)).dot(w));
  return g;
}

CVector user_combiner(double aoa, int m_ue) {
  return array_response(m_ue, aoa) / std::sqrt(static_cast<double>(m_ue));
}

BeamformerBank build_bank(const std::vector<Unit>& units,
                          const std::vector<UserChannel>& users, int m_bs, int m_ue) {
  BeamformerBank bank;
  bank.m_bs = m_bs;
  bank.m_ue = m_ue;
  bank.rf_weights.reserve(units.size());
  for (const Unit& u : units) bank.rf_weights.push_back(rf_chain_beamformer(u.subarrays, m_bs));
  bank.user_combiners.reserve(users.size());
  for (const UserChannel& u : users) bank.user_combiners.push_back(user_combiner(u.los.aoa, m_ue));
  return bank;
}

CMatrix effective_channel(const BeamformerBank& bank, const std::vector<UserChannel>& users) {
  const auto n_rf = static_cast<Eigen::Index>(bank.rf_weights.size());
  const auto n_users = static_cast<Eigen::Index>(users.size());
  CMatrix h_eff(n_rf, n_users);
  for (Eigen::Index k = 0; k < n_users; ++k) {
    // Row vector v_k^H H_k computed once per user, then dotted with each chain.
    const Eigen::RowVectorXcd row =
        bank.user_combiners[k].adjoint() * channel_matrix(users[k], bank.m_ue, bank.m_bs);
    for (Eigen::Index r = 0; r < n_rf; ++r) h_eff(r, k) = row * bank.rf_weights[r];
  }
  return h_eff;
}

void write_pattern_csv(const std::string& path, const RVector& angles_rad, const RVector& gains) {
  if (angles_rad.size() != gains.size())
    throw std::invalid_argument("write_pattern_csv: size mismatch");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_pattern_csv: cannot open " + path);
  std::fprintf(f, "angle_deg,gain_db\n");
  for (Eigen::Index i = 0; i < gains.size(); ++i)
    std::fprintf(f, "%.10g,%.10g\n", rad_to_deg(angles_rad(i)),
                 20.0 * std::log10(std::max(gains(i), 1e-300)));
  std::fclose(f);
}

}  // namespace mbnoma
