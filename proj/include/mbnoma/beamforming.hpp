#pragma once

#include <utility>
#include <vector>

#include "mbnoma/channel.hpp"
#include "mbnoma/common.hpp"

namespace mbnoma {

/// One subarray inside an RF chain's analog beamformer: how many contiguous
/// antennas it owns and the angle it steers toward.
struct Subarray {
  int antennas = 0;
  double steer = 0.0;
};

/// The users served by one RF chain and the subarray layout feeding them.
/// user_ids are global 1-based ids in ascending order; for a beam-split chain
/// subarrays[i] belongs to user_ids[i], while a shared-beam chain may carry a
/// single subarray for several users.
struct Unit {
  std::vector<int> user_ids;
  std::vector<Subarray> subarrays;
};

/// Analog stage of one drop: per-chain BS beamformers (length m_bs each) and
/// per-user UE combiners (length m_ue each, indexed like the channel list).
struct BeamformerBank {
  std::vector<CVector> rf_weights;
  std::vector<CVector> user_combiners;
  int m_bs = 0;
  int m_ue = 0;
};

/// Constant-modulus subarray weights: entry i carries magnitude 1/sqrt(m_bs)
/// and phase -(phase_offset + i*pi*cos(steer)), conjugate matched to
/// array_response so the pattern peaks at the steered angle. phase_offset
/// aligns this subarray with the ones preceding it on the same chain.
CVector subarray_weights(int m_k, double steer, double phase_offset, int m_bs);

/// Concatenates one chain's subarrays in member order, accumulating the
/// inter-subarray offset sum(M_d * pi * cos(steer_d)) over earlier members,
/// then zero-pads unused antennas up to m_bs.
CVector rf_chain_beamformer(const std::vector<Subarray>& subarrays, int m_bs);

/// |a(theta)^H w| over a grid of angles (radians).
RVector beam_pattern(const CVector& w, const RVector& angles);

/// Matched UE combiner a_ue(aoa)/sqrt(m_ue).
CVector user_combiner(double aoa, int m_ue);

/// Builds the analog stage for a set of units over the drop's user list.
/// Chains appear in unit order; combiners point at each user's LOS arrival.
BeamformerBank build_bank(const std::vector<Unit>& units,
                          const std::vector<UserChannel>& users, int m_bs, int m_ue);

/// Effective scalar channels v_k^H H_k w_r for every (chain r, user k);
/// result is num_chains x num_users.
CMatrix effective_channel(const BeamformerBank& bank, const std::vector<UserChannel>& users);

/// Two-column CSV (angle_deg, gain_db) of a beam pattern.
void write_pattern_csv(const std::string& path, const RVector& angles_rad, const RVector& gains);

}  // namespace mbnoma
