#pragma once

#include "mbnoma/pipeline.hpp"

namespace mbnoma {

/// Half-power-splitting-free orthogonal baseline: every user gets a private
/// full-array beam; when the users outnumber the RF chains they alternate
/// over two equal-duty slots (strongest to slot one, next to slot two, ...).
SchemeOutcome run_oma(const std::vector<UserChannel>& users, const DropConfig& cfg,
                      const std::vector<double>& r_min);

/// Angle threshold under which two users can share one conventional beam:
/// the half-power width of an m_bs-element array, in radians.
double pairing_beamwidth_rad(int m_bs);

/// Single-beam superposition baseline: users whose departure angles fall
/// within one beamwidth pair up greedily (closest angles first) and share a
/// full-array beam steered at the stronger member; leftover users keep
/// private beams. Units fit one slot when possible, otherwise alternate over
/// two slots by unit strength. With no pairs this reduces exactly to run_oma.
SchemeOutcome run_single_beam(const std::vector<UserChannel>& users, const DropConfig& cfg,
                              const std::vector<double>& r_min);

}  // namespace mbnoma
