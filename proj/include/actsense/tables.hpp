#pragma once

#include <iosfwd>

#include "actsense/dp.hpp"
#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/structure.hpp"

namespace actsense {

// CSV exports keyed by (u,e,b) in state-index order.

/// u,e,b,value
void write_value_csv(const StateSpace& space, const ValueTable& v, std::ostream& out);
/// u,e,b,q_sleep,q_active,gap
void write_q_csv(const StateSpace& space, const QTable& q, std::ostream& out);
/// u,e,b,action
void write_policy_csv(const StateSpace& space, const DeterministicPolicy& p, std::ostream& out);
/// u,e,b,active_prob
void write_policy_csv(const StateSpace& space, const Policy& p, std::ostream& out);
/// u,e,b,phi_sleep,phi_active
void write_phi_csv(const StateSpace& space, const StationarySolution& sol, std::ostream& out);
/// u,e,b_cut
void write_threshold_csv(const ThresholdTable& t, std::ostream& out);

}  // namespace actsense
