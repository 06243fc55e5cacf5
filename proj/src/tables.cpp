#include "actsense/tables.hpp"

#include <ostream>

#include "actsense/csv.hpp"

namespace actsense {

void write_value_csv(const StateSpace& space, const ValueTable& v, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "value"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, v(s));
  }
}

void write_q_csv(const StateSpace& space, const QTable& q, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "q_sleep", "q_active", "gap"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, q(s, Action::Sleep), q(s, Action::Active), q.gap(s));
  }
}

void write_policy_csv(const StateSpace& space, const DeterministicPolicy& p, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "action"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, to_int(p[s]));
  }
}

void write_policy_csv(const StateSpace& space, const Policy& p, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "active_prob"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, p.active_prob[s]);
  }
}

void write_phi_csv(const StateSpace& space, const StationarySolution& sol, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "phi_sleep", "phi_active"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, sol.at(s, Action::Sleep), sol.at(s, Action::Active));
  }
}

void write_threshold_csv(const ThresholdTable& t, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b_cut"});
  for (int u = 0; u < t.num_activities; ++u)
    for (int e = 0; e < 2; ++e) w.row(u, e, t(u, e));
}

}  // namespace actsense
