#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "actsense/config.hpp"

using namespace actsense;

TEST_CASE("lindley update") {
  CHECK(lindley_update(5, 1, Action::Active, 10) == 5);
  CHECK(lindley_update(0, 1, Action::Active, 10) == 1);
  CHECK(lindley_update(10, 1, Action::Sleep, 10) == 10);
  CHECK(lindley_update(0, 0, Action::Active, 10) == 0);
  CHECK(lindley_update(3, 0, Action::Sleep, 10) == 3);
  CHECK(lindley_update(3, 0, Action::Active, 10) == 2);
}

TEST_CASE("state index round trip") {
  const StateSpace space(6, 20);
  CHECK(space.size() == 252);
  CHECK(space.index({0, 0, 0}) == 0);
  CHECK(space.index({0, 0, 20}) == 20);
  CHECK(space.index({0, 1, 0}) == 21);
  CHECK(space.index({5, 1, 20}) == 251);
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.index(space.state(i)) == i);
}

TEST_CASE("kernel matches enumeration of the branches") {
  const SensingModel m = testing::small_model(3, 4);
  const TransitionKernel k = build_kernel(m);
  const StateSpace& sp = m.space;
  for (std::size_t s = 0; s < sp.size(); ++s) {
    const State x = sp.state(s);
    for (Action a : {Action::Sleep, Action::Active}) {
      std::vector<double> expect(sp.size(), 0.0);
      const double g = m.connectivity(x, a);
      for (int sync = 0; sync < 2; ++sync) {
        const double ps = sync ? g : 1.0 - g;
        if (ps == 0.0) continue;
        // energy is spent only on a successful transmission
        const Action spent = sync ? a : Action::Sleep;
        for (int u = 0; u < m.num_activities(); ++u)
          for (int e = 0; e < 2; ++e) {
            const double pe = e ? m.charge_prob : 1.0 - m.charge_prob;
            const int b = lindley_update(x.b, x.e, spent, m.capacity());
            expect[sp.index({u, e, b})] += ps * m.user_prob(x.u, u) * pe;
          }
      }
      double sum = 0.0;
      for (std::size_t t = 0; t < sp.size(); ++t) {
        CHECK(k(s, a, t) == doctest::Approx(expect[t]).epsilon(1e-14));
        CHECK(transition_prob(m, x, a, sp.state(t)) == doctest::Approx(expect[t]).epsilon(1e-14));
        sum += k(s, a, t);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("deterministic kernel with identity users, no charging, full connectivity") {
  SensingModel m = testing::small_model(2, 3);
  m.user_transition = {1, 0, 0, 1};
  m.charge_prob = 0.0;
  m.connectivity_active = {1.0, 1.0};
  const TransitionKernel k = build_kernel(m);
  CHECK(k(m.space.index({1, 0, 3}), Action::Active, m.space.index({1, 0, 2})) == 1.0);
  CHECK(k(m.space.index({1, 0, 3}), Action::Sleep, m.space.index({1, 0, 3})) == 1.0);
  CHECK(k(m.space.index({0, 1, 3}), Action::Sleep, m.space.index({0, 0, 3})) == 1.0);
  CHECK(k(m.space.index({0, 1, 0}), Action::Active, m.space.index({0, 0, 1})) == 1.0);
}

TEST_CASE("charging with certainty puts all mass on e = 1") {
  SensingModel m = testing::small_model(2, 3);
  m.charge_prob = 1.0;
  const TransitionKernel k = build_kernel(m);
  for (std::size_t s = 0; s < m.space.size(); ++s)
    for (Action a : {Action::Sleep, Action::Active})
      for (std::size_t t = 0; t < m.space.size(); ++t)
        if (m.space.state(t).e == 0) CHECK(k(s, a, t) == 0.0);
}

TEST_CASE("single activity with B = 0") {
  SensingModel m;
  m.space = StateSpace(1, 0);
  m.user_transition = {1.0};
  m.charge_prob = 0.4;
  m.detect_error_active = {0.2};
  m.connectivity_active = {0.5};
  m.data_usage_active = {1.0};
  m.validate();
  const Problem p(m);
  CHECK(p.num_states() == 2);
  CHECK(p.mdp().kernel(0, Action::Active, 1) == doctest::Approx(0.4));
  CHECK(p.mdp().data(0, Action::Active) == 0.0);
  CHECK(p.mdp().cost(0, Action::Active) == 1.0);
}

TEST_CASE("serial and parallel kernels agree") {
  const SensingModel m = default_model();
  CHECK(build_kernel(m).dense() == serial::build_kernel(m).dense());
}

TEST_CASE("costs and data usage") {
  const SensingModel m = default_model();
  CHECK(m.detect_error({2, 0, 5}, Action::Sleep) == 1.0);
  CHECK(m.detect_error({2, 0, 5}, Action::Active) == doctest::Approx(m.detect_error_active[2]));
  CHECK(m.detect_error({2, 0, 0}, Action::Active) == 1.0);
  CHECK(m.data_usage({2, 0, 0}, Action::Active) == 0.0);
  CHECK(m.data_usage({2, 0, 1}, Action::Active) == m.data_usage_active[2]);
  CHECK(m.lagrangian_cost({2, 0, 1}, Action::Active, 0.5) ==
        doctest::Approx(m.detect_error_active[2] + 0.5 * m.data_usage_active[2]));
  SensingModel free = m;
  free.detect_error_empty.reset();
  CHECK(free.detect_error({2, 0, 0}, Action::Active) == m.detect_error_active[2]);
}

TEST_CASE("sensing fraction") {
  SensingModel m = default_model();
  m.budget = 0.25;
  m.data_usage_active.assign(6, 1.0);
  CHECK(sensing_fraction(m) == doctest::Approx(0.25));
  m.data_usage_active.assign(6, 0.5);
  m.budget = 0.1;
  CHECK(sensing_fraction(m) == doctest::Approx(0.2));
  m.data_usage_active[1] = 0.7;
  CHECK_THROWS_AS(sensing_fraction(m), ModelError);
}

TEST_CASE("validation names the violated constraint") {
  SensingModel m = default_model();
  m.user_transition[0] += 0.1;
  try {
    m.validate();
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(e.key() == "user_transition");
  }
  m = default_model();
  m.discount = 1.0;
  CHECK_THROWS_AS(m.validate(), ModelError);
  m = default_model();
  m.connectivity_active[0] = 1.5;
  CHECK_THROWS_AS(m.validate(), ModelError);
}

TEST_CASE("tabulated default model") {
  const Problem p(default_model());
  CHECK(p.num_states() == 252);
  CHECK_NOTHROW(p.mdp().validate());
  CHECK(p.mdp().max_data() == doctest::Approx(1.0));
}

TEST_CASE("config round trip") {
  const SensingModel m = default_model();
  CHECK(model_from_json(model_to_json(m)) == m);
  SensingModel free = m;
  free.detect_error_empty.reset();
  const SensingModel back = model_from_json(model_to_json(free));
  CHECK_FALSE(back.detect_error_empty.has_value());
  CHECK(back == free);
}

TEST_CASE("shipped default config is the built-in default") {
  CHECK(load_model(std::string(ACTSENSE_SOURCE_DIR) + "/config/default_model.json") == default_model());
}

namespace {
std::string config_error_key(const std::string& text) {
  try {
    model_from_json(text);
  } catch (const ModelError& e) {
    return e.key();
  }
  return "<accepted>";
}
}  // namespace

TEST_CASE("config errors name the key") {
  const std::string base = model_to_json(default_model());
  auto edit = [&](const std::string& from, const std::string& to) {
    std::string s = base;
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    s.replace(at, from.size(), to);
    return s;
  };
  CHECK(config_error_key(edit("\"charge_prob\"", "\"charge_probability\"")) == "charge_probability");
  CHECK(config_error_key(edit("\"discount\"", "\"discount_factor\"")) == "discount_factor");
  CHECK(config_error_key("{\"activities\": 2}") != "<accepted>");
  CHECK(config_error_key("not json").empty());
  CHECK(config_error_key(edit("\"connectivity_active\": [", "\"connectivity_active\": [0.5, ")) ==
        "connectivity_active");
}
