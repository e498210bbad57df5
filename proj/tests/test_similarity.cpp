#include <doctest.h>

#include "convoy/rng.hpp"
#include "convoy/similarity.hpp"
#include "fixtures.hpp"

using namespace convoy;
using namespace convoy::testing;

TEST_CASE("speed deviation of the reference pairs") {
  const auto p = example_params();
  const auto v5 = entity(5, 121, 430);
  const auto v13 = entity(13, 89, 270);
  const auto v20 = entity(20, 107, 250);
  const auto v37 = entity(37, 93, 70);

  CHECK(speed_deviation(v13, v5, p.speed_window) ==
        doctest::Approx(0.5992509363295881).epsilon(1e-12));
  CHECK(speed_deviation(v37, v20, p.speed_window) ==
        doctest::Approx(0.2508960573476703).epsilon(1e-12));
  CHECK(speed_deviation(v20, v20, p.speed_window) == 0.0);
}

TEST_CASE("speed deviation is asymmetric") {
  const auto a = entity(1, 100, 0);
  const auto b = entity(2, 120, 100);
  CHECK(speed_deviation(a, b, 0.3) != speed_deviation(b, a, 0.3));
}

TEST_CASE("position deviation takes the nearer of front and rear") {
  const auto v20 = entity(20, 107, 250);
  const auto v5 = entity(5, 121, 430);
  CHECK(position_deviation(v20, v5, 400.0) == doctest::Approx(0.45));

  const auto a = entity(1, 100, 300);
  const auto b = entity(2, 100, 300);
  CHECK(position_deviation(a, b, 400.0) == 0.0);

  // Platoon target: rear end is nearer than the leader's front.
  const auto c = entity(3, 100, 100);
  const auto platoon = entity(4, 100, 600, 550);
  CHECK(position_deviation(c, platoon, 400.0) ==
        doctest::Approx(1.125));  // min(500, 450) / 400
}

TEST_CASE("weighted deviation of the reference pairs") {
  const auto p = example_params();
  const auto v5 = entity(5, 121, 430);
  const auto v13 = entity(13, 89, 270);
  const auto v20 = entity(20, 107, 250);
  const auto v37 = entity(37, 93, 70);

  CHECK(deviation(v20, v13, p).total ==
        doctest::Approx(0.18822429906542054).epsilon(1e-12));
  CHECK(deviation(v37, v5, p).total ==
        doctest::Approx(0.6610752688172044).epsilon(1e-12));
  CHECK(deviation(v13, v13, p).total == 1.0);
}

TEST_CASE("rounded-arithmetic reproduction of all six candidate totals") {
  const auto p = example_params();
  for (const auto& g : golden_pairs()) {
    PlatoonableEntity cv, tv;
    for (const auto& e : example_vehicles()) {
      if (e.id == g.searcher) cv = entity(e.id, e.speed_kmh, e.position_m);
      if (e.id == g.target) tv = entity(e.id, e.speed_kmh, e.position_m);
    }
    CHECK(rounded_deviation(cv, tv, p) ==
          doctest::Approx(g.rounded).epsilon(1e-12));
    CHECK(deviation(cv, tv, p).total ==
          doctest::Approx(g.total).epsilon(1e-12));
  }
}

TEST_CASE("eligibility of the reference pairs") {
  const auto p = example_params();
  const auto v5 = entity(5, 121, 430);
  const auto v13 = entity(13, 89, 270);
  const auto v37 = entity(37, 93, 70);

  CHECK_FALSE(is_eligible(v5, v13, p));  // target behind the searcher
  CHECK(is_eligible(v5, v5, p));         // self is always allowed
  CHECK(is_eligible(v37, v5, p));
}

TEST_CASE("eligible non-self pairs have totals in [0,1]") {
  Rng rng(42);
  FormationParams p;
  p.alpha = 0.5;
  p.speed_window = 0.3;
  p.position_range = 400.0;
  int eligible = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto c = entity(1, rng.uniform(80, 160), rng.uniform(0, 1500));
    const auto t = entity(2, rng.uniform(80, 160), rng.uniform(0, 1500));
    if (!is_eligible(c, t, p)) continue;
    ++eligible;
    const double total = deviation(c, t, p).total;
    CHECK(total >= 0.0);
    CHECK(total <= 1.0);
  }
  CHECK(eligible > 50);  // the generator must actually produce eligible pairs
}

TEST_CASE("deviation is generally asymmetric on random pairs") {
  Rng rng(7);
  FormationParams p;
  p.alpha = 0.5;
  p.speed_window = 0.5;
  p.position_range = 1000.0;
  int asymmetric = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = entity(1, rng.uniform(80, 160), rng.uniform(0, 500));
    const auto t = entity(2, rng.uniform(80, 160), rng.uniform(0, 500));
    if (deviation(c, t, p).total != deviation(t, c, p).total) ++asymmetric;
  }
  CHECK(asymmetric > 150);
}

TEST_CASE("eligibility is monotone in the windows") {
  Rng rng(11);
  FormationParams narrow;
  narrow.alpha = 0.5;
  narrow.speed_window = 0.2;
  narrow.position_range = 300.0;
  FormationParams wide = narrow;
  wide.speed_window = 0.5;
  wide.position_range = 900.0;
  for (int i = 0; i < 2000; ++i) {
    const auto c = entity(1, rng.uniform(80, 160), rng.uniform(0, 1200));
    const auto t = entity(2, rng.uniform(80, 160), rng.uniform(0, 1200));
    if (is_eligible(c, t, narrow)) CHECK(is_eligible(c, t, wide));
  }
}

TEST_CASE("alpha extremes reduce to a single component") {
  const auto c = entity(1, 100, 50);
  const auto t = entity(2, 130, 300);
  FormationParams p;
  p.speed_window = 0.5;
  p.position_range = 400.0;
  p.alpha = 1.0;
  CHECK(deviation(c, t, p).total ==
        doctest::Approx(speed_deviation(c, t, p.speed_window)));
  p.alpha = 0.0;
  CHECK(deviation(c, t, p).total ==
        doctest::Approx(position_deviation(c, t, p.position_range)));
}
