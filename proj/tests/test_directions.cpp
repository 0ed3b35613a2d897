#include <doctest.h>

#include <limits>

#include "srba/directions.hpp"
#include "srba/problems/quadratic.hpp"
#include "support.hpp"

using namespace srba;
using testing::TrivialProblem;

TEST_CASE("sampled directions on the trivial instance") {
  TrivialProblem pb(2, 1, 1);
  OracleLedger ledger;
  JointState u;
  u.z = Vector(2);
  u.z << 1.0, 0.0;
  u.v = Vector::Zero(2);
  u.x = Vector::Zero(2);
  const DirectionTriple d = sampled_directions(pb, u, 0, 0, ledger);
  CHECK(d.dz[0] == 1.0);
  CHECK(d.dz[1] == 0.0);
  CHECK(d.dv[0] == 1.0);  // hvp(0) + grad1_F = z
  CHECK(d.dx.norm() == 0.0);
  CHECK(ledger.total() == 4);
}

TEST_CASE("full directions vanish in z and v at the exact pair") {
  const QuadraticBilevel qp = make_quadratic(41, 6, 5, 3, 4, 0.5, 2.0);
  Xoshiro256 gen(3);
  const Vector x = testing::random_vector(gen, 5);
  JointState u{qp.z_star(x), qp.v_star(x), x};
  OracleLedger ledger;
  const DirectionTriple d = full_directions(qp, u, ledger);
  CHECK(d.dz.norm() <= 1e-12);
  CHECK(d.dv.norm() <= 1e-12);
}

TEST_CASE("sampled directions match the explicitly assembled matrices") {
  const QuadraticBilevel qp = make_quadratic(43, 5, 3, 3, 2, 0.5, 2.0);
  Xoshiro256 gen(4);
  JointState u{testing::random_vector(gen, 5), testing::random_vector(gen, 5),
               testing::random_vector(gen, 3)};
  OracleLedger ledger;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      const DirectionTriple d = sampled_directions(qp, u, i, j, ledger);
      const Vector dz_ref = qp.A(i) * u.z - qp.B(i) * u.x;
      const Vector dv_ref = qp.A(i) * u.v + (u.z - qp.c(j) + qp.e(j));
      const Vector dx_ref = -qp.B(i).transpose() * u.v + qp.M(j) * u.x;
      CHECK((d.dz - dz_ref).norm() <= 1e-12 * (1.0 + dz_ref.norm()));
      CHECK((d.dv - dv_ref).norm() <= 1e-12 * (1.0 + dv_ref.norm()));
      CHECK((d.dx - dx_ref).norm() <= 1e-12 * (1.0 + dx_ref.norm()));
    }
  }
}

TEST_CASE("full directions equal the exhaustive sample average") {
  const QuadraticBilevel qp = make_quadratic(47, 4, 4, 3, 3, 0.5, 2.0);
  Xoshiro256 gen(6);
  JointState u{testing::random_vector(gen, 4), testing::random_vector(gen, 4),
               testing::random_vector(gen, 4)};
  OracleLedger ledger;
  const DirectionTriple full = full_directions(qp, u, ledger);
  DirectionTriple acc{Vector::Zero(4), Vector::Zero(4), Vector::Zero(4)};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const DirectionTriple s = sampled_directions(qp, u, i, j, ledger);
      acc.dz += s.dz;
      acc.dv += s.dv;
      acc.dx += s.dx;
    }
  }
  CHECK((acc.dz / 9.0 - full.dz).norm() <= 1e-13);
  CHECK((acc.dv / 9.0 - full.dv).norm() <= 1e-13);
  CHECK((acc.dx / 9.0 - full.dx).norm() <= 1e-13);
}

TEST_CASE("full dx at the exact pair equals the closed-form hypergradient") {
  for (std::uint64_t seed : {51, 52, 53}) {
    const QuadraticBilevel qp = make_quadratic(seed, 7, 6, 4, 3, 0.5, 2.0);
    Xoshiro256 gen(seed);
    const Vector x = testing::random_vector(gen, 6);
    JointState u{qp.z_star(x), qp.v_star(x), x};
    OracleLedger ledger;
    const DirectionTriple d = full_directions(qp, u, ledger);
    const Vector gh = qp.grad_h(x);
    CHECK((d.dx - gh).norm() <= 1e-10 * (1.0 + gh.norm()));
  }
}

TEST_CASE("projection examples") {
  Vector v(2);
  v << 3.0, 4.0;
  const Vector p = project_v(v, 1.0);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-12));

  CHECK(project_v(Vector::Zero(2), 2.0).norm() == 0.0);

  Vector inside(2);
  inside << 0.3, 0.0;
  CHECK((project_v(inside, 0.5) - inside).norm() == 0.0);

  CHECK_THROWS_AS(project_v(v, -1.0), std::invalid_argument);
  Vector bad(1);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(project_v(bad, 1.0), std::domain_error);
}

TEST_CASE("projection is exactly idempotent and nonexpansive") {
  Xoshiro256 gen(71);
  for (double R : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector v1 = testing::random_vector(gen, 5, 2.0);
      const Vector v2 = testing::random_vector(gen, 5, 2.0);
      const Vector p1 = project_v(v1, R);
      const Vector p2 = project_v(v2, R);
      REQUIRE((project_v(p1, R).array() == p1.array()).all());
      REQUIRE(p1.norm() <= R);
      REQUIRE((p1 - p2).norm() <= (v1 - v2).norm() + 1e-12);
    }
  }
}

TEST_CASE("hypergradient error is controlled by the distance to the pair") {
  const QuadraticBilevel qp = make_quadratic(61, 5, 4, 3, 3, 0.5, 2.0);
  Xoshiro256 gen(13);
  const Vector x = testing::random_vector(gen, 4);
  const Vector zs = qp.z_star(x);
  const Vector vs = qp.v_star(x);
  const Vector gh = qp.grad_h(x);

  // fit the constant on one set of perturbations, check it on a fresh set
  const auto ratio = [&](double scale) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vector dz = testing::random_vector(gen, 5, scale);
      const Vector dv = testing::random_vector(gen, 5, scale);
      OracleLedger ledger;
      const DirectionTriple d =
          full_directions(qp, {zs + dz, vs + dv, x}, ledger);
      const double err = (d.dx - gh).squaredNorm();
      const double dist = dz.squaredNorm() + dv.squaredNorm();
      worst = std::max(worst, err / dist);
    }
    return worst;
  };
  const double fitted = ratio(1e-2);
  CHECK(std::isfinite(fitted));
  CHECK(ratio(1e-3) <= 1.5 * fitted + 1e-12);
}
