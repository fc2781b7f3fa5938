#include "curved/errors.hpp"
#include "curved/fixed_points.hpp"
#include "sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace curved;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidInput;
}

const double kArcIsosceles = std::acos(-std::sqrt(3.0) / 4.0);

}  // namespace

TEST_CASE("triangle shape validation") {
  CHECK_NOTHROW(TriangleShape(2.0, 2.0));
  CHECK(kind_of([] { TriangleShape(1.5, 1.5); }) == ErrorKind::InvalidShape);
  CHECK(kind_of([] { TriangleShape(3.2, 1.0); }) == ErrorKind::InvalidShape);
  CHECK(kind_of([] { TriangleShape(0.0, 3.0); }) == ErrorKind::InvalidShape);
  const auto d = TriangleShape(2.0, 2.5).distances();
  CHECK(d[0] == 2.0);
  CHECK(d[1] == 2.5);
  CHECK(d[2] == doctest::Approx(kTwoPi - 4.5));
}

TEST_CASE("residual examples") {
  const MassVector eq = MassVector::normalized({1, 1, 1});
  CHECK(fixed_point_residual(eq, RingConfiguration({0.0, kTwoPi / 3, 2 * kTwoPi / 3})).lpNorm<Eigen::Infinity>() < 1e-12);
  std::vector<double> pentagon;
  for (int k = 0; k < 5; ++k) pentagon.push_back(kTwoPi * k / 5);
  CHECK(fixed_point_residual(MassVector::normalized({1, 1, 1, 1, 1}), RingConfiguration(pentagon))
            .lpNorm<Eigen::Infinity>() < 1e-12);
  const Eigen::VectorXd r = fixed_point_residual(eq, RingConfiguration({0.0, kTwoPi / 3 + 0.05, 2 * kTwoPi / 3}));
  CHECK(r.lpNorm<Eigen::Infinity>() > 1e-3);
  CHECK(std::abs(r.sum()) < 1e-14);  // pairwise antisymmetric terms
}

TEST_CASE("residual equals minus the longitude gradient of the force function") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> mass(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + trial % 3;
    std::vector<double> lon, m, th(n, kHalfPi);
    for (std::size_t i = 0; i < n; ++i) {
      lon.push_back(kTwoPi * static_cast<double>(i) / static_cast<double>(n) + (i == 0 ? 0.0 : u(rng)));
      m.push_back(mass(rng));
    }
    const MassVector mv(m);
    const Eigen::VectorXd r = fixed_point_residual(mv, std::span<const double>(lon));
    const double h = 1e-6;
    for (std::size_t k = 0; k < n; ++k) {
      auto plus = lon, minus = lon;
      plus[k] += h;
      minus[k] -= h;
      const double fd = (force_function(mv, th, plus) - force_function(mv, th, minus)) / (2 * h);
      CHECK(r[static_cast<Eigen::Index>(k)] == doctest::Approx(-fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("admissibility examples") {
  const auto eq = is_admissible(1, 1, 1);
  CHECK(eq.admissible);
  CHECK(eq.value == doctest::Approx(-1.0 / 27.0).epsilon(1e-14));
  const auto iso = is_admissible(0.3, 0.4, 0.3);
  CHECK(iso.admissible);
  CHECK(iso.value == doctest::Approx(-0.0351).epsilon(1e-12));
  const auto bad = is_admissible(0.5, 0.49, 0.01);
  CHECK_FALSE(bad.admissible);
  CHECK(bad.value == doctest::Approx(0.055174).epsilon(1e-5));
  CHECK(is_admissible(2, 2, 2).value == doctest::Approx(-1.0 / 27.0));  // auto-normalized
  CHECK(kind_of([] { is_admissible(1, 0, 1); }) == ErrorKind::NonpositiveMass);
  CHECK(kind_of([] { AdmissibleMassTriple(0.5, 0.49, 0.01); }) == ErrorKind::NotAdmissible);
  CHECK(kind_of([] { AdmissibleMassTriple(-1, 1, 1); }) == ErrorKind::NonpositiveMass);
}

TEST_CASE("shape from masses examples") {
  const TriangleShape eq = shape_from_masses(1, 1, 1);
  CHECK(eq.alpha() == doctest::Approx(kTwoPi / 3).epsilon(1e-14));
  CHECK(eq.beta() == doctest::Approx(kTwoPi / 3).epsilon(1e-14));
  const TriangleShape iso = shape_from_masses(0.3, 0.4, 0.3);
  CHECK(iso.alpha() == doctest::Approx(kArcIsosceles).epsilon(1e-14));
  CHECK(iso.beta() == doctest::Approx(kArcIsosceles).epsilon(1e-14));
  CHECK(iso.alpha() == doctest::Approx(2.0187).epsilon(1e-4));
  CHECK(kind_of([] { shape_from_masses(0.5, 0.49, 0.01); }) == ErrorKind::NotAdmissible);
}

TEST_CASE("masses from shape examples") {
  const AdmissibleMassTriple eq = masses_from_shape(TriangleShape(kTwoPi / 3, kTwoPi / 3));
  for (double m : eq.values()) CHECK(m == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const AdmissibleMassTriple iso = masses_from_shape(TriangleShape(kArcIsosceles, kArcIsosceles));
  CHECK(iso.m1() == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(iso.m2() == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(iso.m3() == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(kind_of([] { masses_from_shape(TriangleShape(2.0, kPi - 2.0 + 1e-12)); }) == ErrorKind::DegenerateShape);
}

TEST_CASE("shape and mass maps are inverse") {
  double worst = 0.0;
  for (const auto& m : testing::random_admissible(1000, 99)) {
    const AdmissibleMassTriple back = masses_from_shape(shape_from_masses(m));
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(back.values()[k] - m.values()[k]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("constructed shapes satisfy the pair relations and the criterion") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 500) {
    const double alpha = 0.05 + (kPi - 0.1) * u(rng);
    const double beta = 0.05 + (kPi - 0.1) * u(rng);
    if (alpha + beta < kPi + 0.05 || alpha + beta > kTwoPi - 0.05) continue;
    const TriangleShape s(alpha, beta);
    const AdmissibleMassTriple m = masses_from_shape(s);
    CHECK(three_body_relation_error(m.values(), s) < 1e-12);
    CHECK(fixed_point_residual(m.masses(), ring_from_shape(s)).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK(is_admissible(m.m1(), m.m2(), m.m3()).admissible);
    ++tested;
  }
}

TEST_CASE("ring from shape examples") {
  const RingConfiguration eq = ring_from_shape(TriangleShape(kTwoPi / 3, kTwoPi / 3));
  CHECK(eq[0] == 0.0);
  CHECK(eq[1] == doctest::Approx(kTwoPi / 3));
  CHECK(eq[2] == doctest::Approx(2 * kTwoPi / 3));
  const RingConfiguration r = ring_from_shape(TriangleShape(2.0187, 2.0187));
  CHECK(r[1] == doctest::Approx(2.0187));
  CHECK(r[2] == doctest::Approx(4.0374));
}

TEST_CASE("isosceles bound check examples") {
  const auto a = isosceles_bound_check(0.3, 0.4, 0.3);
  CHECK(a.isosceles);
  CHECK(a.bound_holds);
  CHECK(a.admissibility.admissible);
  REQUIRE(a.shape.has_value());
  CHECK(a.symmetric_shape);

  const auto b = isosceles_bound_check(0.4, 0.1, 0.4);
  CHECK(b.isosceles);
  CHECK_FALSE(b.bound_holds);
  CHECK_FALSE(b.admissibility.admissible);
  CHECK(b.admissibility.value >= 0.0);
  CHECK_FALSE(b.shape.has_value());

  const auto c = isosceles_bound_check(1, 1, 1);
  CHECK(c.isosceles);
  CHECK(c.bound_holds);
  CHECK(c.symmetric_shape);
}

TEST_CASE("isosceles masses beyond the bound are never admissible") {
  // m1 = m3 = x, m2 = y with x >= 4 y on the simplex.
  for (double y = 0.01; y <= 1.0 / 9.0; y += 0.005) {
    const double x = (1.0 - y) / 2.0;
    CHECK(x >= 4.0 * y - 1e-12);
    CHECK_FALSE(is_admissible(x, y, x).admissible);
  }
}

TEST_CASE("numeric solver reproduces the closed form") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1e-2, 1e-2);
  for (const auto& m : testing::random_admissible(30, 5)) {
    const RingConfiguration exact = ring_from_shape(shape_from_masses(m));
    if (std::min({exact[1], exact[2] - exact[1], kTwoPi - exact[2]}) < 0.2) continue;
    const RingConfiguration start({0.0, exact[1] + u(rng), exact[2] + u(rng)});
    const NewtonResult r = solve_fixed_point_numeric(m.masses(), start);
    CHECK(r.residual < 1e-11);
    CHECK(std::abs(r.ring[1] - exact[1]) < 1e-9);
    CHECK(std::abs(r.ring[2] - exact[2]) < 1e-9);
  }
}

TEST_CASE("numeric solver finds the symmetric rings") {
  const NewtonResult tri =
      solve_fixed_point_numeric(MassVector::normalized({1, 1, 1}), RingConfiguration({0.0, 2.05, 4.2}));
  CHECK(tri.ring[1] == doctest::Approx(kTwoPi / 3).epsilon(1e-10));
  CHECK(tri.ring[2] == doctest::Approx(2 * kTwoPi / 3).epsilon(1e-10));

  std::vector<double> start;
  for (int k = 0; k < 5; ++k) start.push_back(kTwoPi * k / 5 + (k == 0 ? 0.0 : 0.01 * ((k % 2) ? 1 : -1)));
  const NewtonResult pent = solve_fixed_point_numeric(MassVector::normalized({1, 1, 1, 1, 1}), RingConfiguration(start));
  for (int k = 0; k < 5; ++k) CHECK(std::abs(pent.ring[static_cast<std::size_t>(k)] - kTwoPi * k / 5) < 1e-9);
}

TEST_CASE("numeric solver reports non-convergence") {
  NewtonOptions opt;
  opt.max_iterations = 1;
  CHECK(kind_of([&] {
          solve_fixed_point_numeric(MassVector::normalized({1, 1, 1}), RingConfiguration({0.0, 1.7, 3.9}), opt);
        }) == ErrorKind::NoConvergence);
}
