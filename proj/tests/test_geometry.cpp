#include "curved/errors.hpp"
#include "curved/geometry.hpp"
#include "curved/phase_state.hpp"

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

// Independent evaluation from Cartesian coordinates.
double force_function_brute(const std::vector<double>& m, const std::vector<double>& theta,
                            const std::vector<double>& phi) {
  double v = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const double dot = std::sin(theta[i]) * std::sin(theta[j]) * std::cos(phi[i] - phi[j]) +
                         std::cos(theta[i]) * std::cos(theta[j]);
      v += m[i] * m[j] / std::tan(std::acos(dot));
    }
  }
  return v;
}

struct RandomConfig {
  std::vector<double> m, theta, phi;
};

RandomConfig random_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomConfig c;
  for (int i = 0; i < n; ++i) {
    c.m.push_back(0.2 + u(rng));
    c.theta.push_back(0.5 + 2.1 * u(rng));
    c.phi.push_back(kTwoPi * i / n + 0.6 * (u(rng) - 0.5));
  }
  return c;
}

}  // namespace

TEST_CASE("mass vector validation") {
  CHECK(kind_of([] { MassVector({1.0}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { MassVector({1.0, 0.0}); }) == ErrorKind::NonpositiveMass);
  CHECK(kind_of([] { MassVector({1.0, -2.0}); }) == ErrorKind::NonpositiveMass);
  const MassVector m = MassVector::normalized({1.0, 2.0, 5.0});
  CHECK(m.is_normalized());
  CHECK(m.total() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m[2] == doctest::Approx(0.625));
  CHECK_FALSE(MassVector({1.0, 2.0}).is_normalized());
}

TEST_CASE("sphere configuration validation") {
  CHECK(kind_of([] { SphereConfiguration({{0.0, 1.0}, {1.0, 1.0}}); }) == ErrorKind::PolarSingularity);
  CHECK(kind_of([] { SphereConfiguration({{kPi, 1.0}, {1.0, 1.0}}); }) == ErrorKind::PolarSingularity);
  const SphereConfiguration c({{1.0, -0.5}, {2.0, 7.0}});
  CHECK(c.phi()[0] == doctest::Approx(kTwoPi - 0.5));
  CHECK(c.phi()[1] == doctest::Approx(7.0 - kTwoPi));
}

TEST_CASE("ring configuration validation") {
  const RingConfiguration r({1.0, 1.0 + 2.0, 1.0 + 4.0});
  CHECK(r[0] == 0.0);
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(4.0));
  CHECK(kind_of([] { RingConfiguration({0.0, 1.0}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { RingConfiguration({0.0, 3.5, 4.0}); }) == ErrorKind::InvalidInput);  // gap > pi
  CHECK(kind_of([] { RingConfiguration({0.0, 1.0, 2.0}); }) == ErrorKind::InvalidInput);  // span < pi
}

TEST_CASE("to_cartesian axis points and definition") {
  const Vec3 a = to_cartesian(kHalfPi, 0.0);
  CHECK(a.x() == doctest::Approx(1.0));
  CHECK(std::abs(a.y()) < 1e-15);
  CHECK(std::abs(a.z()) < 1e-15);
  const Vec3 b = to_cartesian(kHalfPi, kHalfPi);
  CHECK(std::abs(b.x()) < 1e-15);
  CHECK(b.y() == doctest::Approx(1.0));
  const Vec3 c = to_cartesian(kPi / 3.0, kPi / 4.0);
  CHECK(c.x() == doctest::Approx(std::sin(kPi / 3.0) * std::cos(kPi / 4.0)));
  CHECK(c.y() == doctest::Approx(std::sin(kPi / 3.0) * std::sin(kPi / 4.0)));
  CHECK(c.z() == doctest::Approx(0.5));
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("geodesic distance") {
  const Vec3 p = to_cartesian(1.0, 2.0);
  CHECK(geodesic_distance(p, p) == 0.0);
  CHECK(geodesic_distance(p, -p) == doctest::Approx(kPi));
  CHECK(geodesic_distance(to_cartesian(kHalfPi, 0.0), to_cartesian(kHalfPi, kTwoPi / 3.0)) ==
        doctest::Approx(kTwoPi / 3.0).epsilon(1e-14));
}

TEST_CASE("singular configurations are rejected") {
  const MassVector m({1.0, 1.0});
  const std::vector<double> th{kHalfPi, kHalfPi};
  CHECK(kind_of([&] { force_function(m, th, std::vector<double>{0.0, 1e-12}); }) == ErrorKind::SingularConfiguration);
  CHECK(kind_of([&] { force_function(m, th, std::vector<double>{0.0, kPi}); }) == ErrorKind::SingularConfiguration);
  CHECK(kind_of([&] { force_gradient(m, th, std::vector<double>{0.0, kPi - 1e-11}); }) ==
        ErrorKind::SingularConfiguration);
  CHECK(singularity_margin(th, std::vector<double>{0.0, 1e-3}) == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(singularity_margin(th, std::vector<double>{0.0, kPi - 1e-7}) == doctest::Approx(1e-7).epsilon(1e-6));
}

TEST_CASE("force function examples") {
  const MassVector eq = MassVector::normalized({1.0, 1.0, 1.0});
  const std::vector<double> lon{0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0};
  const SphereConfiguration ring = SphereConfiguration::on_equator(lon);
  CHECK(force_function(eq, ring) == doctest::Approx(-std::sqrt(3.0) / 9.0).epsilon(1e-14));

  const MassVector two({1.0, 1.0});
  const std::vector<double> th{kHalfPi, kHalfPi};
  CHECK(force_function(two, th, std::vector<double>{0.0, kPi / 4.0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(force_function(MassVector({3.0, 5.0}), th, std::vector<double>{0.0, kHalfPi})) < 1e-15);
}

TEST_CASE("force function agrees with the Cartesian evaluation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_config(rng, 3 + trial % 4);
    CHECK(force_function(MassVector(c.m), c.theta, c.phi) ==
          doctest::Approx(force_function_brute(c.m, c.theta, c.phi)).epsilon(1e-11));
  }
}

TEST_CASE("equilateral ring is a critical point") {
  const MassVector eq = MassVector::normalized({1.0, 1.0, 1.0});
  const std::vector<double> lon{0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0};
  const Eigen::VectorXd g = force_gradient(eq, SphereConfiguration::on_equator(lon));
  CHECK(g.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("gradient and Hessian match finite differences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_config(rng, 3 + trial % 3);
    const MassVector m(c.m);
    const std::size_t n = c.m.size();
    const Eigen::VectorXd g = force_gradient(m, c.theta, c.phi);
    const Eigen::MatrixXd hess = force_hessian(m, c.theta, c.phi);
    CHECK((hess - hess.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      auto plus = c, minus = c;
      auto& vp = k < n ? plus.theta : plus.phi;
      auto& vm = k < n ? minus.theta : minus.phi;
      vp[k % n] += h;
      vm[k % n] -= h;
      const double fd = (force_function(m, plus.theta, plus.phi) - force_function(m, minus.theta, minus.phi)) / (2 * h);
      CHECK(g[static_cast<Eigen::Index>(k)] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      const Eigen::VectorXd gfd =
          (force_gradient(m, plus.theta, plus.phi) - force_gradient(m, minus.theta, minus.phi)) / (2 * h);
      CHECK((gfd - hess.col(static_cast<Eigen::Index>(k))).lpNorm<Eigen::Infinity>() <
            1e-5 * std::max(1.0, hess.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("northern-hemisphere configurations are never critical") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<double> m, th, ph;
    for (int i = 0; i < n; ++i) {
      m.push_back(0.1 + u(rng));
      th.push_back(0.05 + (kHalfPi - 0.1) * u(rng));
      ph.push_back(kTwoPi * u(rng));
    }
    if (singularity_margin(th, ph) < 1e-6) continue;
    CHECK(force_gradient(MassVector(m), th, ph).norm() > 1e-8);
  }
}

TEST_CASE("kinetic energy examples") {
  const MassVector m({1.0, 2.0, 3.0});
  PhaseState s(3);
  CHECK(kinetic_energy(m, s) == 0.0);

  const double omega = 0.7;
  PhaseState rotor(2);
  rotor.pphi[0] = omega;
  CHECK(kinetic_energy(MassVector({1.0, 4.0}), rotor) == doctest::Approx(omega * omega / 2));

  const RingConfiguration ring({0.0, 2.0, 4.0});
  const PhaseState re = equatorial_state(m, ring, omega);
  CHECK(kinetic_energy(m, re) == doctest::Approx(6.0 * omega * omega / 2));

  PhaseState polar(2);
  polar.theta[0] = 1e-9;
  CHECK(kind_of([&] { kinetic_energy(MassVector({1.0, 1.0}), polar); }) == ErrorKind::PolarSingularity);
}

TEST_CASE("polar trig is exact on the equator") {
  const auto t = polar_trig(kHalfPi);
  CHECK(t.cos_theta == 0.0);
  CHECK(t.sin_theta == 1.0);
  const auto r = polar_trig(0.3);
  CHECK(r.sin_theta == doctest::Approx(std::sin(0.3)).epsilon(1e-15));
  CHECK(r.cos_theta == doctest::Approx(std::cos(0.3)).epsilon(1e-15));
}

TEST_CASE("phase state packing round-trips") {
  PhaseState s(3);
  s.theta << 1.0, 1.1, 1.2;
  s.phi << 0.0, 2.0, 4.0;
  s.ptheta << 0.1, 0.2, 0.3;
  s.pphi << -1.0, -2.0, -3.0;
  const Eigen::VectorXd y = s.packed();
  CHECK(y.size() == 12);
  CHECK(y[3] == 0.0);
  CHECK(y[9] == -1.0);
  const PhaseState back = PhaseState::unpack(y);
  CHECK(back.packed() == y);
  CHECK(kind_of([] { PhaseState::unpack(Eigen::VectorXd::Zero(6)); }) == ErrorKind::DimensionMismatch);
}
