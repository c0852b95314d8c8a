#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "icebox/model.hpp"

using namespace icebox;

namespace {

// Free energy evaluated term by term, independently of the library formula.
double free_energy_terms(double theta, double U, double chi, const MaterialParams& m) {
  const double c0 = m.c / m.rho0;
  const double L0 = m.L / m.rho0;
  const double heat = c0 * theta - c0 * theta * std::log(theta / m.theta_c);
  const double strain = U - m.alpha + m.alpha * chi;
  const double elastic = 0.5 * m.lambda * strain * strain / m.rho0;
  const double thermal = -(m.beta * theta * U - m.beta * m.theta_c * U) / m.rho0;
  const double latent = L0 * chi - L0 * chi * theta / m.theta_c;
  return heat + elastic + thermal + latent;
}

}  // namespace

TEST_CASE("free energy at the freezing point of the liquid is the heat content") {
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    CHECK(free_energy_density(m.theta_c, 0.0, 1.0, m) ==
          doctest::Approx(m.c / m.rho0 * m.theta_c).epsilon(1e-15));
    CHECK(free_energy_density(m.theta_c, m.alpha, 0.0, m) ==
          doctest::Approx(m.c / m.rho0 * m.theta_c).epsilon(1e-15));
  }
}

TEST_CASE("free energy matches a term-by-term evaluation") {
  const auto m = normalized_preset().material;
  const double theta = 0.5 * m.theta_c;
  CHECK(free_energy_density(theta, 0.1, 0.5, m) ==
        doctest::Approx(free_energy_terms(theta, 0.1, 0.5, m)).epsilon(1e-14));
  const auto w = water_preset().material;
  CHECK(free_energy_density(260.0, 0.004, 0.3, w) ==
        doctest::Approx(free_energy_terms(260.0, 0.004, 0.3, w)).epsilon(1e-13));
}

TEST_CASE("densities reject inadmissible states") {
  const auto m = normalized_preset().material;
  CHECK_THROWS_AS(free_energy_density(0.0, 0.0, 0.5, m), std::domain_error);
  CHECK_THROWS_AS(internal_energy_density(1.0, 0.0, 1.5, m), std::domain_error);
  CHECK_THROWS_AS(entropy_density(-1.0, 0.0, 0.5, m), std::domain_error);
  CHECK_THROWS_AS(free_energy_density(1.0, 0.0, -0.01, m), std::domain_error);
}

TEST_CASE("internal energy and entropy at reference states") {
  const auto w = water_preset().material;
  const double c0 = w.c / w.rho0;
  const double L0 = w.L / w.rho0;
  CHECK(internal_energy_density(w.theta_c, 0.0, 1.0, w) ==
        doctest::Approx(c0 * w.theta_c + L0).epsilon(1e-15));
  CHECK(internal_energy_density(w.theta_c, 0.0, 0.0, w) ==
        doctest::Approx(c0 * w.theta_c + 0.5 * w.lambda / w.rho0 * w.alpha * w.alpha)
            .epsilon(1e-15));
  CHECK(entropy_density(w.theta_c, 0.0, 0.0, w) == 0.0);
  CHECK(entropy_density(w.theta_c, 0.0, 1.0, w) == doctest::Approx(L0 / w.theta_c).epsilon(1e-15));
}

TEST_CASE("Legendre identity e = f + theta s on random states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    for (int k = 0; k < 100; ++k) {
      const double theta = m.theta_c * (0.3 + 1.4 * unit(rng));
      const double U = m.alpha * (2.0 * unit(rng) - 0.5);
      const double chi = unit(rng);
      const double e = internal_energy_density(theta, U, chi, m);
      const double rhs = free_energy_density(theta, U, chi, m) + theta * entropy_density(theta, U, chi, m);
      CHECK(std::abs(e - rhs) <= 1e-12 * std::abs(e));
    }
  }
}

TEST_CASE("entropy is minus the temperature derivative of the free energy") {
  const auto w = water_preset().material;
  const double theta = 300.0;
  const double U = 0.01;
  const double chi = 0.4;
  const double h = 1e-3;
  const double dfdt = (free_energy_density(theta + h, U, chi, w) - free_energy_density(theta - h, U, chi, w)) / (2 * h);
  CHECK(-dfdt == doctest::Approx(entropy_density(theta, U, chi, w)).epsilon(1e-6));

  const double dsdt = (entropy_density(theta + h, U, chi, w) - entropy_density(theta - h, U, chi, w)) / (2 * h);
  CHECK(dsdt == doctest::Approx(w.c / w.rho0 / theta).epsilon(1e-6));
}

TEST_CASE("strain derivative of the free energy and convexity in U") {
  const auto m = normalized_preset().material;
  const double theta = 0.8;
  const double chi = 0.3;
  const double h = 1e-5;
  for (double U : {-0.2, 0.1, 0.6}) {
    const double fm = free_energy_density(theta, U - h, chi, m);
    const double f0 = free_energy_density(theta, U, chi, m);
    const double fp = free_energy_density(theta, U + h, chi, m);
    // rho0 df/dU = lambda (U - alpha (1 - chi)) - beta (theta - theta_c): minus the static pressure.
    const double expected = -pressure_deviation(theta, U, 0.0, chi, m);
    CHECK(m.rho0 * (fp - fm) / (2 * h) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(fp - 2 * f0 + fm >= 0.0);
  }
}

TEST_CASE("pressure deviation") {
  const auto w = water_preset().material;
  CHECK(pressure_deviation(w.theta_c, 0.0, 0.0, 1.0, w) == 0.0);
  CHECK(pressure_deviation(w.theta_c, 0.0, 0.0, 0.0, w) == doctest::Approx(2.025e8).epsilon(1e-15));
  CHECK(pressure_deviation(w.theta_c + 1.0, 0.0, 0.0, 1.0, w) == doctest::Approx(w.beta).epsilon(1e-12));
}

TEST_CASE("boundary energy") {
  BoundaryParams b;
  b.K_Gamma = 3.0;
  b.p0 = 1.0;
  CHECK(boundary_energy(-b.p0 / b.K_Gamma, b) == 0.0);
  CHECK(boundary_energy(2.0, b) == doctest::Approx(1.5 * (2.0 + 1.0 / 3.0) * (2.0 + 1.0 / 3.0)).epsilon(1e-15));
  CHECK(boundary_energy(2.0, b) == doctest::Approx(8.1666666666666667).epsilon(1e-15));
  b.K_Gamma = 1.0;
  b.p0 = 0.0;
  CHECK(boundary_energy(0.0, b) == 0.0);
  b.K_Gamma = 0.0;
  b.p0 = 2.0;
  CHECK(boundary_energy(0.5, b) == 1.0);
  CHECK(gauge_pressure(0.5, b) == 2.0);
}

TEST_CASE("dimensionless groups of the normalized preset") {
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.theta_Gamma = 0.9;
  const auto g = dimensionless_groups(m, b, 1.0);
  CHECK(g.d == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.beta_tilde == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.omega == 0.0);
  REQUIRE(g.chi_star);
  CHECK(*g.chi_star == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(dimensionless_groups(m, b, 0.0), std::invalid_argument);
}

TEST_CASE("dimensionless groups of the water preset") {
  const auto w = water_preset().material;
  BoundaryParams b;
  b.p0 = 0.0;
  b.K_Gamma = 1e6 * w.lambda;
  const auto rigid = dimensionless_groups(w, b, 1.0);
  CHECK(rigid.d == doctest::Approx(0.09 * 0.09 * 2.25e9 / 3.3e8).epsilon(1e-5));
  CHECK(rigid.d > 0.054);
  CHECK(rigid.d < 0.056);

  b.K_Gamma = 0.0;
  const auto soft = dimensionless_groups(w, b, 1.0);
  CHECK(soft.d == 0.0);
  CHECK_FALSE(soft.chi_star);
  CHECK(soft.beta_tilde == doctest::Approx(0.09 * 4.5e5 * 273.0 / 3.3e8).epsilon(1e-14));
  CHECK(soft.beta_tilde == doctest::Approx(0.0335).epsilon(0.01));
}

TEST_CASE("undercooling coefficient grows monotonically with wall stiffness") {
  const auto w = water_preset().material;
  BoundaryParams b;
  double previous = -1.0;
  for (double K : {0.0, 1e7, 1e8, 1e9, 1e10, 1e12, 1e15}) {
    b.K_Gamma = K;
    const double d = dimensionless_groups(w, b, 1.0).d;
    CHECK(d > previous);
    CHECK(d < w.alpha * w.alpha * w.lambda / w.L);
    previous = d;
  }
}

TEST_CASE("corrected latent heat and Clausius-Clapeyron slope") {
  const auto w = water_preset().material;
  const double L_beta = 3.3e5 - 4.5e5 * 0.09 * 273.0 / 1000.0;
  CHECK(corrected_latent_heat(w) == doctest::Approx(L_beta).epsilon(1e-14));
  CHECK(corrected_latent_heat(w) == doctest::Approx(318943.5).epsilon(1e-12));
  const double slope = -1000.0 * L_beta / (0.09 * 273.0);
  CHECK(clausius_clapeyron_slope(w) == doctest::Approx(slope).epsilon(1e-12));
  CHECK(std::abs(clausius_clapeyron_slope(w)) == doctest::Approx(1.3e7).epsilon(0.01));

  auto no_beta = w;
  no_beta.beta = 0.0;
  CHECK(clausius_clapeyron_slope(no_beta) ==
        doctest::Approx(-no_beta.rho0 * (no_beta.L / no_beta.rho0) / (no_beta.alpha * no_beta.theta_c)));
  for (const auto& p : all_presets()) CHECK(clausius_clapeyron_slope(p.material) < 0.0);
}

TEST_CASE("presets and parameter validation") {
  const auto n = normalized_preset().material;
  CHECK(n.L == 2.0);
  CHECK(n.c == 1.0);
  CHECK(n.theta_c == 1.0);
  CHECK(n.sound_speed() == 1.0);
  const auto w = find_preset("water").material;
  CHECK(w.sound_speed() == doctest::Approx(1.5e3).epsilon(1e-15));
  CHECK(w.alpha * w.lambda == 2.025e8);
  CHECK_THROWS_AS(find_preset("glycerol"), std::invalid_argument);

  auto bad = n;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = n;
  bad.beta = 0.0;
  CHECK_NOTHROW(bad.validate());

  BoundaryParams b;
  CHECK_NOTHROW(b.validate());
  b.h_faces = {0.0, 0.0};
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b.h_faces = {0.0, 1.0};
  b.K_Gamma = -1.0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}
