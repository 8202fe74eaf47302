#include <cmath>
#include <vector>

#include "doctest.h"
#include "qekit/constants.hpp"
#include "qekit/spectrum.hpp"
#include "test_util.hpp"

using namespace qekit;
using namespace qekit::spectra;
using qekit_test::throws_code;

namespace {

Spectrum flat_wl_spectrum(int n = 10, double wl0 = 780.0, double dwl = 1.0,
                          double value = 100.0) {
  std::vector<double> axis(n), inten(n, value);
  for (int i = 0; i < n; ++i) axis[i] = wl0 + i * dwl;
  return Spectrum(AxisKind::wavelength_nm, axis, inten);
}

}  // namespace

TEST_CASE("spectrum construction enforces the invariants") {
  CHECK(throws_code(Err::InvalidSpectrum, [] {
    Spectrum(AxisKind::wavelength_nm, {1, 2, 3}, {1, 2, 3});
  }));
  CHECK(throws_code(Err::InvalidSpectrum, [] {
    Spectrum(AxisKind::wavelength_nm, {1, 2, 3, 4, 5, 6, 7, 8},
             {1, 2, 3, 4, 5, 6, 7});
  }));
  // non-monotonic axis
  CHECK(throws_code(Err::InvalidSpectrum, [] {
    Spectrum(AxisKind::wavelength_nm, {1, 2, 2, 4, 5, 6, 7, 8},
             {1, 1, 1, 1, 1, 1, 1, 1});
  }));
  // negative sigma
  CHECK(throws_code(Err::InvalidSpectrum, [] {
    Spectrum(AxisKind::wavelength_nm, {1, 2, 3, 4, 5, 6, 7, 8},
             {1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, -1, 1, 1, 1, 1});
  }));

  SUBCASE("descending axis is reversed with its payload") {
    Spectrum s(AxisKind::wavelength_nm, {8, 7, 6, 5, 4, 3, 2, 1},
               {80, 70, 60, 50, 40, 30, 20, 10});
    CHECK(s.axis.front() == 1);
    CHECK(s.intensity.front() == 10);
    CHECK(s.intensity.back() == 80);
  }

  SUBCASE("missing sigma defaults to the Poisson floor") {
    Spectrum s(AxisKind::wavelength_nm, {1, 2, 3, 4, 5, 6, 7, 8},
               {100, 0.25, 4, 9, 16, 25, 36, 49});
    CHECK(s.sigma[0] == doctest::Approx(10.0));
    CHECK(s.sigma[1] == doctest::Approx(1.0));  // floor at one count
    CHECK(s.sigma[2] == doctest::Approx(2.0));
  }
}

TEST_CASE("calibration divides by the interpolated efficiency") {
  Spectrum s = flat_wl_spectrum();
  EfficiencyCurve curve({700.0, 900.0}, {0.5, 0.5});
  Spectrum c = calibrate(s, curve);
  for (double v : c.intensity) CHECK(v == doctest::Approx(200.0));
  for (double v : c.sigma) CHECK(v == doctest::Approx(20.0));
  CHECK(c.calibrated());

  CHECK(throws_code(Err::AlreadyCalibrated, [&] { calibrate(c, curve); }));
  EfficiencyCurve narrow({781.0, 787.0}, {1.0, 1.0});
  CHECK(throws_code(Err::AxisNotCovered, [&] { calibrate(s, narrow); }));
  Spectrum e = to_energy(s);
  CHECK(throws_code(Err::NotWavelengthDomain, [&] { calibrate(e, curve); }));
}

TEST_CASE("energy conversion applies hc/lambda and the Jacobian") {
  const double hc = constants::hc_ev_nm;
  CHECK(hc == doctest::Approx(1239.8419840550368).epsilon(1e-15));

  std::vector<double> axis(9), inten(9, 50.0);
  for (int i = 0; i < 9; ++i) axis[i] = 789.3 + i * 0.5;  // includes 791.3
  Spectrum s(AxisKind::wavelength_nm, axis, inten);
  Spectrum e = to_energy(s);

  CHECK(e.axis_kind == AxisKind::energy_ev);
  // ascending energies
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e.axis[i] > e.axis[i - 1]);
  // bin that was at 791.3 nm
  bool found = false;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (std::fabs(e.axis[i] - hc / 791.3) < 1e-12) {
      found = true;
      CHECK(e.axis[i] == doctest::Approx(1.5668418859244315).epsilon(1e-14));
      CHECK(e.axis[i] == doctest::Approx(1.5668).epsilon(1e-4));
      CHECK(e.intensity[i] ==
            doctest::Approx(50.0 * 791.3 * 791.3 / hc).epsilon(1e-14));
    }
  }
  CHECK(found);

  SUBCASE("integrated intensity is preserved for smooth spectra") {
    int n = 400;
    std::vector<double> wl(n), dens(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      wl[i] = 795.0 + 20.0 * i / (n - 1);
      double z = (wl[i] - 805.0) / 3.0;
      dens[i] = std::exp(-0.5 * z * z);
    }
    Spectrum sm(AxisKind::wavelength_nm, wl, dens);
    double before = 0.0, after = 0.0;
    for (int i = 1; i < n; ++i)
      before += 0.5 * (sm.intensity[i] + sm.intensity[i - 1]) *
                (sm.axis[i] - sm.axis[i - 1]);
    Spectrum em = to_energy(sm);
    for (std::size_t i = 1; i < em.size(); ++i)
      after += 0.5 * (em.intensity[i] + em.intensity[i - 1]) *
               (em.axis[i] - em.axis[i - 1]);
    CHECK(after == doctest::Approx(before).epsilon(1e-3));
    (void)total;
  }

  SUBCASE("non-positive wavelengths are rejected") {
    Spectrum bad(AxisKind::wavelength_nm, {-3, -2, -1, 1, 2, 3, 4, 5},
                 {1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(throws_code(Err::NonPositiveWavelength, [&] { to_energy(bad); }));
  }
}

TEST_CASE("lineshape extraction divides by E^3 without normalizing") {
  std::vector<double> e_axis(9), inten(9);
  for (int i = 0; i < 9; ++i) {
    e_axis[i] = 0.8 + 0.05 * i;  // includes 1.0 eV at i = 4
    inten[i] = e_axis[i] * e_axis[i] * e_axis[i];
  }
  Spectrum s(AxisKind::energy_ev, e_axis, inten);
  Lineshape l = to_lineshape(s, 1.55);
  CHECK(l.size() == 9);
  for (std::size_t i = 1; i < l.size(); ++i)
    CHECK(l.delta_e_ev[i] > l.delta_e_ev[i - 1]);
  // intensity equal to E^3 gives unit density everywhere; in particular at
  // the 1 eV bin the scaling factor is exactly 1
  for (double v : l.density) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l.delta_e_ev.front() == doctest::Approx(1.55 - 1.2));
  CHECK(l.delta_e_ev.back() == doctest::Approx(1.55 - 0.8));
  CHECK(l.e_zpl_hint_ev == 1.55);

  Spectrum wl = flat_wl_spectrum();
  CHECK(throws_code(Err::NotEnergyDomain, [&] { to_lineshape(wl, 1.55); }));

  Spectrum zero(AxisKind::energy_ev, {-0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7},
                {1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(throws_code(Err::ZeroEnergyBin, [&] { to_lineshape(zero, 1.0); }));
}

TEST_CASE("rebinning sums counts by fractional overlap") {
  Spectrum s(AxisKind::wavelength_nm, {1, 2, 3, 4, 5, 6, 7, 8},
             {50, 50, 10, 10, 10, 10, 10, 10},
             {5, 5, 1, 1, 1, 1, 1, 1});

  SUBCASE("merging two bins adds counts and sigmas in quadrature") {
    std::vector<double> edges{0.5, 2.5, 4.5, 6.5, 8.5};
    Spectrum r = rebin(s, edges);
    CHECK(r.size() == 4);
    CHECK(r.intensity[0] == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(r.sigma[0] == doctest::Approx(std::sqrt(50.0)).epsilon(1e-12));
    CHECK(r.axis[0] == doctest::Approx(1.5));
  }

  SUBCASE("total counts are conserved under full coverage") {
    std::vector<double> edges;
    for (int i = 0; i <= 16; ++i) edges.push_back(0.5 + i * 0.5);
    Spectrum r = rebin(s, edges);
    double total = 0.0;
    for (double v : r.intensity) total += v;
    CHECK(total == doctest::Approx(160.0).epsilon(1e-9));
  }

  SUBCASE("fractional split of one source bin") {
    std::vector<double> edges{0.5, 1.0, 8.5};
    Spectrum r = rebin(s, edges);
    CHECK(r.intensity[0] == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(r.sigma[0] == doctest::Approx(2.5).epsilon(1e-12));
  }

  SUBCASE("edge validation") {
    CHECK(throws_code(Err::NonMonotonicEdges,
                      [&] { rebin(s, {0.5, 0.5, 2.0}); }));
    CHECK(throws_code(Err::NonMonotonicEdges, [&] { rebin(s, {0.5}); }));
    CHECK(throws_code(Err::EdgesOutOfRange,
                      [&] { rebin(s, {0.0, 4.0}); }));
  }
}

TEST_CASE("equal-count edges follow the cumulative counts") {
  std::vector<double> axis(16), counts(16, 100.0);
  for (int i = 0; i < 16; ++i) axis[i] = i + 1.0;
  Spectrum s(AxisKind::wavelength_nm, axis, counts);
  std::vector<double> edges = equal_count_edges(s, 400.0);
  Spectrum r = rebin(s, edges);
  CHECK(r.size() == 4);
  for (double v : r.intensity) CHECK(v == doctest::Approx(400.0).epsilon(1e-9));

  SUBCASE("density rebin restores the per-unit scale") {
    Spectrum d = rebin_density(s, edges);
    for (double v : d.intensity) CHECK(v == doctest::Approx(100.0).epsilon(1e-9));
  }
}
