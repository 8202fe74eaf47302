#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "qekit/constants.hpp"
#include "qekit/numerics.hpp"
#include "qekit/rng.hpp"
#include "qekit/vibronic.hpp"
#include "test_util.hpp"

using namespace qekit;
using namespace qekit::vibronic;
using qekit_test::throws_code;

namespace {

constexpr double kB = constants::k_boltzmann_ev_per_k;

std::vector<double> lattice_x(const LatticeFn& f) {
  std::vector<double> x(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) x[i] = f.x(i);
  return x;
}

PhononSpectralFunction seeded_random_psf(std::uint64_t seed) {
  PhononSpectralFunction psf;
  psf.delta_e_ev = 0.002;
  psf.e_max_ev = 0.200;
  psf.values.resize(100);
  synth::Rng rng(seed);
  for (double& v : psf.values) v = rng.next_double();
  return psf;
}

std::size_t center_index(const LatticeFn& f) {
  auto c = static_cast<std::size_t>(std::llround(-f.x0 / f.step));
  REQUIRE(std::fabs(f.x(c)) < 1e-15);
  return c;
}

}  // namespace

TEST_CASE("Bose occupation: exact point, frozen reference, deep freeze-out") {
  // E = kB T ln 2 gives exp(E/kBT) = 2, so n = 1.
  const double t = 4.0;
  CHECK(bose_einstein(kB * t * std::log(2.0), t) ==
        doctest::Approx(1.0).epsilon(1e-13));
  // mpmath 1/(exp(0.001/(kB*4)) - 1) to 17 digits.
  CHECK(bose_einstein(0.001, 4.0) ==
        doctest::Approx(0.058157505492726908).epsilon(1e-13));
  // A 160 meV mode at 4 K is frozen out by ~200 orders of magnitude.
  CHECK(bose_einstein(0.160, 4.0) < 1e-200);
  CHECK(bose_einstein(0.160, 4.0) > 0.0);
  CHECK(throws_code(Err::NonPositiveEnergy,
                    [] { bose_einstein(0.0, 4.0); }));
  CHECK(throws_code(Err::NonPositiveTemperature,
                    [] { bose_einstein(0.001, 0.0); }));
}

TEST_CASE("spectral function interpolant: ramp, midpoints, clamp, cutoff") {
  PhononSpectralFunction psf = PhononSpectralFunction::uniform(0.002, 0.2, 3.0);
  psf.validate();
  CHECK(psf.bins() == 100);
  CHECK(psf.midpoint(0) == doctest::Approx(0.001));
  // Linear ramp to S(0) = 0 below the first midpoint.
  CHECK(psf.at(0.0005) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(psf.at(0.0) == 0.0);
  // Flat between midpoints of a uniform table.
  CHECK(psf.at(0.1234) == doctest::Approx(3.0).epsilon(1e-14));
  // Held at the last midpoint value out to e_max, zero beyond.
  CHECK(psf.at(0.1999) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(psf.at(0.2000001) == 0.0);
  // Trapezoid of that shape: value * (e_max - delta_e / 4).
  CHECK(psf.integral() == doctest::Approx(3.0 * (0.2 - 0.0005)).epsilon(1e-12));

  PhononSpectralFunction ramped = psf;
  for (std::size_t i = 0; i < ramped.values.size(); ++i)
    ramped.values[i] = static_cast<double>(i);
  // Halfway between midpoints 10 and 11.
  CHECK(ramped.at(ramped.midpoint(10) + 0.001) ==
        doctest::Approx(10.5).epsilon(1e-13));

  PhononSpectralFunction bad = psf;
  bad.values.clear();
  CHECK(throws_code(Err::EmptySpectralFunction, [&] { bad.validate(); }));
  bad = psf;
  bad.values[3] = -0.1;
  CHECK(throws_code(Err::NonPositiveInput, [&] { bad.validate(); }));
  bad = psf;
  bad.values.assign(100, 0.0);
  CHECK(throws_code(Err::EmptySpectralFunction, [&] { bad.validate(); }));
  bad = psf;
  bad.values.resize(90);
  CHECK(throws_code(Err::EmptySpectralFunction, [&] { bad.validate(); }));
}

TEST_CASE("one-phonon distribution: lattice geometry and unit mass") {
  PhononSpectralFunction psf = PhononSpectralFunction::uniform(0.002, 0.2);
  LatticeFn i1 = one_phonon(psf, 4.0);
  // Default step delta_e/2, symmetric support with one zero pad each side.
  CHECK(i1.step == doctest::Approx(0.001).epsilon(1e-14));
  CHECK(i1.x0 == doctest::Approx(-0.201).epsilon(1e-14));
  CHECK(i1.size() == 403);
  CHECK(i1.values.front() == 0.0);
  CHECK(i1.values.back() == 0.0);
  CHECK(i1.integral() == doctest::Approx(1.0).epsilon(1e-9));

  LatticeFn r = one_phonon(seeded_random_psf(99), 10.0);
  CHECK(r.integral() == doctest::Approx(1.0).epsilon(1e-9));

  // Requested step snaps so that e_max is a whole number of cells.
  LatticeFn s = one_phonon(psf, 4.0, 0.00025);
  CHECK(s.step == doctest::Approx(0.00025).epsilon(1e-14));
  CHECK(s.size() == 2 * 801 + 1);

  PhononSpectralFunction empty;
  CHECK(throws_code(Err::EmptySpectralFunction,
                    [&] { one_phonon(empty, 4.0); }));
}

TEST_CASE("one-phonon distribution obeys detailed balance at the nodes") {
  PhononSpectralFunction psf = PhononSpectralFunction::uniform(0.002, 0.2);
  const double t = 300.0;
  LatticeFn i1 = one_phonon(psf, t);
  const std::size_t c = center_index(i1);
  // I1(-E)/I1(+E) = n/(n+1) = exp(-E/kBT) wherever S(E) > 0.
  for (std::size_t k = 5; k + 1 < c; k += 7) {
    const double e = i1.x(c + k);
    const double ratio = i1.values[c - k] / i1.values[c + k];
    CHECK(ratio == doctest::Approx(std::exp(-e / (kB * t))).epsilon(1e-12));
  }
}

TEST_CASE("phonon absorption freezes out at cryogenic temperature") {
  PhononSpectralFunction psf = PhononSpectralFunction::uniform(0.002, 0.2);
  LatticeFn i1 = one_phonon(psf, 4.0);
  const std::size_t c = center_index(i1);
  // At 4 K a 12 meV phonon has n ~ exp(-35).
  const std::size_t k12 = 12;  // 12 meV at 1 meV step
  CHECK(i1.values[c - k12] < 1e-12 * i1.values[c + k12]);

  // A single ~160 meV mode: the anti-Stokes side is essentially absent.
  PhononSpectralFunction mode;
  mode.delta_e_ev = 0.002;
  mode.e_max_ev = 0.2;
  mode.values.assign(100, 0.0);
  mode.values[79] = 1.0;
  mode.values[80] = 1.0;
  LatticeFn m = one_phonon(mode, 4.0);
  const std::size_t mc = center_index(m);
  double stokes = 0.0, anti = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i > mc) stokes += m.values[i];
    if (i < mc) anti += m.values[i];
  }
  CHECK(anti < 1e-150 * stokes);
}

TEST_CASE("multi-phonon convolution powers conserve mass and centroid") {
  LatticeFn i1 = one_phonon(seeded_random_psf(7), 6.0);
  LatticeFn p1 = n_phonon(i1, 1);
  CHECK(p1.x0 == i1.x0);
  CHECK(p1.step == i1.step);
  CHECK(p1.values == i1.values);

  const std::vector<double> x1 = lattice_x(i1);
  std::vector<double> xy1(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) xy1[i] = x1[i] * i1.values[i];
  const double mean1 = trapz(x1, xy1);
  for (int n = 2; n <= 10; ++n) {
    LatticeFn pn = n_phonon(i1, n);
    CHECK(std::fabs(pn.integral() - 1.0) < 1e-8 * n);
    const std::vector<double> xn = lattice_x(pn);
    std::vector<double> xy(xn.size());
    for (std::size_t i = 0; i < xn.size(); ++i) xy[i] = xn[i] * pn.values[i];
    // Convolution adds centroids.
    CHECK(trapz(xn, xy) == doctest::Approx(n * mean1).epsilon(1e-10));
  }
  CHECK(throws_code(Err::NonPositiveInput, [&] { n_phonon(i1, 0); }));
}

TEST_CASE("phonon-number truncation rule: frozen table, cap, loose tail") {
  // Smallest n with cumulative Poisson weight >= 1 - 1e-6 (floor 1).
  CHECK(auto_n_max(0.0) == 1);
  CHECK(auto_n_max(0.5) == 7);
  CHECK(auto_n_max(0.72) == 7);
  CHECK(auto_n_max(1.0) == 9);
  CHECK(auto_n_max(1.04) == 9);
  CHECK(auto_n_max(1.70) == 11);
  CHECK(auto_n_max(2.14) == 12);
  CHECK(auto_n_max(3.0) == 14);
  CHECK(auto_n_max(30.0) == 20);  // cap
  CHECK(auto_n_max(1.0, 1e-3) == 5);
  CHECK(throws_code(Err::NegativeHuangRhys, [] { auto_n_max(-0.1); }));
}

TEST_CASE("Poisson phonon-number weights: frozen values and closure") {
  const double s = 2.14;
  std::vector<double> w = poisson_weights(s, 12);
  REQUIRE(w.size() == 12);
  // mpmath exp(-2.14) * 2.14^n / n! to 17 digits.
  CHECK(std::exp(-s) == doctest::Approx(0.1176548430217792).epsilon(1e-15));
  CHECK(w[0] == doctest::Approx(0.25178136406660748).epsilon(1e-13));
  CHECK(w[1] == doctest::Approx(0.26940605955127).epsilon(1e-13));
  CHECK(w[4] == doctest::Approx(0.044004534321448861).epsilon(1e-13));

  // With the default truncation the ZPL weight plus sidebands closes to
  // better than the 1e-6 tail tolerance.
  for (double sv : {0.5, 1.0, 3.0}) {
    std::vector<double> ws = poisson_weights(sv, auto_n_max(sv));
    double total = std::exp(-sv);
    for (double v : ws) total += v;
    CHECK(total >= 1.0 - 1e-6);
    CHECK(total <= 1.0 + 1e-15);
  }
  // Frozen cumulative sums for the same three cases.
  auto closure = [](double sv) {
    double total = std::exp(-sv);
    for (double v : poisson_weights(sv, auto_n_max(sv))) total += v;
    return total;
  };
  CHECK(closure(0.5) == doctest::Approx(0.999999937803).epsilon(1e-10));
  CHECK(closure(1.0) == doctest::Approx(0.999999888575).epsilon(1e-10));
  CHECK(closure(3.0) == doctest::Approx(0.999999329614).epsilon(1e-10));
  CHECK(throws_code(Err::NegativeHuangRhys, [] { poisson_weights(-1.0, 3); }));
}

TEST_CASE("phonon sideband mass equals one minus the ZPL weight") {
  LatticeFn i1 = one_phonon(seeded_random_psf(21), 4.0);
  for (double s : {0.5, 2.14}) {
    LatticeFn sb = psb(i1, s, auto_n_max(s));
    CHECK(std::fabs(sb.integral() - (1.0 - std::exp(-s))) < 1.1e-6);
  }
  LatticeFn zero = psb(i1, 0.0, 3);
  for (double v : zero.values) CHECK(v == 0.0);
  CHECK(throws_code(Err::NegativeHuangRhys, [&] { psb(i1, -0.5, 3); }));
  CHECK(throws_code(Err::NonPositiveInput, [&] { psb(i1, 1.0, 0); }));
}

TEST_CASE("profile convolution: sampling constraints and consistency") {
  LatticeFn i1 = one_phonon(seeded_random_psf(5), 4.0);
  LatticeFn sb = psb(i1, 1.0, 6);
  LineProfile prof(ZplShape::lorentzian, 150e-6);
  // The regular sampler requires the output step to subdivide the lattice.
  CHECK(throws_code(Err::NonPositiveInput, [&] {
    convolve_profile(sb, prof, -0.1, i1.step * 1.5, 8);
  }));
  std::vector<double> reg = convolve_profile(sb, prof, -0.05, i1.step / 2, 40);
  std::vector<double> q(40);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = -0.05 + i * i1.step / 2;
  std::vector<double> at = convolve_profile_at(sb, prof, q);
  REQUIRE(reg.size() == at.size());
  for (std::size_t i = 0; i < reg.size(); ++i)
    CHECK(reg[i] == doctest::Approx(at[i]).epsilon(1e-12));
}

TEST_CASE("zero-coupling lineshape collapses to the bare line profile") {
  for (ZplShape shape : {ZplShape::lorentzian, ZplShape::gaussian}) {
    VibronicParams p;
    p.s_hr = 0.0;
    p.gamma_zpl_ev = 150e-6;
    p.zpl_shape = shape;
    p.psf = PhononSpectralFunction::uniform(0.002, 0.2);
    LatticeFn L = forward_lineshape(p);
    LineProfile prof(shape, p.gamma_zpl_ev);
    std::vector<double> x = lattice_x(L);
    std::vector<double> ref(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ref[i] = prof.pdf(x[i]);
    const double norm = trapz(x, ref);
    const double peak = prof.pdf(0.0) / norm;
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(std::fabs(L.values[i] - ref[i] / norm) < 1e-12 * peak);
  }
}

TEST_CASE("lineshape window, unit normalization, and ZPL weight") {
  for (ZplShape shape : {ZplShape::lorentzian, ZplShape::gaussian}) {
    for (double s : {0.5, 2.14}) {
      VibronicParams p;
      p.s_hr = s;
      p.gamma_zpl_ev = 150e-6;
      p.zpl_shape = shape;
      p.psf = PhononSpectralFunction::uniform(0.002, 0.2);
      LatticeFn L = forward_lineshape(p, 5e-4);
      const double lo = -(0.2 + 5 * p.gamma_zpl_ev);
      const double hi = auto_n_max(s) * 0.2 + 5 * p.gamma_zpl_ev;
      CHECK(L.x0 <= lo);
      CHECK(L.x0 > lo - L.step);
      CHECK(L.x_back() >= hi);
      CHECK(L.x_back() <= hi + L.step * 1.0000001);
      CHECK(trapz(lattice_x(L), L.values) == doctest::Approx(1.0).epsilon(1e-6));
      // Closed-form tail segments cancel to rounding noise, not exact zero.
      const double peak = *std::max_element(L.values.begin(), L.values.end());
      for (double v : L.values) CHECK(v > -1e-12 * peak);
    }
  }
}

// ---------------------------------------------------------------------------
// From-scratch reference implementation of the finite-temperature emission
// model: independent interpolant, Bose factor, Riemann-sum convolution ladder
// on a delta_e/8 lattice, and adaptive Gauss-Legendre quadrature for the ZPL
// convolution.  Shares no code with the library beyond the parameter struct.
// ---------------------------------------------------------------------------

namespace {

double ref_psf_at(const std::vector<double>& vals, double de, double emax,
                  double e) {
  if (e <= 0.0 || e > emax) return 0.0;
  const double m0 = 0.5 * de;
  const std::size_t n = vals.size();
  if (e <= m0) return vals[0] * e / m0;
  const double last = (static_cast<double>(n) - 0.5) * de;
  if (e >= last) return vals[n - 1];
  const double t = e / de - 0.5;
  const auto i = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(i);
  return vals[i] * (1.0 - f) + vals[i + 1] * f;
}

struct RefSamp {
  double x0 = 0.0, h = 0.0;
  std::vector<double> v;
  double x(std::size_t i) const { return x0 + h * static_cast<double>(i); }
};

RefSamp ref_conv(const RefSamp& f, const RefSamp& g) {
  RefSamp out;
  out.h = f.h;
  out.x0 = f.x0 + g.x0;
  out.v.assign(f.v.size() + g.v.size() - 1, 0.0);
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    if (f.v[i] == 0.0) continue;
    const double fv = f.v[i] * f.h;
    for (std::size_t j = 0; j < g.v.size(); ++j) out.v[i + j] += fv * g.v[j];
  }
  return out;
}

// Emission lineshape evaluated at the points q by the reference chain on a
// lattice of step hf; normalized by its own trapezoid over q.
std::vector<double> ref_lineshape(const VibronicParams& p, int nmax, double hf,
                                  const std::vector<double>& q) {
  const double de = p.psf.delta_e_ev, emax = p.psf.e_max_ev;
  RefSamp i1;
  const long long ns = std::llround(emax / hf);
  i1.h = hf;
  i1.x0 = -(emax + hf);
  i1.v.assign(static_cast<std::size_t>(2 * (ns + 1) + 1), 0.0);
  const long long c0 = ns + 1;
  for (long long i = -ns; i <= ns; ++i) {
    double val;
    if (i == 0) {
      // Continuity limit of (n+1) S and n S at E -> 0 with S ~ E ramp.
      val = kB * p.temperature_k * p.psf.values.front() / (0.5 * de);
    } else {
      const double e = std::fabs(static_cast<double>(i)) * hf;
      const double s = ref_psf_at(p.psf.values, de, emax, e);
      if (s == 0.0) {
        val = 0.0;
      } else {
        const double n = 1.0 / std::expm1(e / (kB * p.temperature_k));
        val = (i > 0 ? n + 1.0 : n) * s;
      }
    }
    i1.v[static_cast<std::size_t>(c0 + i)] = val;
  }
  double z = 0.0;
  for (double v : i1.v) z += v * hf;
  for (double& v : i1.v) v /= z;

  std::vector<double> w(static_cast<std::size_t>(nmax));
  double term = std::exp(-p.s_hr);
  for (int n = 1; n <= nmax; ++n) {
    term *= p.s_hr / n;
    w[static_cast<std::size_t>(n - 1)] = term;
  }

  std::vector<RefSamp> ladder;
  ladder.push_back(i1);
  for (int n = 2; n <= nmax; ++n) ladder.push_back(ref_conv(ladder.back(), i1));
  RefSamp sb = ladder.back();
  std::fill(sb.v.begin(), sb.v.end(), 0.0);
  for (int n = 1; n <= nmax; ++n) {
    const RefSamp& t = ladder[static_cast<std::size_t>(n - 1)];
    const auto off =
        static_cast<std::size_t>(std::llround((t.x0 - sb.x0) / sb.h));
    for (std::size_t i = 0; i < t.v.size(); ++i)
      sb.v[off + i] += w[static_cast<std::size_t>(n - 1)] * t.v[i];
  }

  LineProfile prof(p.zpl_shape, p.gamma_zpl_ev);
  const double zplw = std::exp(-p.s_hr);
  const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563,
                          0.3399810435848563, 0.8611363115940526};
  const double gl_w[4] = {0.3478548451374538, 0.6521451548625461,
                          0.6521451548625461, 0.3478548451374538};
  auto sb_at = [&](double x) {
    const double t = (x - sb.x0) / sb.h;
    if (t <= 0.0 || t >= static_cast<double>(sb.v.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(t);
    const double f = t - static_cast<double>(i);
    return sb.v[i] * (1.0 - f) + sb.v[i + 1] * f;
  };
  std::vector<double> out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    double acc = 0.0;
    for (std::size_t e = 0; e + 1 < sb.v.size(); ++e) {
      if (sb.v[e] == 0.0 && sb.v[e + 1] == 0.0) continue;
      const double xl = sb.x(e), xr = xl + sb.h;
      const double au = std::fabs(q[k] - 0.5 * (xl + xr));
      int panels = 1;
      if (au < 8.0 * p.gamma_zpl_ev)
        panels = 64;
      else if (au < 0.01)
        panels = 8;
      else if (au < 0.05)
        panels = 2;
      const double ph = sb.h / panels;
      for (int pnl = 0; pnl < panels; ++pnl) {
        const double a = xl + pnl * ph, half = 0.5 * ph, mid = a + half;
        for (int g = 0; g < 4; ++g) {
          const double x = mid + half * gl_x[g];
          acc += gl_w[g] * half * prof.pdf(q[k] - x) * sb_at(x);
        }
      }
    }
    out[k] = acc + zplw * prof.pdf(q[k]);
  }
  double tot = 0.0;
  for (double v : out) tot += v;
  tot = (tot - 0.5 * (out.front() + out.back())) * (q[1] - q[0]);
  for (double& v : out) v /= tot;
  return out;
}

double sup_rel(const std::vector<double>& u, const std::vector<double>& ref) {
  double m = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    m = std::max(m, std::fabs(u[i] - ref[i]));
    mr = std::max(mr, std::fabs(ref[i]));
  }
  return m / mr;
}

}  // namespace

TEST_CASE("lineshape matches an independent fine-grid evaluation: smooth "
          "coupling density") {
  VibronicParams p;
  p.gamma_zpl_ev = 150e-6;
  p.s_hr = 2.14;
  p.temperature_k = 4.0;
  p.psf.delta_e_ev = 0.002;
  p.psf.e_max_ev = 0.2;
  p.psf.values.resize(100);
  for (std::size_t i = 0; i < 100; ++i) {
    const double z = ((static_cast<double>(i) + 0.5) * 0.002 - 0.08) / 0.04;
    p.psf.values[i] = std::exp(-0.5 * z * z);
  }
  LatticeFn L = forward_lineshape(p, 5e-4);
  const std::vector<double> q = lattice_x(L);
  const int nmax = auto_n_max(p.s_hr);
  std::vector<double> ref = ref_lineshape(p, nmax, p.psf.delta_e_ev / 8, q);
  CHECK(sup_rel(L.values, ref) < 1e-4);
}

TEST_CASE("lineshape fine-grid comparison: near-monochromatic coupling "
          "density converges at second order") {
  VibronicParams p;
  p.gamma_zpl_ev = 150e-6;
  p.s_hr = 2.14;
  p.temperature_k = 4.0;
  p.psf.delta_e_ev = 0.002;
  p.psf.e_max_ev = 0.2;
  p.psf.values.assign(100, 0.0);
  p.psf.values[79] = 1.0;
  p.psf.values[80] = 1.0;
  const int nmax = auto_n_max(p.s_hr);

  LatticeFn L = forward_lineshape(p, 5e-4);
  const std::vector<double> q = lattice_x(L);
  const double hf = p.psf.delta_e_ev / 8;
  std::vector<double> ref = ref_lineshape(p, nmax, hf, q);

  // Library algebra rerun on the same delta_e/8 lattice.
  LatticeFn i1f = one_phonon(p.psf, p.temperature_k, hf);
  LatticeFn sbf = psb(i1f, p.s_hr, nmax);
  LineProfile prof(p.zpl_shape, p.gamma_zpl_ev);
  std::vector<double> fine = convolve_profile_at(sbf, prof, q);
  const double zplw = std::exp(-p.s_hr);
  for (std::size_t i = 0; i < q.size(); ++i) fine[i] += zplw * prof.pdf(q[i]);
  double tot = 0.0;
  for (double v : fine) tot += v;
  tot = (tot - 0.5 * (fine.front() + fine.back())) * (q[1] - q[0]);
  for (double& v : fine) v /= tot;

  // Two delta-like cells leave ~3e-4 discretization error in any delta_e/8
  // scheme near the one-phonon edge, so the bounds are resolution-limited.
  const double coarse_err = sup_rel(L.values, ref);
  const double fine_err = sup_rel(fine, ref);
  CHECK(fine_err < 5e-4);
  CHECK(coarse_err < 5e-3);
  // Halving the lattice step four times over should cut the error by >= 4x.
  CHECK(coarse_err / fine_err >= 4.0);
}
