#include <algorithm>
#include <random>

#include "doctest.h"
#include "spinorbit/certifier.hpp"
#include "spinorbit/errors.hpp"

using namespace spinorbit;

namespace {

std::vector<Vec2> random_circle_anchors(std::mt19937& rng, int n, double radius, double sep_min) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p = Vec2::polar(radius, u(rng));
    if (std::all_of(out.begin(), out.end(), [&](const Vec2& q) { return distance(p, q) >= sep_min; }))
      out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("spec examples") {
  const std::vector<Vec2> four{{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0.1, -0.3}};
  CHECK(certify(Potential::gaussian_well(1, 1), four).verdict == Verdict::NegativeDefinite);
  const auto zero = certify(Potential::zero(), four);
  CHECK(zero.max_eigenvalue == 0.0);
  CHECK(zero.verdict != Verdict::NegativeDefinite);
  const auto single = certify(Potential::circular_well(0.3, 2.0), {{1.0, 1.0}});
  CHECK(single.verdict == Verdict::NegativeDefinite);
  CHECK(single.max_eigenvalue == doctest::Approx(kFourierNorm * integral_V(Potential::circular_well(0.3, 2.0)).value));
  try {
    (void)certify(Potential::gaussian_well(1, 1), {{0.5, 0}, {0.5, 0}});
    FAIL("expected DuplicateAnchors");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateAnchors);
  }
}

TEST_CASE("Bochner property on random anchor sets") {
  std::mt19937 rng(2024);
  for (const auto& v : {Potential::gaussian_well(0.5, 1.0), Potential::circular_well(1.0, 1.0),
                        Potential::gaussian_well(2.0, 0.3, {1.0, -2.0})})
    for (int draw = 0; draw < 20; ++draw) {
      const auto anchors = random_circle_anchors(rng, 6, 1.0, 0.1);
      const auto c = certify(v, anchors);
      CHECK(c.verdict == Verdict::NegativeDefinite);
      CHECK((c.matrix - c.matrix.adjoint()).norm() <= 1e-10 * c.matrix.norm());
      CHECK(certify(Potential::zero(), anchors).verdict != Verdict::NegativeDefinite);
    }
}

TEST_CASE("permutation and translation leave the spectrum unchanged") {
  std::mt19937 rng(5);
  const auto v = Potential::sum({{WellShape::Gaussian, 1.0, 1.0, {0.2, 0.0}}, {WellShape::Circular, 0.4, 0.7, {}}});
  for (int draw = 0; draw < 10; ++draw) {
    auto anchors = random_circle_anchors(rng, 5, 0.8, 0.05);
    const auto base = certify(v, anchors);
    std::shuffle(anchors.begin(), anchors.end(), rng);
    const auto perm = certify(v, anchors);
    CHECK((base.eigenvalues - perm.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
    const auto moved = certify(v.translated({3.0, -1.5}), anchors);
    CHECK((base.eigenvalues - moved.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(moved.verdict == base.verdict);
  }
}

TEST_CASE("predicted counts") {
  const auto rashba = find_kappa_and_S(Coupling::rashba(1.0));
  const auto circ = predicted_count(rashba, Potential::circular_well(1.0, 1.0), 8);
  CHECK(circ.count == 8);
  CHECK(circ.certificate.verdict == Verdict::NegativeDefinite);
  CHECK(circ.certificate.anchors.size() == 8);

  const auto mixed = find_kappa_and_S(Coupling::mixed(1.0, 0.5));
  CHECK(predicted_count(mixed, Potential::gaussian_well(1.0, 1.0), 8).count == 2);

  const auto bumpy = Potential::sum({{WellShape::Gaussian, 1.0, 1.0, {}}, {WellShape::Gaussian, -0.5, 0.5, {1.0, 0.0}}});
  REQUIRE(bumpy.sign_certificate() == SignCertificate::Indefinite);
  REQUIRE(integral_V(bumpy).value < 0);
  const auto greedy = predicted_count(rashba, bumpy, 6);
  CHECK(greedy.method == "greedy");
  CHECK(greedy.count >= 1);
  CHECK(greedy.certificate.verdict == Verdict::NegativeDefinite);

  const auto none = predicted_count(rashba, Potential::zero(), 4);
  CHECK(none.count == 0);
  CHECK(none.certificate.verdict != Verdict::NegativeDefinite);

  // a pure barrier has V^(0) > 0: nothing certifies
  const auto barrier = predicted_count(rashba, Potential::gaussian_well(-1.0, 1.0), 4);
  CHECK(barrier.count == 0);
  CHECK(barrier.certificate.verdict == Verdict::Indefinite);
}
