#include "catch_amalgamated.hpp"
#include "fixtures.hpp"

using namespace psoc;
using Catch::Approx;

TEST_CASE("Schottky construction", "[repbuilder]") {
  PingPongCertificate<double> cert;
  std::vector<AxisSpec<double>> axes{{0.0, 0.0}, {M_PI / 2, 0.0}};
  auto rho = schottky_so_m1<double>(2, axes, {4.0, 4.0}, &cert);
  CHECK(cert.holds);
  CHECK(cert.minSeparation > 0.0);
  CHECK(cert.samplesChecked > 0);
  for (int i = 0; i < 2; ++i) {
    CHECK(lambda1<double>(rho.generator(i)) == Approx(4.0).epsilon(1e-12));
    CHECK(form_defect<double>(rho.space(), rho.generator(i)) < 1e-10);
  }
  CHECK_THROWS_AS(schottky_so_m1<double>(2, {{0.0, 0.0}, {0.2, 0.0}}, {0.1, 0.1}), DomainError);
  CHECK_THROWS_AS(schottky_so_m1<double>(2, {{0.0, 0.0}}, {4.0}), DomainError);
  CHECK_THROWS(schottky_so_m1<double>(1, axes, {4.0, 4.0}));
  // Offsets move the axes; the lengths survive.
  auto shifted = schottky_so_m1<double>(2, {{0.0, 0.5}, {M_PI / 2, -0.3}}, {5.0, 6.0});
  CHECK(lambda1<double>(shifted.generator(0)) == Approx(5.0).epsilon(1e-12));
  CHECK(lambda1<double>(shifted.generator(1)) == Approx(6.0).epsilon(1e-12));
}

TEST_CASE("block embedding", "[repbuilder]") {
  auto rho0 = fx::schottky21();
  auto rho = embed_block(rho0, QSpace(2, 2));
  for (int i = 0; i < 2; ++i) {
    const auto& g = rho.generator(i);
    CHECK((g.col(3) - fx::unit(4, 3)).norm() == 0.0);
    CHECK((g.row(3).transpose() - fx::unit(4, 3)).norm() == 0.0);
    CHECK(lambda1<double>(g) == Approx(lambda1<double>(rho0.generator(i))).epsilon(1e-12));
    CHECK(form_defect<double>(rho.space(), g) < 1e-10);
  }
  auto big = embed_block(rho0, QSpace(3, 2));
  CHECK((big.generator(0).col(0) - fx::unit(5, 0)).norm() == 0.0);
  CHECK_THROWS_AS(embed_block(rho0, QSpace(1, 3)), DomainError);
  auto rep = gap_report(rho, TauFrame<double>::standard(rho.space()), 8);
  CHECK(rep.alpha > 0.0);
  CHECK(rep.anosov);
}

TEST_CASE("deformations", "[repbuilder]") {
  auto rho = fx::reference22();
  auto same = deform(rho, 0.0, 1);
  for (int i = 0; i < 2; ++i) CHECK(same.generator(i) == rho.generator(i));
  auto d1 = deform(rho, 1e-3, 42), d2 = deform(rho, 1e-3, 42);
  for (int i = 0; i < 2; ++i) {
    CHECK(d1.generator(i) == d2.generator(i));
    // Entries grow like e^{l}, so compare relative to the generator's size.
    double rel = (d1.generator(i) - rho.generator(i)).cwiseAbs().maxCoeff() / rho.generator(i).cwiseAbs().maxCoeff();
    CHECK(rel < 1e-2);
    CHECK(form_defect<double>(rho.space(), d1.generator(i)) < 1e-10);
  }
  CHECK(gap_report(d1, TauFrame<double>::standard(rho.space()), 8).alpha > 0.0);
  CHECK_THROWS(deform(rho, -1.0, 1));
}

TEST_CASE("evaluation and cache", "[repbuilder]") {
  auto rho = fx::reference22();
  CHECK(rho.evaluate(Word{}) == Mat<double>::Identity(4, 4));
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Word x = fx::random_word(rng, 2, 7), y = fx::random_word(rng, 2, 7), z = fx::random_word(rng, 2, 4);
    Mat<double> gx = rho.evaluate(x);
    // Cancellation in g g^{-1} costs eps ‖g‖ ‖g^{-1}‖; single letters meet the absolute bound.
    Mat<double> gxi = rho.evaluate(inverse(x));
    double err = (gx * gxi - Mat<double>::Identity(4, 4)).norm();
    CHECK(err / (gx.norm() * gxi.norm()) < 1e-14);
    if (x.size() <= 1) CHECK(err < 1e-9);
    Mat<double> direct = Mat<double>::Identity(4, 4);
    Word xy = multiply(x, y);
    for (Letter l : xy.letters()) direct = direct * rho.letter_matrix(l);
    Mat<double> gy = rho.evaluate(y), gz = rho.evaluate(z);
    const double scale = gx.norm() * gy.norm() * std::max(1.0, gz.norm());
    CHECK((rho.evaluate(xy) - gx * gy).norm() / scale < 1e-13);
    CHECK(detail::rel_diff<double>(rho.evaluate(xy), direct) < 1e-10);
    CHECK(((gx * gy) * gz - gx * (gy * gz)).norm() / scale < 1e-13);
    CHECK(form_defect<double>(rho.space(), gx) / std::max(1.0, gx.squaredNorm()) < 1e-10);
    // lambda_1 is a class function. Conjugating by a rotation keeps the matrix
    // well conditioned; a long conjugator does not, in double precision.
    if (x.size() >= 2 && is_cyclically_reduced(x.letters())) {
      std::vector<Letter> rot(x.letters().begin() + 1, x.letters().end());
      rot.push_back(x.letters().front());
      CHECK(lambda1<double>(rho.evaluate(Word::from_reduced(rot))) ==
            Approx(lambda1<double>(gx)).epsilon(1e-8).margin(1e-8));
    }
  }
  CHECK(rho.cache_size() > 0);
}

TEST_CASE("sphere blocks match word evaluation", "[repbuilder]") {
  auto rho = fx::reference22();
  std::size_t total = 0;
  scan_spheres(rho, 5, 2, [&](const SphereBlock<double>& b) {
    CHECK(b.size() == sphere_size(2, b.L));
    auto words = sphere(2, b.L);
    for (std::size_t i = 0; i < b.size(); ++i) {
      REQUIRE(b.word(i) == words[i]);
      CHECK(detail::rel_diff<double>(Mat<double>(b.matrix(i)), rho.evaluate(words[i])) < 1e-12);
    }
    total += b.size();
  });
  CHECK(total == ball_size(2, 5));
}

TEST_CASE("gap report", "[repbuilder]") {
  auto rho = embed_block(fx::schottky21(4.0, 4.0), QSpace(2, 2));
  auto rep = gap_report(rho, TauFrame<double>::standard(rho.space()), 8);
  REQUIRE(rep.perLength.size() == 8);
  CHECK(rep.perLength[0].minGap == Approx(4.0).epsilon(1e-10));
  for (std::size_t i = 1; i < rep.perLength.size(); ++i)
    CHECK(rep.perLength[i].minGap >= rep.perLength[i - 1].minGap - 1e-9);
  for (const auto& e : rep.perLength) {
    auto a = singular_values_tau<double>(rho.evaluate(e.witness), TauFrame<double>::standard(rho.space()));
    CHECK(a[0] - a[1] == Approx(e.minGap).epsilon(1e-9));
  }
  CHECK(rep.alpha > 0);

  Representation<double> trivial(QSpace(2, 2), {Mat<double>::Identity(4, 4), Mat<double>::Identity(4, 4)});
  auto none = gap_report(trivial, TauFrame<double>::standard(trivial.space()), 4);
  CHECK(none.alpha == 0.0);
  CHECK_FALSE(none.anosov);
  CHECK_THROWS(gap_report(rho, TauFrame<double>::standard(rho.space()), 1));
}

TEST_CASE("limit set samples", "[repbuilder]") {
  auto rho = fx::reference22();
  QSpace sp = rho.space();
  auto tau = TauFrame<double>::standard(sp);
  auto smp = limit_set_sample(rho, tau, 8);
  CHECK(smp.size() == sphere_size(2, 8));
  for (const auto& s : smp) {
    const auto& x = s.xi.rep();
    CHECK(std::abs(form_eval<double>(sp, x, x)) < 1e-6);
    // eta is the form-orthogonal hyperplane of xi.
    ProjHyperplane<double> perp(sp.lower<double>(x));
    double r = std::min((perp.covector() - s.eta.covector()).norm(), (perp.covector() + s.eta.covector()).norm());
    CHECK(r < 1e-6);
  }
  // U_1 of powers converges to the attracting eigenline.
  Word w = Word::parse("ab", 2);
  auto eig = proximal_data<double>(rho.evaluate(w));
  REQUIRE(eig);
  double prev = 10;
  for (int n = 1; n <= 4; ++n) {
    Mat<double> g = rho.evaluate(power(w, n));
    Eigen::JacobiSVD<Mat<double>> svd(tau.to_orthonormal(g), Eigen::ComputeFullU);
    ProjPoint<double> u1(Vec<double>(tau.w_inv() * svd.matrixU().col(0)));
    double dist = proj_dist(u1, eig->plus);
    CHECK(dist <= prev);
    prev = dist;
  }
  CHECK(prev < 1e-8);
  CHECK_THROWS_AS(limit_set_sample(rho, tau, 1, 10.0), DomainError);
}
