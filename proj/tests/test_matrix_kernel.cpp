#include "singstab/matrix_kernel.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace singstab;

TEST_CASE("closed-form spectra for 1x1 and 2x2") {
  const Spectrum s1 = spectrum(Matrix{{5.0}});
  CHECK(s1.eigenvalues.size() == 1);
  CHECK(s1.eigenvalues(0) == std::complex<double>(5.0, 0.0));
  CHECK(s1.abscissa == 5.0);
  CHECK(s1.radius == 5.0);

  // rotation generator: eigenvalues +-i
  const Spectrum rot = spectrum(Matrix{{0.0, 1.0}, {-1.0, 0.0}});
  CHECK(rot.abscissa == 0.0);
  CHECK(rot.radius == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(rot.eigenvalues(0).imag()) == doctest::Approx(1.0));

  // distinct real roots: tr = 0, det = -4 gives +-2 exactly
  const Spectrum hyp = spectrum(Matrix{{0.0, 1.0}, {4.0, 0.0}});
  CHECK(hyp.radius == 2.0);
  CHECK(hyp.abscissa == 2.0);

  // defective repeated root stays exact
  const Spectrum rep = spectrum(Matrix{{2.0, 1.0}, {0.0, 2.0}});
  CHECK(rep.eigenvalues(0).real() == 2.0);
  CHECK(rep.eigenvalues(1).real() == 2.0);
  CHECK(rep.eigenvalues(0).imag() == 0.0);

  CHECK(spectral_abscissa(Matrix{{-3.0, 0.0}, {0.0, -1.0}}) == -1.0);
  CHECK(spectral_radius(Matrix{{-3.0, 0.0}, {0.0, -1.0}}) == 3.0);
}

TEST_CASE("dense solver path reproduces a known diagonalizable spectrum") {
  std::mt19937_64 rng(11);
  const Matrix d = Vector{{-3.0, -1.0, 2.0, 5.0}}.asDiagonal();
  const Matrix q =
      Matrix::Identity(4, 4) + oracles::rand_matrix(rng, 4, 4, 0.2);
  const Matrix m = q * d * q.inverse();
  const Spectrum s = spectrum(m);
  REQUIRE(s.eigenvalues.size() == 4);
  std::vector<double> re;
  for (int i = 0; i < 4; ++i) re.push_back(s.eigenvalues(i).real());
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(re[1] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(re[2] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(re[3] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.abscissa == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.radius == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(spectrum(Matrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(spectrum(Matrix()), DimensionError);
}

TEST_CASE("operator norm is the largest singular value") {
  CHECK(operator_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}) ==
        doctest::Approx(4.0).epsilon(1e-14));
  const double c = std::cos(0.7), s = std::sin(0.7);
  CHECK(operator_norm(Matrix{{c, -s}, {s, c}}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // rank-1 outer product: ||u v^T|| = ||u|| ||v||
  const Vector u{{1.0, 2.0, 2.0}};
  const Vector v{{3.0, 4.0}};
  CHECK(operator_norm(u * v.transpose()) ==
        doctest::Approx(15.0).epsilon(1e-13));
  CHECK(operator_norm(Matrix::Zero(3, 2)) == 0.0);
  CHECK(operator_norm(Matrix()) == 0.0);
}

TEST_CASE("matrix exponential matches an independent Taylor oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const Matrix m = oracles::rand_matrix(rng, n, n, 1.0);
    for (double t : {0.3, 1.7}) {
      CHECK(oracles::approx_equal(mat_exp(m, t), oracles::taylor_exp(t * m),
                                  1e-12));
    }
  }
}

TEST_CASE("matrix exponential special cases") {
  // nilpotent: series terminates, e^N = I + N
  const Matrix n{{0.0, 1.0}, {0.0, 0.0}};
  CHECK((mat_exp(n, 1.0) - Matrix{{1.0, 1.0}, {0.0, 1.0}}).norm() <= 1e-14);
  // rotation by pi
  const Matrix j{{0.0, -1.0}, {1.0, 0.0}};
  CHECK(oracles::approx_equal(mat_exp(j, M_PI),
                              -Matrix::Identity(2, 2), 1e-13));
  // t = 0 is the identity
  std::mt19937_64 rng(5);
  const Matrix m = oracles::rand_matrix(rng, 3, 3, 2.0);
  CHECK((mat_exp(m, 0.0) - Matrix::Identity(3, 3)).norm() <= 1e-15);
  // scalar case
  CHECK(mat_exp(Matrix{{-2.0}}, 1.5)(0, 0) ==
        doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
}

TEST_CASE("hurwitz predicate with margin") {
  const Matrix m{{-1.0, 0.0}, {0.0, -2.0}};
  CHECK(is_hurwitz(m));
  CHECK(is_hurwitz(m, 0.5));
  CHECK_FALSE(is_hurwitz(m, 1.0));  // abscissa -1 is not < -1
  CHECK_FALSE(is_hurwitz(Matrix{{0.0, 1.0}, {-1.0, 0.0}}));
  CHECK_FALSE(is_hurwitz(Matrix::Zero(2, 2)));
}

TEST_CASE("inversion with condition estimate") {
  const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  const Inversion inv = invert(m);
  CHECK(oracles::approx_equal(inv.inverse,
                              Matrix{{-2.0, 1.0}, {1.5, -0.5}}, 1e-14));
  CHECK((m * inv.inverse - Matrix::Identity(2, 2)).norm() <= 1e-14);

  const Inversion diag = invert(Matrix{{10.0, 0.0}, {0.0, 0.1}});
  CHECK(diag.condition == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(invert(Matrix{{1.0, 2.0}, {2.0, 4.0}}),
                  SingularMatrixError);
  // custom relative tolerance can reject invertible but ill-scaled input
  CHECK_THROWS_AS(invert(Matrix{{1.0, 0.0}, {0.0, 1e-8}}, 1e-6),
                  SingularMatrixError);
  CHECK_NOTHROW(invert(Matrix{{1.0, 0.0}, {0.0, 1e-8}}));
}

TEST_CASE("block partition, diag, and corner embeddings") {
  Matrix m(3, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const BlockSplit s = block_partition(m, 1);
  CHECK(s.a == Matrix{{1.0}});
  CHECK(s.b == Matrix{{2.0, 3.0}});
  CHECK(s.c == Matrix{{4.0}, {7.0}});
  CHECK((s.d == Matrix{{5.0, 6.0}, {8.0, 9.0}}));

  // degenerate splits keep empty blocks
  CHECK(block_partition(m, 0).a.rows() == 0);
  CHECK(block_partition(m, 3).d.rows() == 0);
  CHECK_THROWS_AS(block_partition(m, -1), DimensionError);
  CHECK_THROWS_AS(block_partition(m, 4), DimensionError);

  const Matrix bd = block_diag(Matrix{{1.0}}, Matrix{{2.0, 0.0}, {0.0, 3.0}});
  CHECK(bd.rows() == 3);
  CHECK(bd(0, 0) == 1.0);
  CHECK(bd(1, 1) == 2.0);
  CHECK(bd(2, 2) == 3.0);
  CHECK(bd(0, 1) == 0.0);

  const Matrix e = embed_top_left(Matrix{{7.0}}, 3);
  CHECK(e(0, 0) == 7.0);
  CHECK(e.norm() == 7.0);
  CHECK_THROWS_AS(embed_top_left(Matrix::Ones(4, 4), 3), DimensionError);

  CHECK(top_left(m, 2, 1) == Matrix{{1.0}, {4.0}});
  CHECK_THROWS_AS(top_left(m, 4, 1), DimensionError);
}

TEST_CASE("scaled products track log norms without under- or overflow") {
  using SM = ScaledMatrix;
  SM p = SM::from(Matrix{{2.0, 0.0}, {0.0, 1.0}});
  CHECK(p.log_norm2() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(p.log_radius() == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // 400 factors of 1e-3 I would underflow to 0 naively
  SM tiny = SM::from(1e-3 * Matrix::Identity(2, 2));
  for (int i = 0; i < 399; ++i) tiny.apply_left(1e-3 * Matrix::Identity(2, 2));
  CHECK_FALSE(tiny.zero);
  CHECK(tiny.log_norm2() ==
        doctest::Approx(400.0 * std::log(1e-3)).epsilon(1e-12));
  CHECK(tiny.log_radius() ==
        doctest::Approx(400.0 * std::log(1e-3)).epsilon(1e-12));

  // 400 factors of 1e3 I would overflow naively
  SM big = SM::from(1e3 * Matrix::Identity(2, 2));
  for (int i = 0; i < 399; ++i) big.apply_left(1e3 * Matrix::Identity(2, 2));
  CHECK(big.log_norm2() ==
        doctest::Approx(400.0 * std::log(1e3)).epsilon(1e-12));

  // exact zero product absorbs
  SM z = SM::from(Matrix::Zero(2, 2));
  CHECK(z.zero);
  CHECK(z.log_norm2() == -std::numeric_limits<double>::infinity());
  CHECK(z.log_radius() == -std::numeric_limits<double>::infinity());
  z.apply_left(Matrix::Ones(2, 2));
  CHECK(z.zero);

  // rank-1 products: radius of [0 1; 0 0] is zero but norm is not
  SM nil = SM::from(Matrix{{0.0, 1.0}, {0.0, 0.0}});
  CHECK_FALSE(nil.zero);
  CHECK(nil.log_norm2() == 0.0);
  CHECK(nil.log_radius() == -std::numeric_limits<double>::infinity());

  // benign short products are bit-identical to naive multiplication
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix b{{0.5, -1.0}, {2.0, 0.25}};
  SM ab = SM::from(a);
  ab.apply_left(b);
  CHECK(ab.log_scale == 0.0);
  CHECK(ab.value == b * a);

  // non-finite input is rejected
  SM bad = SM::from(Matrix::Ones(1, 1));
  Matrix nan_m(1, 1);
  nan_m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.apply_left(nan_m), std::runtime_error);
}
