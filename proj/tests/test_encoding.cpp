#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "tabembed/encoding.hpp"

using namespace tabembed;

namespace {

BinLayout uniform_bins_0_4() {
  BinLayout layout;
  layout.boundaries.resize(5);
  layout.boundaries << 0, 1, 2, 3, 4;
  return layout;
}

}  // namespace

TEST_CASE("ple_encode on canonical cases") {
  const BinLayout bins = uniform_bins_0_4();
  const Vector mid = ple_encode(2.5, bins);
  CHECK(mid[0] == 1.0);
  CHECK(mid[1] == 1.0);
  CHECK(mid[2] == 0.5);
  CHECK(mid[3] == 0.0);

  const Vector below = ple_encode(-1.0, bins);
  CHECK(below[0] == -1.0);
  CHECK(below[1] == 0.0);
  CHECK(below[2] == 0.0);
  CHECK(below[3] == 0.0);

  const Vector above = ple_encode(5.0, bins);
  CHECK(above[0] == 1.0);
  CHECK(above[1] == 1.0);
  CHECK(above[2] == 1.0);
  CHECK(above[3] == 2.0);
}

TEST_CASE("ple_encode matches the clamped-ratio oracle on random cases") {
  Rng rng(3);
  std::uniform_real_distribution<double> x_dist(-12.0, 12.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const BinLayout bins = oracles::random_bins(rng);
    const double x = x_dist(rng);
    const Vector got = ple_encode(x, bins);
    const Vector want = oracles::ple_oracle(x, bins);
    for (Index t = 0; t < got.size(); ++t)
      REQUIRE(std::fabs(got[t] - want[t]) <= 1e-12);
  }
}

TEST_CASE("binary_encode thresholds the PLE pattern") {
  const BinLayout bins = uniform_bins_0_4();
  CHECK(binary_encode(2.5, bins).isApprox(Vector{{1, 1, 1, 0}}));
  CHECK(binary_encode(-1.0, bins).isZero());
  CHECK(binary_encode(0.0, bins).isApprox(Vector{{1, 0, 0, 0}}));
  CHECK(binary_encode(9.0, bins).isApprox(Vector{{1, 1, 1, 1}}));
}

TEST_CASE("binary_encode matches its oracle on random cases") {
  Rng rng(5);
  std::uniform_real_distribution<double> x_dist(-12.0, 12.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const BinLayout bins = oracles::random_bins(rng);
    const double x = x_dist(rng);
    REQUIRE((binary_encode(x, bins) - oracles::binary_oracle(x, bins)).cwiseAbs().maxCoeff() <=
            1e-12);
  }
}

TEST_CASE("ple and binary encodings are componentwise monotone in x") {
  Rng rng(9);
  std::uniform_real_distribution<double> x_dist(-12.0, 12.0);
  for (int rep = 0; rep < 2000; ++rep) {
    const BinLayout bins = oracles::random_bins(rng);
    double a = x_dist(rng), b = x_dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(((ple_encode(b, bins) - ple_encode(a, bins)).array() >= 0.0).all());
    CHECK(((binary_encode(b, bins) - binary_encode(a, bins)).array() >= 0.0).all());
  }
}

TEST_CASE("T=1 PLE is the invertible affine image of the scalar") {
  BinLayout bins;
  bins.boundaries.resize(2);
  bins.boundaries << 2.0, 6.0;
  for (double x : {-3.0, 2.0, 4.0, 6.0, 11.0}) {
    const Vector e = ple_encode(x, bins);
    REQUIRE(e.size() == 1);
    CHECK(e[0] == doctest::Approx((x - 2.0) / 4.0));
    CHECK(2.0 + 4.0 * e[0] == doctest::Approx(x));  // invertible
  }
}

TEST_CASE("ple_encode is exactly invariant under matched affine transforms") {
  Rng rng(21);
  std::uniform_real_distribution<double> x_dist(-10.0, 10.0);
  for (int rep = 0; rep < 500; ++rep) {
    const BinLayout bins = oracles::random_bins(rng);
    // power-of-two scaling keeps every intermediate value exactly
    // representable, so the encodings agree bitwise
    const double a = 4.0;
    BinLayout mapped = bins;
    mapped.boundaries = (a * mapped.boundaries.array()).matrix();
    const double x = x_dist(rng);
    const Vector orig = ple_encode(x, bins);
    const Vector trans = ple_encode(a * x, mapped);
    for (Index t = 0; t < orig.size(); ++t) CHECK(orig[t] == trans[t]);

    // a general shift is only affinely exact up to rounding
    BinLayout shifted = bins;
    shifted.boundaries = (shifted.boundaries.array() - 0.5).matrix();
    const Vector shifted_enc = ple_encode(x - 0.5, shifted);
    CHECK((orig - shifted_enc).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("one-blob kernel values on uniform bins") {
  const BinLayout bins = uniform_bins_0_4();
  const Vector e = one_blob_encode(2.5, bins, 1.0);
  // x_hat = 0.625, exactly the center of component 3
  CHECK(e[2] == doctest::Approx(1.0));
  // component 2 center is 0.375, kernel width 1/4
  CHECK(e[1] == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("one-blob tends to a bin indicator as gamma grows") {
  const BinLayout bins = uniform_bins_0_4();
  const Vector e = one_blob_encode(2.5, bins, 8.0);
  CHECK(e[2] == doctest::Approx(1.0));
  for (Index t : {0, 1, 3}) CHECK(e[t] < 1e-10);
}

TEST_CASE("one-blob is exactly 1 at a bin center for any gamma") {
  const BinLayout bins = uniform_bins_0_4();
  for (double gamma : {0.25, 1.0, 3.0})
    CHECK(one_blob_encode(1.5, bins, gamma)[1] == 1.0);  // center of bin 2
}

TEST_CASE("periodic_map basics") {
  PeriodicCoefficients coeffs{Vector{{1.0}}, 1.0};
  const Vector at_zero = periodic_map(0.0, coeffs);
  CHECK(at_zero[0] == 0.0);
  CHECK(at_zero[1] == 1.0);

  const Vector at_half = periodic_map(0.5, coeffs);
  CHECK(std::fabs(at_half[0] - 0.0) <= 1e-12);
  CHECK(std::fabs(at_half[1] - (-1.0)) <= 1e-12);
}

TEST_CASE("periodic_map output lies in [-1, 1]") {
  Rng rng(31);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int rep = 0; rep < 1000; ++rep) {
    PeriodicCoefficients coeffs{Vector{{normal(rng), normal(rng), normal(rng)}}, 1.0};
    const Vector out = periodic_map(normal(rng), coeffs);
    CHECK(out.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("init_periodic determinism and scale") {
  Rng a(42), b(42);
  const auto ca = init_periodic(16, 0.5, a);
  const auto cb = init_periodic(16, 0.5, b);
  CHECK(ca.c == cb.c);

  CHECK_THROWS_AS(init_periodic(4, 0.0, a), std::invalid_argument);
  Rng tiny_rng(1);
  const auto tiny = init_periodic(8, 1e-9, tiny_rng);
  CHECK(tiny.c.cwiseAbs().maxCoeff() < 1e-7);

  Rng big_rng(7);
  const auto big = init_periodic(10000, 2.0, big_rng);
  const double mean = big.c.mean();
  const double sd = std::sqrt((big.c.array() - mean).square().sum() / 10000.0);
  CHECK(sd > 1.9);
  CHECK(sd < 2.1);
}

TEST_CASE("mixed fourier features") {
  const Matrix B = Matrix::Identity(3, 3);
  const Vector zero = Vector::Zero(3);
  const Vector at_zero = mixed_fourier_features(zero, B);
  CHECK(at_zero.head(3).isZero());
  CHECK(at_zero.tail(3).isApprox(Vector::Ones(3)));

  // identity B reduces to per-feature periodic_map with c = 1
  const Vector x{{0.3, -0.7, 1.1}};
  const Vector mixed = mixed_fourier_features(x, B);
  PeriodicCoefficients unit{Vector{{1.0}}, 1.0};
  for (Index i = 0; i < 3; ++i) {
    const Vector single = periodic_map(x[i], unit);
    CHECK(mixed[i] == doctest::Approx(single[0]));
    CHECK(mixed[3 + i] == doctest::Approx(single[1]));
  }

  CHECK_THROWS_AS(mixed_fourier_features(Vector::Zero(2), B), std::invalid_argument);
}

TEST_CASE("encoded matrix CSV dump has one header and aligned rows") {
  Matrix X(3, 1);
  X << 0.5, 1.5, 2.5;
  BinLayout bins = uniform_bins_0_4();
  bins.feature_index = 0;
  const EncodedMatrix enc = encode_columns(X, {bins}, EncodeKind::Ple);
  std::ostringstream ss;
  enc.dump_csv(ss);
  std::istringstream lines(ss.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "f0_b0,f0_b1,f0_b2,f0_b3");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
}
