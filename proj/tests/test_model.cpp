#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "actdet/model.hpp"
#include "actdet/rng.hpp"

using namespace actdet;

namespace {

ScenarioConfig base_config(int dc, int kc, int ac, int m) {
  ScenarioConfig cfg;
  cfg.dc = dc;
  cfg.kc = kc;
  cfg.ac = ac;
  cfg.m = m;
  cfg.sigma2 = 1.0;
  cfg.snr_db_active = 10.0;
  cfg.rng_seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("unit-modulus pilots have unit entries and column norm dc") {
  auto cfg = base_config(4, 12, 3, 8);
  auto rng = RngStream::derive(cfg.rng_seed, StreamKind::Pilots);
  const PilotMatrix pilots = generate_pilots(cfg, rng);
  for (int k = 0; k < cfg.kc; ++k) {
    for (int i = 0; i < cfg.dc; ++i)
      CHECK(std::abs(std::abs(pilots.entries(i, k)) - 1.0) <= 1e-12);
    CHECK(pilots.entries.col(k).squaredNorm() ==
          doctest::Approx(4.0).epsilon(1e-10));
  }
}

TEST_CASE("full-scale pilot codebook keeps the norm invariant") {
  auto cfg = base_config(100, 2000, 200, 1);
  auto rng = RngStream::derive(1, StreamKind::Pilots);
  const PilotMatrix pilots = generate_pilots(cfg, rng);
  REQUIRE(pilots.dc() == 100);
  REQUIRE(pilots.kc() == 2000);
  for (int k = 0; k < cfg.kc; ++k)
    CHECK(pilots.entries.col(k).squaredNorm() ==
          doctest::Approx(100.0).epsilon(1e-10));
}

TEST_CASE("gaussian pilots are rescaled to column norm dc") {
  auto cfg = base_config(8, 50, 5, 4);
  cfg.pilot_kind = PilotKind::ComplexGaussianNormalized;
  auto rng = RngStream::derive(3, StreamKind::Pilots);
  const PilotMatrix pilots = generate_pilots(cfg, rng);
  for (int k = 0; k < cfg.kc; ++k)
    CHECK(pilots.entries.col(k).squaredNorm() ==
          doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("activity pattern: support size, gain level, empty case") {
  SUBCASE("no active users") {
    auto cfg = base_config(4, 20, 0, 4);
    auto rng = RngStream::derive(5, StreamKind::Activity);
    const ActivityPattern p = generate_activity(cfg, rng);
    CHECK(p.support.empty());
    CHECK(p.gamma.norm() == 0.0);
  }
  SUBCASE("10 dB at unit noise gives gamma 10 on the support") {
    auto cfg = base_config(4, 20, 7, 4);
    auto rng = RngStream::derive(6, StreamKind::Activity);
    const ActivityPattern p = generate_activity(cfg, rng);
    REQUIRE(p.support.size() == 7);
    for (int k : p.support) CHECK(p.gamma[k] == doctest::Approx(10.0));
    int positives = 0;
    for (int k = 0; k < cfg.kc; ++k) positives += p.gamma[k] > 0.0;
    CHECK(positives == 7);
    CHECK(std::is_sorted(p.support.begin(), p.support.end()));
  }
  SUBCASE("paper-scale support size") {
    auto cfg = base_config(4, 2000, 200, 4);
    auto rng = RngStream::derive(7, StreamKind::Activity);
    CHECK(generate_activity(cfg, rng).support.size() == 200);
  }
}

TEST_CASE("observation equals the noise when nothing is active") {
  auto cfg = base_config(5, 9, 0, 6);
  auto pilot_rng = RngStream::derive(8, StreamKind::Pilots);
  auto chan_rng = RngStream::derive(8, StreamKind::Channel);
  const PilotMatrix pilots = generate_pilots(cfg, pilot_rng);
  const ChannelMatrix channel = generate_channel(cfg, chan_rng);
  ActivityPattern silent;
  silent.gamma = VectorXd::Zero(cfg.kc);

  auto noise_rng = RngStream::derive(8, StreamKind::Noise);
  const ObservationBlock obs =
      synthesize_observation(pilots, silent, channel, cfg, noise_rng);

  auto noise_replay = RngStream::derive(8, StreamKind::Noise);
  const double sd = std::sqrt(cfg.sigma2);
  for (Eigen::Index j = 0; j < obs.y.cols(); ++j)
    for (Eigen::Index i = 0; i < obs.y.rows(); ++i)
      CHECK(obs.y(i, j) == sd * noise_replay.cnormal());
}

TEST_CASE("single-user observation matches the rank-one formula") {
  auto cfg = base_config(4, 1, 1, 3);
  auto pilot_rng = RngStream::derive(9, StreamKind::Pilots);
  auto chan_rng = RngStream::derive(9, StreamKind::Channel);
  const PilotMatrix pilots = generate_pilots(cfg, pilot_rng);
  const ChannelMatrix channel = generate_channel(cfg, chan_rng);
  ActivityPattern one;
  one.gamma = VectorXd::Constant(1, 2.5);
  one.support = {0};

  auto noise_rng = RngStream::derive(9, StreamKind::Noise);
  const ObservationBlock obs =
      synthesize_observation(pilots, one, channel, cfg, noise_rng);

  auto noise_replay = RngStream::derive(9, StreamKind::Noise);
  const double sd = std::sqrt(cfg.sigma2);
  MatrixXcd expected = std::sqrt(2.5) * pilots.entries.col(0) * channel.entries.row(0);
  for (Eigen::Index j = 0; j < expected.cols(); ++j)
    for (Eigen::Index i = 0; i < expected.rows(); ++i)
      expected(i, j) += sd * noise_replay.cnormal();
  CHECK((obs.y - expected).cwiseAbs().maxCoeff() <= 1e-13 * expected.norm());
}

TEST_CASE("observation matches the per-dimension sum over users") {
  auto s = testing::make_scenario(3, 4, 2, 2, 10);

  auto noise_replay = RngStream::derive(10, StreamKind::Noise);
  const double sd = std::sqrt(s.cfg.sigma2);
  MatrixXcd expected = MatrixXcd::Zero(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 4; ++k)
      expected.row(i) += std::sqrt(s.activity.gamma[k]) * s.pilots.entries(i, k) *
                         s.channel.entries.row(k);
  for (Eigen::Index j = 0; j < expected.cols(); ++j)
    for (Eigen::Index i = 0; i < expected.rows(); ++i)
      expected(i, j) += sd * noise_replay.cnormal();

  CHECK((s.obs.y - expected).cwiseAbs().maxCoeff() <=
        1e-12 * std::max(1.0, expected.norm()));
}

TEST_CASE("true covariance: noise floor, trace, rank-one sum oracle") {
  SUBCASE("all-silent gives sigma2 I") {
    auto cfg = base_config(5, 8, 0, 4);
    cfg.sigma2 = 0.7;
    auto rng = RngStream::derive(12, StreamKind::Pilots);
    const PilotMatrix pilots = generate_pilots(cfg, rng);
    ActivityPattern silent;
    silent.gamma = VectorXd::Zero(cfg.kc);
    const SampleCovariance cov = true_covariance(pilots, silent, cfg.sigma2);
    CHECK((cov.sigma_hat - 0.7 * MatrixXcd::Identity(5, 5)).norm() <= 1e-14);
  }
  SUBCASE("single active unit-modulus user, trace = gamma dc + sigma2 dc") {
    auto cfg = base_config(2, 1, 1, 4);
    auto rng = RngStream::derive(13, StreamKind::Pilots);
    const PilotMatrix pilots = generate_pilots(cfg, rng);
    ActivityPattern one;
    one.gamma = VectorXd::Constant(1, 1.0);
    one.support = {0};
    const SampleCovariance cov = true_covariance(pilots, one, 1.0);
    CHECK(cov.sigma_hat.trace().real() == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("matches the explicit rank-one sum") {
    auto s = testing::make_scenario(6, 15, 4, 8, 14);
    const SampleCovariance cov = true_covariance(s.pilots, s.activity, s.cfg.sigma2);
    MatrixXcd expected = s.cfg.sigma2 * MatrixXcd::Identity(6, 6);
    for (int k = 0; k < 15; ++k)
      expected += s.activity.gamma[k] * s.pilots.entries.col(k) *
                  s.pilots.entries.col(k).adjoint();
    CHECK((cov.sigma_hat - expected).norm() <= 1e-12 * expected.norm());
    CHECK_NOTHROW(validate_covariance(cov.sigma_hat));
  }
}

TEST_CASE("sample covariance basics") {
  SUBCASE("zero observation") {
    ObservationBlock obs;
    obs.y = MatrixXcd::Zero(4, 6);
    CHECK(sample_covariance(obs).sigma_hat.norm() == 0.0);
  }
  SUBCASE("single column gives the outer product") {
    ObservationBlock obs;
    obs.y.resize(3, 1);
    obs.y << cplx(1, 2), cplx(0, -1), cplx(2, 0);
    const SampleCovariance cov = sample_covariance(obs);
    const MatrixXcd expected = obs.y.col(0) * obs.y.col(0).adjoint();
    CHECK((cov.sigma_hat - expected).norm() <= 1e-14 * expected.norm());
  }
  SUBCASE("result is Hermitian PSD") {
    auto s = testing::make_scenario(6, 20, 5, 32, 15);
    CHECK_NOTHROW(validate_covariance(s.sigma_hat.sigma_hat));
  }
}

TEST_CASE("sample covariance concentrates at the predicted rate") {
  // White data, identity covariance: predicted deviation dc/sqrt(m) = 1.
  auto cfg = base_config(20, 2, 0, 400);
  auto pilot_rng = RngStream::derive(16, StreamKind::Pilots);
  const PilotMatrix pilots = generate_pilots(cfg, pilot_rng);
  ActivityPattern silent;
  silent.gamma = VectorXd::Zero(cfg.kc);
  const MatrixXcd identity = MatrixXcd::Identity(20, 20);

  double sum = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto chan_rng = RngStream::derive(16, StreamKind::Channel, t);
    auto noise_rng = RngStream::derive(16, StreamKind::Noise, t);
    const ChannelMatrix channel = generate_channel(cfg, chan_rng);
    const ObservationBlock obs =
        synthesize_observation(pilots, silent, channel, cfg, noise_rng);
    sum += (sample_covariance(obs).sigma_hat - identity).norm();
  }
  const double ratio = (sum / trials) / 1.0;
  CHECK(ratio >= 0.85);
  CHECK(ratio <= 1.15);
}

TEST_CASE("ula power profile wraps and sums to m") {
  const VectorXd beta = ula_power_profile(240, 120, 200);
  CHECK(beta.sum() == 240.0);
  CHECK(beta[200] == 2.0);
  CHECK(beta[(200 + 119) % 240] == 2.0);
  CHECK(beta[(200 + 120) % 240] == 0.0);
  int nonzero = 0;
  for (int i = 0; i < 240; ++i) nonzero += beta[i] != 0.0;
  CHECK(nonzero == 120);
}

TEST_CASE("channel rows carry the right average energy") {
  SUBCASE("spatially white") {
    auto cfg = base_config(2, 100, 0, 500);
    auto rng = RngStream::derive(17, StreamKind::Channel);
    const ChannelMatrix channel = generate_channel(cfg, rng);
    const double mean_energy = channel.entries.rowwise().squaredNorm().mean();
    CHECK(mean_energy / cfg.m == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("ula block") {
    auto cfg = base_config(2, 1000, 0, 200);
    cfg.channel_kind = ChannelKind::UlaBlock;
    cfg.m_eff_fraction = 0.5;
    auto rng = RngStream::derive(18, StreamKind::Channel);
    const ChannelMatrix channel = generate_channel(cfg, rng);
    const double mean_energy = channel.entries.rowwise().squaredNorm().mean();
    CHECK(mean_energy / cfg.m == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("identical seeds give bit-identical draws") {
  auto make = [](std::uint64_t seed) { return testing::make_scenario(6, 18, 4, 10, seed); };
  const auto a = make(21);
  const auto b = make(21);
  CHECK(hash_matrix(a.pilots.entries) == hash_matrix(b.pilots.entries));
  CHECK(hash_matrix(a.channel.entries) == hash_matrix(b.channel.entries));
  CHECK(hash_matrix(a.obs.y) == hash_matrix(b.obs.y));
  CHECK(a.activity.support == b.activity.support);
  CHECK((a.activity.gamma.array() == b.activity.gamma.array()).all());
  const auto c = make(22);
  CHECK(hash_matrix(a.obs.y) != hash_matrix(c.obs.y));
}

TEST_CASE("snr_of_user") {
  CHECK(snr_of_user(2.0, 2.0) == doctest::Approx(1.0));
  CHECK(snr_of_user(10.0, 1.0) == doctest::Approx(10.0));
  CHECK(snr_of_user(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(snr_of_user(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(snr_of_user(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("config validation rejects bad setups") {
  auto cfg = base_config(4, 10, 3, 8);
  CHECK_NOTHROW(cfg.validate());
  cfg.ac = 11;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(4, 10, 3, 8);
  cfg.sigma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(0, 10, 3, 8);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(4, 10, 3, 8);
  cfg.channel_kind = ChannelKind::UlaBlock;
  cfg.m_eff_fraction = 0.01;  // rounds to zero effective antennas
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.m_eff_fraction = 0.5;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.m_eff() == 4);
}
