#pragma once

#include "actdet/rng.hpp"
#include "actdet/types.hpp"

namespace actdet {

// Draws the dc x kc pilot codebook. Unit-modulus pilots have i.i.d. uniform
// phases (squared column norm dc by construction); Gaussian pilots are drawn
// CN(0,1) entrywise and each column rescaled to squared norm dc.
PilotMatrix generate_pilots(const ScenarioConfig& cfg, RngStream& rng);

// Uniform random ac-subset of the kc users; active entries get the common
// gain sigma2 * 10^(snr_db/10), the rest are exactly zero.
ActivityPattern generate_activity(const ScenarioConfig& cfg, RngStream& rng);

// Spatially white rows h_k ~ CN(0, I_m), or the angular block-sparse ULA
// model h_k = F_m w_k with w_k,i ~ CN(0, beta_i) on a circularly wrapped
// block of m_eff consecutive angles starting at a uniformly random i0.
ChannelMatrix generate_channel(const ScenarioConfig& cfg, RngStream& rng);

// Angular power profile of the ULA model: m/m_eff on the wrapped block
// {i0, ..., i0+m_eff-1 mod m}, zero elsewhere; sums to m.
VectorXd ula_power_profile(int m, int m_eff, int i0);

// Y = A diag(sqrt(gamma)) H + Z with Z entries i.i.d. CN(0, sigma2).
ObservationBlock synthesize_observation(const PilotMatrix& pilots,
                                        const ActivityPattern& activity,
                                        const ChannelMatrix& channel,
                                        const ScenarioConfig& cfg,
                                        RngStream& noise_rng);

// Exact covariance A diag(gamma) A^H + sigma2 I of the columns of Y.
SampleCovariance true_covariance(const PilotMatrix& pilots,
                                 const ActivityPattern& activity,
                                 double sigma2);

// (1/m) Y Y^H.
SampleCovariance sample_covariance(const ObservationBlock& obs);

// gamma_k / sigma2.
double snr_of_user(double gamma_k, double sigma2);

}  // namespace actdet
