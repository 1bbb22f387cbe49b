#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "icjm/model.hpp"
#include "icjm/rng.hpp"
#include "test_helpers.hpp"

using namespace icjm;

TEST_CASE("trajectory value and slope") {
  ModelSpec spec = testing::default_spec();
  Eigen::VectorXd none(0);
  Eigen::VectorXd beta(2), b(2);

  beta << 14.0, 0.17;
  b << 0.0, 0.0;
  auto y = trajectory(spec, 0.0, none, beta, b);
  CHECK(y.value == doctest::Approx(14.0).epsilon(1e-14));
  CHECK(y.slope == doctest::Approx(0.17).epsilon(1e-14));

  beta << 0.0, 0.0;
  y = trajectory(spec, 3.7, none, beta, b);
  CHECK(y.value == 0.0);
  CHECK(y.slope == 0.0);

  beta << 1.0, 2.0;
  b << 0.5, -1.0;
  y = trajectory(spec, 1.5, none, beta, b);
  CHECK(y.value == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(y.slope == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("trajectory slope equals finite differences") {
  ModelSpec spec = testing::default_spec();
  Eigen::VectorXd none(0);
  Eigen::VectorXd beta(2), b(2);
  beta << 2.0, -0.3;
  b << 0.4, 1.1;
  // linear designs: exact for any h
  for (double h : {0.5, 0.01}) {
    for (double t : {0.0, 0.8, 2.0}) {
      const double fd = (trajectory(spec, t + h, none, beta, b).value -
                         trajectory(spec, t - h, none, beta, b).value) /
                        (2 * h);
      CHECK(trajectory(spec, t, none, beta, b).slope ==
            doctest::Approx(fd).epsilon(1e-12));
    }
  }
  // quadratic fixed design: O(h^2), vanishing error in h
  ModelSpec spec3 = spec;
  spec3.n_fixed = 3;
  Eigen::VectorXd beta3(3);
  beta3 << 2.0, -0.3, 0.7;
  const double t = 0.9, h = 1e-5;
  const double fd = (trajectory(spec3, t + h, none, beta3, b).value -
                     trajectory(spec3, t - h, none, beta3, b).value) /
                    (2 * h);
  CHECK(trajectory(spec3, t, none, beta3, b).slope ==
        doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("trajectory rejects dimension mismatches") {
  ModelSpec spec = testing::default_spec();
  Eigen::VectorXd none(0);
  Eigen::VectorXd beta3 = Eigen::VectorXd::Zero(3), b2 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS(trajectory(spec, 0.0, none, beta3, b2));
  Eigen::VectorXd beta2 = Eigen::VectorXd::Zero(2), b3 = Eigen::VectorXd::Zero(3);
  CHECK_THROWS(trajectory(spec, 0.0, none, beta2, b3));
}

TEST_CASE("residual scales") {
  auto s = residual_scales(0.0, 0.0, 0.0, 0.0);
  CHECK(s.sigma == 1.0);
  CHECK(s.kappa == 1.0);
  // high-precision exp oracle
  s = residual_scales(0.30, -0.23, 0.0, 0.0);
  CHECK(s.sigma == doctest::Approx(double(expl(0.30L))).epsilon(1e-15));
  CHECK(s.sigma == doctest::Approx(1.3499).epsilon(1e-4));
  CHECK(s.kappa == doctest::Approx(double(expl(-0.23L))).epsilon(1e-15));
  CHECK(s.kappa == doctest::Approx(0.7945).epsilon(1e-4));
  // strictly positive, strictly increasing in each argument
  CounterRng rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const double mu = rng.next_uniform(-3, 3), tau = rng.next_uniform(-2, 2);
    const double d = rng.next_uniform(1e-6, 0.5);
    CHECK(residual_scales(mu, 0, tau, 0).sigma > 0.0);
    CHECK(residual_scales(mu + d, 0, tau, 0).sigma >
          residual_scales(mu, 0, tau, 0).sigma);
    CHECK(residual_scales(mu, 0, tau + d, 0).sigma >
          residual_scales(mu, 0, tau, 0).sigma);
  }
}

TEST_CASE("baseline hazard") {
  TransitionSpec w;
  w.family = BaselineFamily::Weibull;
  TransitionParams p;
  p.sqrt_eta = 2.0;
  p.zeta = -4.0;
  CHECK(baseline_hazard(w, p, 1.0) ==
        doctest::Approx(4.0 * std::exp(-4.0)).epsilon(1e-14));
  CHECK(baseline_hazard(w, p, 1.0) == doctest::Approx(0.07326).epsilon(1e-3));

  p.sqrt_eta = 1.0;
  p.zeta = 0.0;
  for (double t : {0.2, 1.0, 7.3}) CHECK(baseline_hazard(w, p, t) == 1.0);

  TransitionSpec e;
  e.family = BaselineFamily::Exponential;
  TransitionParams pe;
  pe.zeta = -2.0;
  for (double t : {0.0, 0.5, 9.0})
    CHECK(baseline_hazard(e, pe, t) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-15));

  p.sqrt_eta = 0.5;  // eta < 1: singular at 0
  CHECK_THROWS(baseline_hazard(w, p, 0.0));
  CHECK_THROWS(baseline_hazard(w, p, -1.0));
}

TEST_CASE("transition hazard") {
  TransitionSpec ts;
  ts.family = BaselineFamily::Weibull;
  TransitionParams p;
  p.sqrt_eta = 1.7;
  p.zeta = -2.5;
  Eigen::VectorXd w0(0);
  TrajectoryPoint y{13.2, 0.4};

  // empty linear predictor reduces to the baseline
  CHECK(transition_hazard(ts, p, 1.3, w0, y, 1.0, 1.0) ==
        doctest::Approx(baseline_hazard(ts, p, 1.3)).epsilon(1e-15));

  // single sigma association
  TransitionParams ps = p;
  ps.a_sigma = 0.5;
  const double sig = std::exp(0.3);
  CHECK(transition_hazard(ts, ps, 1.3, w0, {0, 0}, sig, 1.0) ==
        doctest::Approx(baseline_hazard(ts, p, 1.3) * std::exp(0.5 * sig))
            .epsilon(1e-14));

  // proportional-hazards identity in the covariate
  TransitionSpec tc = ts;
  tc.n_covariates = 1;
  TransitionParams pc = p;
  pc.gamma = Eigen::VectorXd(1);
  pc.gamma << 0.8;
  Eigen::VectorXd wa(1), wb(1);
  wa << 1.0;
  wb << 3.5;
  const double ratio = transition_hazard(tc, pc, 1.3, wb, y, 1.2, 0.9) /
                       transition_hazard(tc, pc, 1.3, wa, y, 1.2, 0.9);
  CHECK(ratio == doctest::Approx(std::exp(0.8 * 2.5)).epsilon(1e-13));

  // log hazard is exactly linear in each association coefficient
  CounterRng rng(17, 3);
  for (int i = 0; i < 50; ++i) {
    TransitionParams pa = p;
    pa.a_value = rng.next_uniform(-0.5, 0.5);
    pa.a_slope = rng.next_uniform(-0.5, 0.5);
    pa.a_sigma = rng.next_uniform(-0.5, 0.5);
    pa.a_kappa = rng.next_uniform(-0.5, 0.5);
    TransitionParams pb = pa;
    const double d = rng.next_uniform(0.1, 1.0);
    pb.a_value += d;
    const double t = rng.next_uniform(0.1, 2.0);
    const double sg = rng.next_uniform(0.5, 2.0), kp = rng.next_uniform(0.5, 2.0);
    TrajectoryPoint yy{rng.next_uniform(5, 20), rng.next_uniform(-1, 1)};
    const double lr = std::log(transition_hazard(ts, pb, t, w0, yy, sg, kp)) -
                      std::log(transition_hazard(ts, pa, t, w0, yy, sg, kp));
    CHECK(lr == doctest::Approx(d * yy.value).epsilon(1e-10));
    CHECK(transition_hazard(ts, pa, t, w0, yy, sg, kp) >= 0.0);
  }
}

TEST_CASE("assemble covariance") {
  CHECK(assemble_covariance(Eigen::MatrixXd::Identity(3, 3)) ==
        Eigen::MatrixXd::Identity(3, 3));

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  const Eigen::MatrixXd dd = assemble_covariance(d);
  CHECK(dd(0, 0) == 4.0);
  CHECK(dd(1, 1) == 9.0);
  CHECK(dd(0, 1) == 0.0);

  // masked b-tau block stays exactly zero
  ModelSpec spec = testing::default_spec();
  ParameterSet p = testing::default_params(spec);
  const Eigen::MatrixXd cov = assemble_covariance(p.chol);
  CHECK(cov.bottomLeftCorner(2, 2) == Eigen::MatrixXd::Zero(2, 2));

  // symmetric PSD on random factors
  CounterRng rng(31, 2);
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c <= r; ++c) L(r, c) = rng.next_uniform(-2, 2);
    const Eigen::MatrixXd cv = assemble_covariance(L);
    CHECK((cv - cv.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cv);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("parameter pack/unpack round trip") {
  for (bool covs : {false, true}) {
    ModelSpec spec = testing::default_spec(covs);
    ParameterSet p = testing::default_params(spec);
    const Eigen::VectorXd flat = p.pack(spec);
    CHECK(flat.size() == ParameterSet::packed_size(spec));
    CHECK(int(parameter_names(spec).size()) == flat.size());
    const ParameterSet q = ParameterSet::unpack(spec, flat);
    CHECK((q.pack(spec) - flat).cwiseAbs().maxCoeff() == 0.0);
    CHECK(q.chol == p.chol);
  }
  // independence mask removes the cross block from the packing
  ModelSpec dep = testing::default_spec();
  dep.independent_effects = false;
  CHECK(ParameterSet::packed_size(dep) ==
        ParameterSet::packed_size(testing::default_spec()) + 4);
}

TEST_CASE("event record invariants") {
  ModelSpec spec = testing::default_spec();
  SubjectData s = testing::make_subject(spec, "ok", 0);
  CHECK_NOTHROW(s.validate());
  SubjectData bad = s;
  bad.event.diagnosis = bad.event.last_healthy - 1.0;
  CHECK_THROWS(bad.validate());
  SubjectData bad2 = s;
  bad2.event.dem = false;
  CHECK_THROWS(bad2.validate());  // diagnosis present without flag
  SubjectData bad3 = s;
  std::swap(bad3.visits[0], bad3.visits[1]);
  CHECK_THROWS(bad3.validate());
}
