#include <omp.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "icjm/exp_kernel.hpp"
#include "icjm/likelihood.hpp"
#include "icjm/numerics.hpp"

namespace icjm {

namespace {

using detail::exp_body;

constexpr int kGk = GaussKronrod15::n_points;
constexpr double kLog2Pi = 1.8378770664093454836;

// Hazard-evaluation grids for one transition of one subject. Weighted nodes
// come in consecutive 15-node blocks; point evaluations enter the draw loop
// on the log scale.
struct TransNodes {
  std::vector<double> t, logt, w;  // weighted nodes; w = gk weight * jacobian
  int n_blocks = 0;
  int blk_entry = -1;
  int blk_surv = -1;
  int blk_inner0 = -1;  // first of 15 blocks over [0, u_k]  (01 / 02)
  int blk_tail0 = -1;   // first of 15 blocks over [u_k, T]  (12)
  int blk_lt = -1;      // one block over [L, T]             (12, exact case)
  std::vector<double> pt, logpt;  // point-eval times
  int pt_outer0 = -1;  // 15 outer integrand points (01)
  int pt_term = -1;    // single point eval

  int add_block(double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (int i = 0; i < kGk; ++i) {
      const double ti = c + h * GaussKronrod15::nodes[i];
      t.push_back(ti);
      logt.push_back(ti > 0.0 ? std::log(ti) : kNegInf);
      w.push_back(h * GaussKronrod15::weights[i]);
    }
    return n_blocks++;
  }
  int add_point(double ti) {
    pt.push_back(ti);
    logpt.push_back(ti > 0.0 ? std::log(ti) : kNegInf);
    return int(pt.size()) - 1;
  }
};

struct VisitStat {
  double time;
  double ybar;
  double ss;
  int n;
  int det_slot;  // index into the distinct-n tables
};

struct SubjectWork {
  std::string id;
  CaseTag tag{};
  bool death = false;
  bool has_entry = false;
  double entry = 0, terminal = 0, last_healthy = 0, bracket_hi = 0;
  std::array<TransNodes, 3> tn;
  std::array<double, kGk> outer_t{};
  std::array<double, kGk> log_outer_w{};
  std::vector<VisitStat> visits;
  double ss_sum = 0;
  double n_total = 0, n_minus1_total = 0;
  std::vector<std::pair<int, double>> det_counts;  // (slot, visit count)
  Eigen::VectorXd xcov;
  std::array<Eigen::VectorXd, 3> W;
};

struct ThreadScratch {
  std::vector<double> lam_entry01, lam_entry02, lam_surv01, lam_surv02;
  std::vector<double> lam_in01, lam_in02, lam_tail12, lam_lt12;
  std::vector<double> p01, p02, p12, q01, q02, q12;
  std::vector<double> acc, num, den;
  std::vector<double> basew;
  std::array<std::array<double, kGk>, 3> pt_logb{};  // point-eval log bases

  void ensure(int S, std::size_t max_nodes) {
    const auto n = std::size_t(S);
    for (auto* v :
         {&lam_entry01, &lam_entry02, &lam_surv01, &lam_surv02, &lam_lt12,
          &p01, &p02, &p12, &q01, &q02, &q12, &acc, &num, &den})
      v->resize(n);
    lam_in01.resize(n * kGk);
    lam_in02.resize(n * kGk);
    lam_tail12.resize(n * kGk);
    basew.resize(std::max<std::size_t>(max_nodes, 1));
  }
};

// lam[s] = sum_j basew[j] * exp(P[s] + Q[s] * t[j]); an identically zero Q
// collapses the block to a scalar multiple of exp(P).
void block_lambda(const double* t, const double* basew, const double* P,
                  const double* Q, bool q_zero, int S, double* lam) {
  if (q_zero) {
    double c = 0.0;
    for (int j = 0; j < kGk; ++j) c += basew[j];
#pragma omp simd
    for (int s = 0; s < S; ++s) lam[s] = c * exp_body(P[s]);
    return;
  }
  std::memset(lam, 0, sizeof(double) * std::size_t(S));
  for (int j = 0; j < kGk; ++j) {
    const double tj = t[j], bj = basew[j];
#pragma omp simd
    for (int s = 0; s < S; ++s) lam[s] += bj * exp_body(P[s] + Q[s] * tj);
  }
}

// log(mean of exp(v))  + log(n), i.e. log(sum exp(v)), fixed order.
double log_sum_exp(const double* v, int n) {
  double m = kNegInf;
  for (int s = 0; s < n; ++s) m = std::max(m, v[s]);
  if (m == kNegInf || !std::isfinite(m)) return m;
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (int s = 0; s < n; ++s) acc += exp_body(v[s] - m);
  return m + std::log(acc);
}

}  // namespace

struct LikelihoodEvaluator::Impl {
  ModelSpec spec;
  Dataset data;
  QmcConfig cfg;
  bool longitudinal_only = false;
  int S = 0;
  int q = 0;
  bool fast_layout = true;  // q <= 2: log-hazard draw dependence is P + Q t

  std::vector<std::vector<double>> zrows;  // standard normals, row-major
  std::vector<SubjectWork> subjects;
  std::vector<int> distinct_n;
  std::size_t max_nodes = 0;

  // per-theta state (one evaluation at a time; not reentrant)
  mutable std::vector<double> b0, b1, tau_s, tau_k, sigma, kappa, sig2;
  mutable std::vector<double> logk2, invk2;
  mutable std::vector<std::vector<double>> logdet, invdet;
  mutable std::vector<RandomEffects> generic_draws;  // q > 2 fallback
  mutable std::vector<std::unique_ptr<ThreadScratch>> scratch;
  mutable std::vector<double> contrib;
  mutable std::string failure_id;

  void build_subject(SubjectWork& sw, const SubjectData& sd);
  void prepare_theta(const ParameterSet& p) const;
  void fill_bases(const SubjectWork& sw, const ParameterSet& p, int trans,
                  ThreadScratch& ts) const;
  double eval_subject(const SubjectWork& sw, const ParameterSet& p,
                      ThreadScratch& ts) const;
  ThreadScratch& thread_scratch() const;
};

void LikelihoodEvaluator::Impl::build_subject(SubjectWork& sw,
                                              const SubjectData& sd) {
  sd.validate();
  if (sd.marker_covariates.size() != spec.n_marker_covariates)
    throw std::invalid_argument("subject " + sd.id +
                                ": marker covariate count mismatch");
  for (int tr = 0; tr < 3; ++tr)
    if (sd.event.covariates[tr].size() != spec.transitions[tr].n_covariates)
      throw std::invalid_argument("subject " + sd.id +
                                  ": transition covariate count mismatch");
  sw.id = sd.id;
  sw.xcov = sd.marker_covariates;
  sw.W = sd.event.covariates;
  const EventRecord& ev = sd.event;
  sw.tag = classify_case(ev);
  sw.death = ev.death;
  sw.entry = ev.entry;
  sw.terminal = ev.terminal;
  sw.last_healthy = ev.last_healthy;
  sw.has_entry = ev.entry > 0.0;

  auto& t01 = sw.tn[0];
  auto& t02 = sw.tn[1];
  auto& t12 = sw.tn[2];

  if (!longitudinal_only) {
    if (sw.has_entry) {
      t01.blk_entry = t01.add_block(0.0, sw.entry);
      t02.blk_entry = t02.add_block(0.0, sw.entry);
    }
    const bool bracket = sw.tag == CaseTag::IntervalIllness ||
                         sw.tag == CaseTag::HealthyBeforeTerminal;
    if (sw.tag == CaseTag::HealthyAtTerminal ||
        sw.tag == CaseTag::HealthyBeforeTerminal) {
      t01.blk_surv = t01.add_block(0.0, sw.terminal);
      t02.blk_surv = t02.add_block(0.0, sw.terminal);
      if (sw.death) t02.pt_term = t02.add_point(sw.terminal);
    } else if (sw.tag == CaseTag::ExactIllness) {
      t01.blk_surv = t01.add_block(0.0, sw.last_healthy);
      t02.blk_surv = t02.add_block(0.0, sw.last_healthy);
      t01.pt_term = t01.add_point(sw.last_healthy);
      t12.blk_lt = t12.add_block(sw.last_healthy, sw.terminal);
      if (sw.death) t12.pt_term = t12.add_point(sw.terminal);
    }
    if (bracket) {
      sw.bracket_hi =
          sw.tag == CaseTag::IntervalIllness ? *ev.diagnosis : sw.terminal;
      const double c = 0.5 * (sw.last_healthy + sw.bracket_hi);
      const double h = 0.5 * (sw.bracket_hi - sw.last_healthy);
      for (int k = 0; k < kGk; ++k) {
        sw.outer_t[k] = c + h * GaussKronrod15::nodes[k];
        const double wk = h * GaussKronrod15::weights[k];
        sw.log_outer_w[k] = wk > 0.0 ? std::log(wk) : kNegInf;
      }
      for (int k = 0; k < kGk; ++k) {
        const int b01 = t01.add_block(0.0, sw.outer_t[k]);
        const int b02 = t02.add_block(0.0, sw.outer_t[k]);
        const int b12 = t12.add_block(sw.outer_t[k], sw.terminal);
        if (k == 0) {
          t01.blk_inner0 = b01;
          t02.blk_inner0 = b02;
          t12.blk_tail0 = b12;
        }
      }
      for (int k = 0; k < kGk; ++k) {
        const int ix = t01.add_point(sw.outer_t[k]);
        if (k == 0) t01.pt_outer0 = ix;
      }
      if (sw.death) t12.pt_term = t12.add_point(sw.terminal);
    }
  }

  for (const auto& block : sd.visits) {
    VisitStat vs;
    vs.time = block.time;
    vs.n = int(block.measurements.size());
    double m = 0.0;
    for (double y : block.measurements) m += y;
    m /= vs.n;
    vs.ybar = m;
    vs.ss = 0.0;
    for (double y : block.measurements) vs.ss += (y - m) * (y - m);
    sw.ss_sum += vs.ss;
    sw.n_total += vs.n;
    sw.n_minus1_total += vs.n - 1;
    auto it = std::find(distinct_n.begin(), distinct_n.end(), vs.n);
    if (it == distinct_n.end()) {
      distinct_n.push_back(vs.n);
      vs.det_slot = int(distinct_n.size()) - 1;
    } else {
      vs.det_slot = int(it - distinct_n.begin());
    }
    sw.visits.push_back(vs);
  }
  for (std::size_t slot = 0; slot < distinct_n.size(); ++slot) {
    double cnt = 0;
    for (const auto& vs : sw.visits)
      if (vs.det_slot == int(slot)) cnt += 1;
    if (cnt > 0) sw.det_counts.emplace_back(int(slot), cnt);
  }
  for (const auto& tn : sw.tn) max_nodes = std::max(max_nodes, tn.t.size());
}

LikelihoodEvaluator::LikelihoodEvaluator(ModelSpec spec, Dataset dataset,
                                         QmcConfig cfg, bool longitudinal_only)
    : impl_(std::make_unique<Impl>()) {
  spec.validate();
  cfg.validate();
  if (dataset.empty())
    throw std::invalid_argument("LikelihoodEvaluator: empty dataset");
  if (cfg.dimension != spec.re_dim())
    throw std::invalid_argument(
        "LikelihoodEvaluator: QMC dimension must equal q + 2");
  impl_->spec = spec;
  impl_->cfg = cfg;
  impl_->longitudinal_only = longitudinal_only;
  impl_->S = cfg.draws;
  impl_->q = spec.n_random;
  impl_->fast_layout = spec.n_random <= 2;
  impl_->data = std::move(dataset);

  const Eigen::MatrixXd z = sobol_standard_normals(cfg);
  impl_->zrows.assign(cfg.dimension, std::vector<double>(cfg.draws));
  for (int d = 0; d < cfg.dimension; ++d)
    for (int s = 0; s < cfg.draws; ++s) impl_->zrows[d][s] = z(d, s);

  impl_->subjects.resize(impl_->data.size());
  for (std::size_t i = 0; i < impl_->data.size(); ++i)
    impl_->build_subject(impl_->subjects[i], impl_->data[i]);

  const int S = impl_->S;
  for (auto* v : {&impl_->b0, &impl_->b1, &impl_->tau_s, &impl_->tau_k,
                  &impl_->sigma, &impl_->kappa, &impl_->sig2, &impl_->logk2,
                  &impl_->invk2})
    v->resize(S);
  impl_->logdet.assign(impl_->distinct_n.size(), std::vector<double>(S));
  impl_->invdet.assign(impl_->distinct_n.size(), std::vector<double>(S));
  impl_->scratch.resize(256);
  impl_->contrib.resize(impl_->data.size());
}

LikelihoodEvaluator::~LikelihoodEvaluator() = default;
LikelihoodEvaluator::LikelihoodEvaluator(LikelihoodEvaluator&&) noexcept =
    default;

const Dataset& LikelihoodEvaluator::dataset() const { return impl_->data; }
const ModelSpec& LikelihoodEvaluator::spec() const { return impl_->spec; }
const QmcConfig& LikelihoodEvaluator::qmc() const { return impl_->cfg; }
int LikelihoodEvaluator::draw_count() const { return impl_->S; }
const std::string& LikelihoodEvaluator::last_failure() const {
  return impl_->failure_id;
}

ThreadScratch& LikelihoodEvaluator::Impl::thread_scratch() const {
  const int tid = omp_get_thread_num();
  auto& slot = scratch[std::size_t(tid) % scratch.size()];
  if (!slot) slot = std::make_unique<ThreadScratch>();
  slot->ensure(S, max_nodes);
  return *slot;
}

void LikelihoodEvaluator::Impl::prepare_theta(const ParameterSet& p) const {
  if (!fast_layout) {
    generic_draws = sobol_normal_draws(
        cfg, RandomEffectsDistribution::from_parameters(spec, p));
    return;
  }
  const int n = S;
  const Eigen::MatrixXd& L = p.chol;
  const double* z0 = zrows[0].data();
  const double* z1 = q > 1 ? zrows[1].data() : nullptr;
  const double* zs = zrows[q].data();
  const double* zk = zrows[q + 1].data();
  for (int s = 0; s < n; ++s) b0[s] = L(0, 0) * z0[s];
  if (q > 1) {
    for (int s = 0; s < n; ++s) b1[s] = L(1, 0) * z0[s] + L(1, 1) * z1[s];
  } else {
    std::fill(b1.begin(), b1.end(), 0.0);
  }
  for (int s = 0; s < n; ++s) {
    double acc = L(q, q) * zs[s];
    if (!spec.independent_effects) {
      acc += L(q, 0) * z0[s];
      if (q > 1) acc += L(q, 1) * z1[s];
    }
    tau_s[s] = acc;
  }
  for (int s = 0; s < n; ++s) {
    double acc = L(q + 1, q) * zs[s] + L(q + 1, q + 1) * zk[s];
    if (!spec.independent_effects) {
      acc += L(q + 1, 0) * z0[s];
      if (q > 1) acc += L(q + 1, 1) * z1[s];
    }
    tau_k[s] = acc;
  }
  for (int s = 0; s < n; ++s) sigma[s] = p.mu_sigma + tau_s[s];
  vexp_inplace(sigma.data(), n);
  for (int s = 0; s < n; ++s) kappa[s] = p.mu_kappa + tau_k[s];
  vexp_inplace(kappa.data(), n);
  for (int s = 0; s < n; ++s) sig2[s] = sigma[s] * sigma[s];
  for (int s = 0; s < n; ++s) {
    logk2[s] = 2.0 * (p.mu_kappa + tau_k[s]);
    invk2[s] = 1.0 / (kappa[s] * kappa[s]);
  }
  for (std::size_t slot = 0; slot < distinct_n.size(); ++slot) {
    const double nn = distinct_n[slot];
    auto& ld = logdet[slot];
    auto& id = invdet[slot];
    for (int s = 0; s < n; ++s) {
      const double det = kappa[s] * kappa[s] + nn * sig2[s];
      ld[s] = std::log(det);
      id[s] = 1.0 / det;
    }
  }
}

// Baseline-plus-fixed-effect factor at every node of one transition:
//   arg = zeta [+ log eta + (eta-1) log t] + W'gamma + a1 X(t)'beta
//         + a2 X'(t)'beta
// Weighted nodes store w * exp(arg); point evals keep arg on the log scale.
void LikelihoodEvaluator::Impl::fill_bases(const SubjectWork& sw,
                                           const ParameterSet& p, int trans,
                                           ThreadScratch& ts) const {
  const TransNodes& tn = sw.tn[trans];
  const TransitionSpec& tsp = spec.transitions[trans];
  const TransitionParams& tp = p.trans[trans];
  double c0 = tp.zeta;
  if (tsp.n_covariates > 0) c0 += sw.W[trans].dot(tp.gamma);
  double ceta = 0.0;
  if (tsp.family == BaselineFamily::Weibull) {
    const double eta = tp.sqrt_eta * tp.sqrt_eta;
    c0 += std::log(eta);
    ceta = eta - 1.0;
  }
  const int nb = spec.n_fixed;
  const double* beta = p.beta.data();
  if (spec.n_marker_covariates > 0)
    c0 += tp.a_value * sw.xcov.dot(p.beta.tail(spec.n_marker_covariates));
  const auto arg_at = [&](double ti, double lti) {
    double fx = 0.0, fdx = 0.0, pw = 1.0;
    for (int m = 0; m < nb; ++m) {
      fx += beta[m] * pw;
      if (m + 1 < nb) fdx += beta[m + 1] * (m + 1) * pw;
      pw *= ti;
    }
    return c0 + ceta * lti + tp.a_value * fx + tp.a_slope * fdx;
  };
  const int n_nodes = int(tn.t.size());
  for (int i = 0; i < n_nodes; ++i) ts.basew[i] = arg_at(tn.t[i], tn.logt[i]);
  vexp_inplace(ts.basew.data(), n_nodes);
  for (int i = 0; i < n_nodes; ++i) ts.basew[i] *= tn.w[i];
  for (int i = 0; i < int(tn.pt.size()); ++i)
    ts.pt_logb[trans][i] = arg_at(tn.pt[i], tn.logpt[i]);
}

double LikelihoodEvaluator::Impl::eval_subject(const SubjectWork& sw,
                                               const ParameterSet& p,
                                               ThreadScratch& ts) const {
  const int n = S;
  double* num = ts.num.data();

  // --- longitudinal log-density, vectorized over draws ---
  {
    const double c_static = sw.n_total * kLog2Pi;
    const double* lk2 = logk2.data();
    const double nm1 = sw.n_minus1_total;
#pragma omp simd
    for (int s = 0; s < n; ++s) num[s] = c_static + nm1 * lk2[s];
    for (const auto& [slot, cnt] : sw.det_counts) {
      const double* ld = logdet[slot].data();
      const double c = cnt;
#pragma omp simd
      for (int s = 0; s < n; ++s) num[s] += c * ld[s];
    }
    const double ssc = sw.ss_sum;
    const double* ik = invk2.data();
#pragma omp simd
    for (int s = 0; s < n; ++s) num[s] += ssc * ik[s];
    double cx = 0.0;
    if (spec.n_marker_covariates > 0)
      cx = sw.xcov.dot(p.beta.tail(spec.n_marker_covariates));
    const double* pb0 = b0.data();
    const double* pb1 = b1.data();
    for (const auto& vs : sw.visits) {
      double mu = cx, pw = 1.0;
      for (int m = 0; m < spec.n_fixed; ++m, pw *= vs.time)
        mu += p.beta[m] * pw;
      const double r0 = vs.ybar - mu;
      const double tj = vs.time;
      const double nn = vs.n;
      const double* id = invdet[vs.det_slot].data();
#pragma omp simd
      for (int s = 0; s < n; ++s) {
        const double r = r0 - pb0[s] - tj * pb1[s];
        num[s] += nn * r * r * id[s];
      }
    }
#pragma omp simd
    for (int s = 0; s < n; ++s) num[s] *= -0.5;
  }

  double lse_den = std::log(double(n));
  if (!longitudinal_only) {
    // draw parts of the log hazards: P + Q t
    const double* sg = sigma.data();
    const double* kp = kappa.data();
    const double* pb0 = b0.data();
    const double* pb1 = b1.data();
    std::array<double*, 3> P = {ts.p01.data(), ts.p02.data(), ts.p12.data()};
    std::array<double*, 3> Q = {ts.q01.data(), ts.q02.data(), ts.q12.data()};
    std::array<bool, 3> qzero{};
    for (int tr = 0; tr < 3; ++tr) {
      const auto& tp = p.trans[tr];
      double* Pp = P[tr];
      double* Qp = Q[tr];
      const double av = tp.a_value, as = tp.a_slope, ag = tp.a_sigma,
                   ak = tp.a_kappa;
#pragma omp simd
      for (int s = 0; s < n; ++s)
        Pp[s] = av * pb0[s] + as * pb1[s] + ag * sg[s] + ak * kp[s];
      qzero[tr] = av == 0.0 || q == 1;
      if (!qzero[tr]) {
#pragma omp simd
        for (int s = 0; s < n; ++s) Qp[s] = av * pb1[s];
      } else {
        std::memset(Qp, 0, sizeof(double) * std::size_t(n));
      }
    }

    for (int tr = 0; tr < 3; ++tr) {
      const TransNodes& tn = sw.tn[tr];
      if (tn.t.empty() && tn.pt.empty()) continue;
      fill_bases(sw, p, tr, ts);
      const double* bw = ts.basew.data();
      const double* tt = tn.t.data();
      if (tn.blk_entry >= 0)
        block_lambda(tt + tn.blk_entry * kGk, bw + tn.blk_entry * kGk, P[tr],
                     Q[tr], qzero[tr], n,
                     (tr == 0 ? ts.lam_entry01 : ts.lam_entry02).data());
      if (tn.blk_surv >= 0)
        block_lambda(tt + tn.blk_surv * kGk, bw + tn.blk_surv * kGk, P[tr],
                     Q[tr], qzero[tr], n,
                     (tr == 0 ? ts.lam_surv01 : ts.lam_surv02).data());
      if (tn.blk_inner0 >= 0) {
        double* dst = tr == 0 ? ts.lam_in01.data() : ts.lam_in02.data();
        for (int k = 0; k < kGk; ++k)
          block_lambda(tt + (tn.blk_inner0 + k) * kGk,
                       bw + (tn.blk_inner0 + k) * kGk, P[tr], Q[tr],
                       qzero[tr], n, dst + std::size_t(k) * n);
      }
      if (tn.blk_tail0 >= 0)
        for (int k = 0; k < kGk; ++k)
          block_lambda(tt + (tn.blk_tail0 + k) * kGk,
                       bw + (tn.blk_tail0 + k) * kGk, P[tr], Q[tr], qzero[tr],
                       n, ts.lam_tail12.data() + std::size_t(k) * n);
      if (tn.blk_lt >= 0)
        block_lambda(tt + tn.blk_lt * kGk, bw + tn.blk_lt * kGk, P[tr], Q[tr],
                     qzero[tr], n, ts.lam_lt12.data());
    }

    // delayed-entry denominator
    if (sw.has_entry) {
      double* den = ts.den.data();
      const double* e1 = ts.lam_entry01.data();
      const double* e2 = ts.lam_entry02.data();
#pragma omp simd
      for (int s = 0; s < n; ++s) den[s] = -(e1[s] + e2[s]);
      lse_den = log_sum_exp(den, n);
    }

    // case-specific survival factor added onto num
    const double T = sw.terminal;
    const double* p01 = ts.p01.data();
    const double* p02 = ts.p02.data();
    const double* p12 = ts.p12.data();
    const double* q01 = ts.q01.data();
    const double* q02 = ts.q02.data();
    const double* q12 = ts.q12.data();
    const bool bracket = sw.tag == CaseTag::IntervalIllness ||
                         sw.tag == CaseTag::HealthyBeforeTerminal;
    if (bracket) {
      double* acc = ts.acc.data();
      std::memset(acc, 0, sizeof(double) * std::size_t(n));
      const double* in01 = ts.lam_in01.data();
      const double* in02 = ts.lam_in02.data();
      const double* tl12 = ts.lam_tail12.data();
      for (int k = 0; k < kGk; ++k) {
        const double ck =
            sw.log_outer_w[k] + ts.pt_logb[0][sw.tn[0].pt_outer0 + k];
        const double uk = sw.outer_t[k];
        const double* a = in01 + std::size_t(k) * n;
        const double* b = in02 + std::size_t(k) * n;
        const double* c = tl12 + std::size_t(k) * n;
#pragma omp simd
        for (int s = 0; s < n; ++s)
          acc[s] +=
              exp_body(ck + p01[s] + q01[s] * uk - a[s] - b[s] - c[s]);
      }
      const double log_lam12_b =
          sw.death ? ts.pt_logb[2][sw.tn[2].pt_term] : 0.0;
      if (sw.tag == CaseTag::IntervalIllness) {
        for (int s = 0; s < n; ++s) {
          double le = acc[s] > 0.0 ? std::log(acc[s]) : kNegInf;
          if (sw.death) le += log_lam12_b + p12[s] + q12[s] * T;
          num[s] += le;
        }
      } else {
        const double* s1 = ts.lam_surv01.data();
        const double* s2 = ts.lam_surv02.data();
        const double log_lam02_b =
            sw.death ? ts.pt_logb[1][sw.tn[1].pt_term] : 0.0;
        for (int s = 0; s < n; ++s) {
          double healthy = -(s1[s] + s2[s]);
          double br = acc[s] > 0.0 ? std::log(acc[s]) : kNegInf;
          if (sw.death) {
            healthy += log_lam02_b + p02[s] + q02[s] * T;
            br += log_lam12_b + p12[s] + q12[s] * T;
          }
          num[s] += log_add_exp(healthy, br);
        }
      }
    } else if (sw.tag == CaseTag::HealthyAtTerminal) {
      const double* s1 = ts.lam_surv01.data();
      const double* s2 = ts.lam_surv02.data();
      if (sw.death) {
        const double lb = ts.pt_logb[1][sw.tn[1].pt_term];
#pragma omp simd
        for (int s = 0; s < n; ++s)
          num[s] += -(s1[s] + s2[s]) + lb + p02[s] + q02[s] * T;
      } else {
#pragma omp simd
        for (int s = 0; s < n; ++s) num[s] += -(s1[s] + s2[s]);
      }
    } else {  // ExactIllness
      const double L = sw.last_healthy;
      const double* s1 = ts.lam_surv01.data();
      const double* s2 = ts.lam_surv02.data();
      const double* lt = ts.lam_lt12.data();
      const double lb01 = ts.pt_logb[0][sw.tn[0].pt_term];
      const double lb12 = sw.death ? ts.pt_logb[2][sw.tn[2].pt_term] : 0.0;
      if (sw.death) {
#pragma omp simd
        for (int s = 0; s < n; ++s)
          num[s] += -(s1[s] + s2[s]) + lb01 + p01[s] + q01[s] * L - lt[s] +
                    lb12 + p12[s] + q12[s] * T;
      } else {
#pragma omp simd
        for (int s = 0; s < n; ++s)
          num[s] += -(s1[s] + s2[s]) + lb01 + p01[s] + q01[s] * L - lt[s];
      }
    }
  }

  const double lse_num = log_sum_exp(num, n);
  return lse_num - lse_den;
}

double LikelihoodEvaluator::total_loglik(const ParameterSet& params) const {
  auto& im = *impl_;
  im.failure_id.clear();
  im.prepare_theta(params);
  std::atomic<bool> failed{false};
  const int nsub = int(im.subjects.size());
  if (im.fast_layout) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < nsub; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      double v;
      try {
        v = im.eval_subject(im.subjects[i], params, im.thread_scratch());
      } catch (const std::exception&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      im.contrib[i] = v;
      if (!std::isfinite(v)) failed.store(true, std::memory_order_relaxed);
    }
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < nsub; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      double v;
      try {
        v = ref::subject_marginal_given_draws(im.spec, im.data[i], params,
                                              im.generic_draws,
                                              im.longitudinal_only);
      } catch (const std::exception&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      im.contrib[i] = v;
      if (!std::isfinite(v)) failed.store(true, std::memory_order_relaxed);
    }
  }
  if (failed.load()) {
    for (int i = 0; i < nsub; ++i)
      if (!std::isfinite(im.contrib[i])) {
        im.failure_id = im.subjects[i].id;
        break;
      }
    return std::numeric_limits<double>::quiet_NaN();
  }
  return pairwise_sum(im.contrib);
}

double LikelihoodEvaluator::total_loglik_flat(
    const Eigen::VectorXd& flat) const {
  return total_loglik(ParameterSet::unpack(impl_->spec, flat));
}

double LikelihoodEvaluator::subject_loglik(int index,
                                           const ParameterSet& params) const {
  auto& im = *impl_;
  if (index < 0 || index >= int(im.subjects.size()))
    throw std::out_of_range("subject_loglik: bad index");
  im.prepare_theta(params);
  if (!im.fast_layout)
    return ref::subject_marginal_given_draws(
        im.spec, im.data[index], params, im.generic_draws, im.longitudinal_only);
  return im.eval_subject(im.subjects[index], params, im.thread_scratch());
}

}  // namespace icjm
