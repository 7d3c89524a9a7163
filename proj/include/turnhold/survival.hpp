#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "turnhold/error.hpp"
#include "turnhold/io.hpp"
#include "turnhold/stats.hpp"

namespace turnhold {

struct SurvivalRecord {
  std::string id;     // pair id (provenance only)
  std::string group;  // condition label
  double time = 0;    // seconds; horizon when censored
  bool event = false; // true = turn shift observed
  std::vector<double> covariates;
};

struct KMStep {
  double time = 0;
  double survival = 1;
  std::size_t at_risk = 0;
  std::size_t events = 0;
};

// Product-limit curve; always starts at (0, 1) with the full risk set.
struct KMCurve {
  std::string group;
  std::vector<KMStep> steps;
  double max_time = 0;  // follow-up extent: largest observation, censored or not

  double survival_at(double t) const {
    double s = 1;
    for (const auto& st : steps) {
      if (st.time > t) break;
      s = st.survival;
    }
    return s;
  }
};

inline KMCurve kaplan_meier(std::span<const SurvivalRecord> records,
                            const std::string& group = "") {
  if (records.empty()) throw ValidationError("kaplan_meier: no records");
  std::vector<std::pair<double, bool>> obs;  // (time, event)
  obs.reserve(records.size());
  for (const auto& r : records) obs.emplace_back(r.time, r.event);
  std::sort(obs.begin(), obs.end());

  KMCurve curve;
  curve.group = group;
  curve.max_time = obs.back().first;
  curve.steps.push_back({0.0, 1.0, obs.size(), 0});
  double s = 1.0;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].first;
    std::size_t d = 0, removed = 0;
    const std::size_t at_risk = obs.size() - i;  // ties count as still at risk
    while (i < obs.size() && obs[i].first == t) {
      d += obs[i].second ? 1 : 0;
      ++removed;
      ++i;
    }
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.steps.push_back({t, s, at_risk, d});
    }
    (void)removed;
  }
  return curve;
}

struct LogRankResult {
  double chi2 = 0;
  int df = 1;
  double p = 1;
  std::array<std::string, 2> groups;
  std::array<double, 2> observed{0, 0};
  std::array<double, 2> expected{0, 0};
};

// Two-group log-rank test: observed-minus-expected events accumulated over
// the pooled event times, with the hypergeometric variance at each.
inline LogRankResult log_rank(std::span<const SurvivalRecord> records) {
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.group);
  if (names.size() != 2)
    throw ValidationError("log_rank: need exactly 2 groups, got " +
                          std::to_string(names.size()));
  LogRankResult res;
  res.groups = {*names.begin(), *std::next(names.begin())};

  struct Obs {
    double time;
    bool event;
    int g;
  };
  std::vector<Obs> obs;
  obs.reserve(records.size());
  for (const auto& r : records)
    obs.push_back({r.time, r.event, r.group == res.groups[0] ? 0 : 1});
  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.time < b.time; });

  std::array<double, 2> at_risk{0, 0};
  for (const auto& o : obs) at_risk[static_cast<std::size_t>(o.g)] += 1;

  double oe = 0, var = 0;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].time;
    std::array<double, 2> d{0, 0};
    std::array<double, 2> removed{0, 0};
    while (i < obs.size() && obs[i].time == t) {
      const auto g = static_cast<std::size_t>(obs[i].g);
      if (obs[i].event) d[g] += 1;
      removed[g] += 1;
      ++i;
    }
    const double n = at_risk[0] + at_risk[1];
    const double dt = d[0] + d[1];
    if (dt > 0 && at_risk[0] > 0 && at_risk[1] > 0) {
      const double e0 = dt * at_risk[0] / n;
      res.observed[0] += d[0];
      res.observed[1] += d[1];
      res.expected[0] += e0;
      res.expected[1] += dt - e0;
      oe += d[0] - e0;
      if (n > 1)
        var += dt * (at_risk[0] / n) * (at_risk[1] / n) * (n - dt) / (n - 1);
    } else if (dt > 0) {
      // Only one group left at risk: contributes no between-group information.
      res.observed[0] += d[0];
      res.observed[1] += d[1];
      res.expected[0] += d[0];
      res.expected[1] += d[1];
    }
    at_risk[0] -= removed[0];
    at_risk[1] -= removed[1];
  }
  if (!(var > 0))
    throw ValidationError("log_rank: degenerate risk sets, statistic undefined");
  res.chi2 = oe * oe / var;
  res.p = chi_square_tail(res.chi2, 1);
  return res;
}

enum class TieMethod { efron, breslow };

struct CoxTerm {
  std::string name;
  double coef = 0;
  double exp_coef = 1;
  double se = 0;
  double z = 0;
  double p = 1;
};

struct CoxFit {
  std::vector<CoxTerm> terms;
  double log_likelihood = 0;       // at the optimum
  double null_log_likelihood = 0;  // at beta = 0
  int iterations = 0;
  bool converged = false;
  TieMethod ties = TieMethod::efron;
  std::size_t n_records = 0;
  std::size_t n_events = 0;
};

namespace detail {

struct CoxData {
  std::vector<double> time;   // sorted ascending
  std::vector<bool> event;
  Eigen::MatrixXd x;          // centered covariates, rows follow `time`
};

struct CoxEval {
  double ll = 0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd info;  // observed information (negative Hessian)
};

// Log partial likelihood with gradient and information, Efron or Breslow
// tie reduction. One reverse sweep over the time-sorted records keeps the
// risk-set sums incremental.
inline CoxEval cox_eval(const CoxData& d, const Eigen::VectorXd& beta, TieMethod ties,
                        bool derivatives) {
  const auto n = static_cast<std::ptrdiff_t>(d.time.size());
  const auto p = static_cast<std::ptrdiff_t>(d.x.cols());
  CoxEval ev;
  ev.grad = Eigen::VectorXd::Zero(p);
  ev.info = Eigen::MatrixXd::Zero(p, p);

  Eigen::VectorXd eta = d.x * beta;
  double s0 = 0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  std::ptrdiff_t i = n - 1;
  while (i >= 0) {
    const double t = d.time[static_cast<std::size_t>(i)];
    // Fold every record tied at t into the risk set, collecting event sums.
    double s0d = 0, eta_d = 0;
    Eigen::VectorXd s1d = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2d = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xd = Eigen::VectorXd::Zero(p);
    std::size_t dt = 0;
    while (i >= 0 && d.time[static_cast<std::size_t>(i)] == t) {
      const double w = std::exp(eta[i]);
      const Eigen::VectorXd xi = d.x.row(i).transpose();
      s0 += w;
      s1 += w * xi;
      if (derivatives) s2 += w * xi * xi.transpose();
      if (d.event[static_cast<std::size_t>(i)]) {
        ++dt;
        eta_d += eta[i];
        xd += xi;
        s0d += w;
        s1d += w * xi;
        if (derivatives) s2d += w * xi * xi.transpose();
      }
      --i;
    }
    if (dt == 0) continue;
    ev.ll += eta_d;
    if (derivatives) ev.grad += xd;
    for (std::size_t k = 0; k < dt; ++k) {
      const double f = ties == TieMethod::efron
                           ? static_cast<double>(k) / static_cast<double>(dt)
                           : 0.0;
      const double phi = s0 - f * s0d;
      ev.ll -= std::log(phi);
      if (derivatives) {
        const Eigen::VectorXd mu = (s1 - f * s1d) / phi;
        ev.grad -= mu;
        ev.info += (s2 - f * s2d) / phi - mu * mu.transpose();
      }
    }
  }
  return ev;
}

}  // namespace detail

// Fits a proportional-hazards model by damped Newton ascent of the
// tie-corrected log partial likelihood. Covariates are centered internally
// (the partial likelihood is location-invariant); coefficients refer to the
// original scale. Non-convergence is reported in the result, not thrown.
inline CoxFit cox_fit(std::span<const SurvivalRecord> records,
                      const std::vector<std::string>& term_names,
                      TieMethod ties = TieMethod::efron, int max_iter = 50,
                      double rel_tol = 1e-9) {
  const auto p = static_cast<std::ptrdiff_t>(term_names.size());
  if (p == 0) throw UsageError("cox_fit: no terms");
  if (records.empty()) throw ValidationError("cox_fit: no records");
  for (const auto& r : records)
    if (static_cast<std::ptrdiff_t>(r.covariates.size()) != p)
      throw ValidationError("cox_fit: record " + r.id + " has " +
                            std::to_string(r.covariates.size()) + " covariates, expected " +
                            std::to_string(p));

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });

  detail::CoxData d;
  d.time.resize(records.size());
  d.event.resize(records.size());
  d.x.resize(static_cast<std::ptrdiff_t>(records.size()), p);
  std::size_t n_events = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[order[r]];
    d.time[r] = rec.time;
    d.event[r] = rec.event;
    n_events += rec.event ? 1 : 0;
    for (std::ptrdiff_t c = 0; c < p; ++c)
      d.x(static_cast<std::ptrdiff_t>(r), c) = rec.covariates[static_cast<std::size_t>(c)];
  }
  if (n_events == 0) throw ValidationError("cox_fit: no events in the data");

  const Eigen::RowVectorXd means = d.x.colwise().mean();
  d.x.rowwise() -= means;

  // Identifiability: the centered design must have full column rank (a
  // zero-variance covariate centers to a zero column).
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto perm = qr.colsPermutation().indices();
    std::string bad;
    for (std::ptrdiff_t c = qr.rank(); c < p; ++c) {
      if (!bad.empty()) bad += ", ";
      bad += term_names[static_cast<std::size_t>(perm[c])];
    }
    throw ValidationError("cox_fit: design matrix is rank-deficient; collinear or constant "
                          "terms: " + bad);
  }

  CoxFit fit;
  fit.ties = ties;
  fit.n_records = records.size();
  fit.n_events = n_events;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  detail::CoxEval ev = detail::cox_eval(d, beta, ties, true);
  fit.null_log_likelihood = ev.ll;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd step = ev.info.ldlt().solve(ev.grad);
    double scale = 1.0;
    Eigen::VectorXd cand;
    detail::CoxEval cand_ev;
    bool improved = false;
    for (int h = 0; h < 32; ++h) {
      cand = beta + scale * step;
      cand_ev = detail::cox_eval(d, cand, ties, true);
      if (std::isfinite(cand_ev.ll) && cand_ev.ll >= ev.ll - 1e-13) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;  // likelihood cannot be improved along the Newton direction
    const double delta = std::abs(cand_ev.ll - ev.ll);
    beta = cand;
    ev = cand_ev;
    if (delta <= rel_tol * (std::abs(ev.ll) + 1.0)) {
      fit.converged = true;
      ++iter;
      break;
    }
  }
  fit.iterations = iter;
  fit.log_likelihood = ev.ll;

  Eigen::MatrixXd cov = ev.info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.terms.resize(static_cast<std::size_t>(p));
  for (std::ptrdiff_t c = 0; c < p; ++c) {
    auto& term = fit.terms[static_cast<std::size_t>(c)];
    term.name = term_names[static_cast<std::size_t>(c)];
    term.coef = beta[c];
    term.exp_coef = std::exp(beta[c]);
    term.se = std::sqrt(std::max(0.0, cov(c, c)));
    term.z = term.se > 0 ? term.coef / term.se : 0.0;
    term.p = normal_two_sided_p(term.z);
  }
  return fit;
}

// Percent change in the turn-shift hazard per `delta` units of the term.
inline double hazard_interpretation(const CoxFit& fit, const std::string& term, double delta) {
  for (const auto& t : fit.terms)
    if (t.name == term) return (std::exp(t.coef * delta) - 1.0) * 100.0;
  throw UsageError("hazard_interpretation: no term named " + term);
}

inline std::string format_p_value(double p) {
  if (p < 0.0001) return "<0.0001";
  return format_fixed(p, 4);
}

// Aligned text table, one row per term: coef, coef(exp), SE, Pr(>|z|).
inline std::string format_cox_table(const CoxFit& fit) {
  const std::array<std::string, 5> header = {"term", "coef", "coef(exp)", "SE", "Pr(>|z|)"};
  std::vector<std::array<std::string, 5>> rows;
  rows.reserve(fit.terms.size());
  for (const auto& t : fit.terms)
    rows.push_back({t.name, format_fixed(t.coef, 3), format_fixed(t.exp_coef, 3),
                    format_fixed(t.se, 3), format_p_value(t.p)});
  std::array<std::size_t, 5> width{};
  for (std::size_t c = 0; c < 5; ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  const auto emit = [&](const std::array<std::string, 5>& r) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (c) out += "  ";
      const std::size_t pad = width[c] - r[c].size();
      if (c == 0)
        out += r[c] + std::string(pad, ' ');
      else
        out += std::string(pad, ' ') + r[c];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

// CSV mirror of the text table.
inline std::string cox_to_csv(const CoxFit& fit) {
  std::string out = "term,coef,exp_coef,se,z,p\n";
  for (const auto& t : fit.terms) {
    out += csv_field(t.name) + "," + format_double(t.coef) + "," + format_double(t.exp_coef) +
           "," + format_double(t.se) + "," + format_double(t.z) + "," + format_double(t.p) +
           "\n";
  }
  return out;
}

inline std::string km_to_csv(std::span<const KMCurve> curves) {
  std::string out = "time,survival,at_risk,events,group\n";
  for (const auto& c : curves)
    for (const auto& s : c.steps)
      out += format_double(s.time) + "," + format_double(s.survival) + "," +
             std::to_string(s.at_risk) + "," + std::to_string(s.events) + "," +
             csv_field(c.group) + "\n";
  return out;
}

inline std::string records_to_csv(std::span<const SurvivalRecord> records) {
  std::string out = "pair_id,group,time,event\n";
  for (const auto& r : records)
    out += csv_field(r.id) + "," + csv_field(r.group) + "," + format_double(r.time) + "," +
           (r.event ? "1" : "0") + "\n";
  return out;
}

}  // namespace turnhold
