#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tvqm/core.hpp"
#include "tvqm/video_io.hpp"

namespace tvqm {

struct SubjectiveRecord {
  std::string sequence_id;
  double dmos = 0.0;
  std::map<std::string, double> objective_scores;
};

struct ValidationReport {
  double rmse = 0.0;
  double cc = 0.0;
  double rocc = 0.0;
  double mae = 0.0;
  double outlier_ratio = 0.0;
  double sigma_dmos = 0.0;
  int n = 0;
  bool mapping_used = false;
  bool cc_defined = true;
  std::string degeneracy_reason;
};

struct LogisticParams {
  // dmos ~ b1 + b2 / (1 + exp(-b3 * (x - b4)))
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
  bool converged = false;

  double map(double x) const {
    if (!converged) return x;  // identity fallback
    return b1 + b2 / (1.0 + std::exp(-b3 * (x - b4)));
  }
};

namespace stats {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

/// Average ranks for ties.
inline std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

}  // namespace stats

/// Header: sequence_id, dmos, then one column per objective metric.
inline std::vector<SubjectiveRecord> load_dmos_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw std::runtime_error(path + ": missing header row");
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "sequence_id" || header[1] != "dmos")
    throw std::runtime_error(path + ": header must start with sequence_id,dmos");

  std::vector<SubjectiveRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw std::runtime_error(path + ": line " + std::to_string(r + 1) +
                               " has " + std::to_string(row.size()) + " fields, expected " +
                               std::to_string(header.size()));
    SubjectiveRecord rec;
    rec.sequence_id = row[0];
    std::size_t pos = 0;
    try {
      rec.dmos = std::stod(row[1], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != row[1].size() || row[1].empty())
      throw std::runtime_error(path + ": line " + std::to_string(r + 1) +
                               ": non-numeric dmos '" + row[1] + "'");
    for (std::size_t c = 2; c < header.size(); ++c) {
      try {
        rec.objective_scores[header[c]] = std::stod(row[c], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != row[c].size() || row[c].empty())
        throw std::runtime_error(path + ": line " + std::to_string(r + 1) +
                                 ": non-numeric value '" + row[c] + "' for " + header[c]);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

template <typename SseFn>
inline void logistic_lm(LogisticParams& p, const std::vector<double>& objective,
                        const std::vector<double>& dmos, const SseFn& sse) {
  const std::size_t n = objective.size();
  double lambda = 1e-3;
  double prev = sse(p);
  bool converged = false;
  for (int iter = 0; iter < 500; ++iter) {
    // Normal equations J^T J delta = J^T r with LM damping.
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-p.b3 * (objective[i] - p.b4));
      const double g = 1.0 / (1.0 + e);
      const double f = p.b1 + p.b2 * g;
      const double r = dmos[i] - f;
      const double dg = g * (1.0 - g);
      const double j[4] = {1.0, g, p.b2 * dg * (objective[i] - p.b4), -p.b2 * dg * p.b3};
      for (int a = 0; a < 4; ++a) {
        jtr[a] += j[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += j[a] * j[b];
      }
    }
    for (int a = 0; a < 4; ++a) jtj[a][a] *= 1.0 + lambda;

    // Gaussian elimination with partial pivoting.
    double aug[4][5];
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) aug[a][b] = jtj[a][b];
      aug[a][4] = jtr[a];
    }
    bool singular = false;
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int row = col + 1; row < 4; ++row)
        if (std::abs(aug[row][col]) > std::abs(aug[piv][col])) piv = row;
      if (std::abs(aug[piv][col]) < 1e-30) { singular = true; break; }
      std::swap(aug[col], aug[piv]);
      for (int row = col + 1; row < 4; ++row) {
        const double f = aug[row][col] / aug[col][col];
        for (int b = col; b < 5; ++b) aug[row][b] -= f * aug[col][b];
      }
    }
    if (singular) { lambda *= 10.0; continue; }
    double delta[4];
    for (int a = 3; a >= 0; --a) {
      double s = aug[a][4];
      for (int b = a + 1; b < 4; ++b) s -= aug[a][b] * delta[b];
      delta[a] = s / aug[a][a];
    }

    LogisticParams trial = p;
    trial.b1 += delta[0];
    trial.b2 += delta[1];
    trial.b3 += delta[2];
    trial.b4 += delta[3];
    const double cur = sse(trial);
    if (std::isfinite(cur) && cur <= prev) {
      p = trial;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (prev - cur < 1e-9 * (1.0 + prev)) { converged = true; prev = cur; break; }
      prev = cur;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  p.converged = converged;
}

}  // namespace detail

/// Damped Gauss-Newton fit of the 4-parameter monotone logistic mapping.
/// Deterministic initialization from the data ranges over several slope
/// scales (near-linear data needs a flat logistic); 500 iterations max per
/// start, 1e-9 tolerance on the residual change; best start wins.
inline LogisticParams logistic_fit(const std::vector<double>& objective,
                                   const std::vector<double>& dmos) {
  if (objective.size() != dmos.size() || objective.size() < 4)
    throw std::invalid_argument("logistic_fit: need >= 4 paired points");
  const std::size_t n = objective.size();

  const auto [xmin_it, xmax_it] = std::minmax_element(objective.begin(), objective.end());
  const auto [dmin_it, dmax_it] = std::minmax_element(dmos.begin(), dmos.end());
  const double xrange = *xmax_it - *xmin_it;
  const double drange = *dmax_it - *dmin_it;
  LogisticParams best;
  if (xrange == 0.0 || drange == 0.0) return best;  // degenerate, identity fallback

  auto sse = [&](const LogisticParams& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = dmos[i] - (q.b1 + q.b2 / (1.0 + std::exp(-q.b3 * (objective[i] - q.b4))));
      s += r * r;
    }
    return s;
  };

  const double corr = stats::pearson(objective, dmos);
  const double slope = (corr >= 0.0 ? 1.0 : -1.0) * drange / xrange;
  const double dmean = stats::mean(dmos);
  double best_sse = std::numeric_limits<double>::infinity();
  for (const double scale : {4.0, 1.0, 0.1, 0.01, 0.001}) {
    LogisticParams p;
    p.b3 = scale / xrange;
    p.b2 = 4.0 * slope / p.b3;  // center slope of the logistic is b2*b3/4
    p.b1 = dmean - p.b2 / 2.0;
    p.b4 = stats::mean(objective);
    detail::logistic_lm(p, objective, dmos, sse);
    const double s = sse(p);
    if (s < best_sse) {
      best_sse = s;
      best = p;
    }
  }
  return best;
}

/// VQEG-style agreement between one objective metric and DMOS.
/// Outliers: |residual| > 2 * sigma_DMOS (population std of the DMOS column).
inline ValidationReport validate(const std::vector<SubjectiveRecord>& records,
                                 const std::string& metric_name,
                                 bool use_logistic_mapping = false) {
  std::vector<double> obj, dmos;
  for (const auto& rec : records) {
    const auto it = rec.objective_scores.find(metric_name);
    if (it != rec.objective_scores.end()) {
      obj.push_back(it->second);
      dmos.push_back(rec.dmos);
    }
  }
  if (obj.size() < 3)
    throw std::invalid_argument("validate: need at least 3 records with metric '" +
                                metric_name + "'");

  ValidationReport rep;
  rep.n = static_cast<int>(obj.size());
  rep.sigma_dmos = population_std(dmos);

  std::vector<double> mapped = obj;
  if (use_logistic_mapping && obj.size() >= 4) {
    const LogisticParams p = logistic_fit(obj, dmos);
    rep.mapping_used = p.converged;
    if (p.converged)
      for (double& x : mapped) x = p.map(x);
  }

  double se = 0.0, ae = 0.0;
  int outliers = 0;
  const double cutoff = 2.0 * rep.sigma_dmos;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    const double r = mapped[i] - dmos[i];
    se += r * r;
    ae += std::abs(r);
    if (std::abs(r) > cutoff) ++outliers;
  }
  rep.rmse = std::sqrt(se / static_cast<double>(mapped.size()));
  rep.mae = ae / static_cast<double>(mapped.size());
  rep.outlier_ratio = static_cast<double>(outliers) / static_cast<double>(mapped.size());

  rep.cc = stats::pearson(mapped, dmos);
  rep.rocc = stats::spearman(obj, dmos);  // rank stats ignore the monotone mapping
  if (std::isnan(rep.cc) || std::isnan(rep.rocc)) {
    rep.cc_defined = false;
    rep.degeneracy_reason = "constant objective scores or constant dmos";
  }
  return rep;
}

/// Serialize reports in the Table-1 column order.
inline CsvTable reports_to_csv(const std::vector<std::pair<std::string, ValidationReport>>& reports) {
  CsvTable t;
  t.header = {"metric", "RMSE", "CC", "ROCC", "MAE", "OR", "sigma_DMOS", "n", "mapping_used"};
  for (const auto& [name, r] : reports)
    t.add_row({name, r.rmse, r.cc, r.rocc, r.mae, r.outlier_ratio, r.sigma_dmos,
               static_cast<double>(r.n), static_cast<double>(r.mapping_used)});
  return t;
}

}  // namespace tvqm
